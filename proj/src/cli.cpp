#include "sparsevine/cli.hpp"
#include "sparsevine/genomics.hpp"
#include "sparsevine/io.hpp"
#include "sparsevine/select.hpp"
#include "sparsevine/simbench.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <iostream>
#include <set>

namespace sparsevine {

namespace {

using nlohmann::json;

enum class LogLevel
{
  debug,
  info,
  warn,
  error,
  off
};

LogLevel log_level()
{
  const char* env = std::getenv("SPARSEVINE_LOG");
  std::string v = env ? env : "info";
  if (v == "debug")
    return LogLevel::debug;
  if (v == "warn" || v == "warning")
    return LogLevel::warn;
  if (v == "error")
    return LogLevel::error;
  if (v == "off" || v == "none")
    return LogLevel::off;
  return LogLevel::info;
}

void log(LogLevel level, const std::string& event, json fields = json::object())
{
  static const LogLevel threshold = log_level();
  if (level < threshold)
    return;
  static const char* names[] = { "debug", "info", "warn", "error" };
  json j = { { "level", names[static_cast<int>(level)] }, { "event", event } };
  j.update(fields);
  std::cerr << j.dump() << "\n";
}

std::string strip_json_suffix(const std::string& path)
{
  if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return path.substr(0, path.size() - 5);
  return path;
}

void check_levels(const std::vector<double>& levels)
{
  if (levels.empty())
    throw InvalidInput("at least one quantile level is required");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0 && levels[k] < 1.0))
      throw InvalidInput("quantile levels must lie in (0, 1)");
    if (k > 0 && !(levels[k] > levels[k - 1]))
      throw InvalidInput("quantile levels must be strictly increasing");
  }
}

std::string level_column(double a)
{
  return "q" + format_double(a);
}

struct Options
{
  std::string input, output, trace, model, test_input, phenotype, truth, labels, exportp;
  std::string response = "y";
  std::string method = "res";
  std::string criterion = "aic";
  std::string dof_scope = "all";
  std::vector<double> levels{ 0.05, 0.50, 0.95 };
  std::vector<std::string> methods{ "res", "parcor" };
  std::uint64_t seed = 1;
  int threads = 1;
  int dgp = 1;
  int case_id = 1;
  int reps = 1;
  int grouping = 100;
  int max_iterations = 0;
  double freq_threshold = 0.05;
  double p_cut = 0.10;
  double pseudo_quantile = 0.5;
  double sigma = 1.0;
  bool bivariate = false;
};

// Response first, then every other column in file order.
Eigen::MatrixXd regression_matrix(const Table& t, const std::string& response,
                                  std::vector<std::string>& names)
{
  int r = t.column(response);
  names = { response };
  std::vector<int> cols{ r };
  for (int k = 0; k < static_cast<int>(t.header.size()); ++k)
    if (k != r) {
      cols.push_back(k);
      names.push_back(t.header[k]);
    }
  Eigen::MatrixXd x(t.data.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    x.col(static_cast<Eigen::Index>(k)) = t.data.col(cols[k]);
  return x;
}

int cmd_fit(const Options& o)
{
  Table t = read_csv(o.input);
  std::vector<std::string> names;
  Eigen::MatrixXd x = regression_matrix(t, o.response, names);
  if (x.cols() < 2)
    throw InvalidInput("no explanatory columns besides the response");
  SelectionConfig cfg;
  cfg.method = method_from_name(o.method);
  cfg.criterion = o.criterion == "bic" ? Criterion::bic : Criterion::aic;
  cfg.pseudo_quantile = o.pseudo_quantile;
  cfg.dof_scope = o.dof_scope == "response" ? DofScope::response : DofScope::all;
  cfg.threads = o.threads;
  if (o.max_iterations > 0)
    cfg.max_iterations = o.max_iterations;
  cfg.variable_names = names;
  cfg.on_iteration = [&](const IterationRecord& r) {
    log(LogLevel::info, "iteration",
        { { "message", format_log_line(r) },
          { "iteration", r.iteration },
          { "chosen", names[r.chosen] },
          { "score", r.score },
          { "caic", r.caic },
          { "cumulative_fits", r.cumulative_fits },
          { "accepted", r.accepted } });
  };
  log(LogLevel::info, "fit_start",
      { { "input", o.input }, { "rows", x.rows() }, { "explanatory", x.cols() - 1 },
        { "method", o.method }, { "seed", o.seed }, { "threads", o.threads } });
  SelectionResult res = vinereg(x, cfg);
  json model = res.model.to_json();
  json trace = res.trace.to_json();
  std::vector<std::string> chosen;
  for (int v : res.trace.chosen)
    chosen.push_back(names[v]);
  trace["chosen_names"] = chosen;
  trace["seed"] = o.seed;
  std::string trace_path = o.trace.empty() ? strip_json_suffix(o.output) + ".trace.json" : o.trace;
  write_text(o.output, model.dump(2) + "\n");
  write_text(trace_path, trace.dump(2) + "\n");
  log(LogLevel::info, "fit_done",
      { { "chosen", chosen }, { "stop_reason", stop_reason_name(res.trace.stop_reason) },
        { "total_fits", res.trace.total_fits }, { "model", o.output }, { "trace", trace_path } });
  return exit_ok;
}

DVine load_model(const std::string& path)
{
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return DVine::from_json(j);
}

// Data columns laid out by model variable id.
Eigen::MatrixXd model_matrix(const DVine& model, const Table& t, bool need_response)
{
  const auto& names = model.variable_names();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(t.data.rows(), model.max_variable() + 1);
  for (std::size_t k = 0; k < model.order().size(); ++k) {
    int v = model.order()[k];
    if (k == 0 && !need_response)
      continue;
    std::string name = v < static_cast<int>(names.size()) ? names[v] : "x" + std::to_string(v);
    x.col(v) = t.data.col(t.column(name));
  }
  return x;
}

int cmd_predict(const Options& o)
{
  check_levels(o.levels);
  DVine model = load_model(o.model);
  Table t = read_csv(o.input);
  Eigen::MatrixXd x = model_matrix(model, t, false);
  Table out;
  for (double a : o.levels)
    out.header.push_back(level_column(a));
  out.data = model.conditional_quantile(x, o.levels, o.threads);
  std::string text = format_csv(out);
  if (o.output.empty())
    std::cout << text;
  else
    write_text(o.output, text);
  log(LogLevel::info, "predict_done", { { "rows", out.data.rows() }, { "levels", o.levels } });
  return exit_ok;
}

json labels_json(const std::vector<int>& ids)
{
  json a = json::array();
  for (int v : ids)
    a.push_back("x" + std::to_string(v));
  return a;
}

int cmd_simulate(const Options& o)
{
  Dgp dgp = o.dgp == 1 ? Dgp::dgp1 : Dgp::dgp2;
  DGPConfig cfg = dgp_case(dgp, o.case_id);
  cfg.seed = o.seed;
  cfg.sigma = o.sigma;
  if (!o.exportp.empty()) {
    DGPSample s = gen_dgp(cfg);
    Table t;
    t.header.push_back("y");
    for (int k = 1; k <= cfg.p; ++k)
      t.header.push_back("x" + std::to_string(k));
    t.data = s.train;
    write_csv(t, o.exportp + "_train.csv");
    t.data = s.test;
    write_csv(t, o.exportp + "_test.csv");
    json labels = { { "relevant", labels_json(s.relevant) },
                    { "irrelevant", labels_json(s.irrelevant) },
                    { "redundant", labels_json(s.redundant) } };
    write_text(o.exportp + "_labels.json", labels.dump(2) + "\n");
    log(LogLevel::info, "export_done", { { "prefix", o.exportp } });
    return exit_ok;
  }
  BenchmarkOptions bo;
  bo.methods.clear();
  for (const auto& m : o.methods)
    bo.methods.push_back(method_from_name(m));
  bo.replications = o.reps;
  bo.levels = o.levels;
  check_levels(bo.levels);
  bo.threads = o.threads;
  bo.case_id = o.case_id;
  bo.criterion = o.criterion == "bic" ? Criterion::bic : Criterion::aic;
  bo.pseudo_quantile = o.pseudo_quantile;
  bo.dof_scope = o.dof_scope == "response" ? DofScope::response : DofScope::all;
  bo.on_replication = [](int r, Method m, const MetricsReport& rep) {
    json f = { { "replication", r }, { "method", method_name(m) }, { "failed", rep.failed },
               { "chosen", rep.chosen }, { "wall_time", rep.wall_time } };
    if (rep.failed)
      f["error"] = rep.error;
    log(rep.failed ? LogLevel::warn : LogLevel::info, "replication", f);
  };
  BenchmarkResult res = run_benchmark(cfg, bo);
  std::cout << res.summary();
  if (!o.output.empty()) {
    write_text(o.output, res.to_csv());
    std::string side = o.output;
    if (side.size() > 4 && side.compare(side.size() - 4, 4, ".csv") == 0)
      side.resize(side.size() - 4);
    write_text(side + ".json", res.to_json().dump(2) + "\n");
  }
  return exit_ok;
}

int cmd_extract_features(const Options& o)
{
  SnpMatrix train = read_snp_matrix(o.input);
  SnpMatrix test;
  if (!o.test_input.empty())
    test = read_snp_matrix(o.test_input);
  Table pheno = read_csv(o.phenotype);
  Eigen::VectorXd y = pheno.data.col(pheno.column(o.response));
  if (y.size() != train.rows())
    throw InvalidInput("phenotype rows (" + std::to_string(y.size()) +
                       ") do not match SNP rows (" + std::to_string(train.rows()) + ")");
  PreprocessResult pre = preprocess(train, test, o.freq_threshold);
  log(LogLevel::info, "preprocess",
      { { "kept", pre.kept.size() }, { "dropped_duplicates", pre.dropped_duplicates },
        { "dropped_rare", pre.dropped_rare } });
  ScreenResult scr = screen(y, pre.train, o.p_cut, o.threads);
  log(LogLevel::info, "screen", { { "screened", scr.ordered.size() }, { "p_cut", o.p_cut } });
  FeatureSet fs = extract_features(scr, pre.train, o.grouping);
  Table out;
  out.header = { o.response };
  out.header.insert(out.header.end(), fs.names.begin(), fs.names.end());
  out.data.resize(y.size(), static_cast<Eigen::Index>(out.header.size()));
  out.data.col(0) = y;
  out.data.rightCols(fs.features.cols()) = fs.features;
  write_csv(out, o.output + "_features.csv");
  json manifest = fs.manifest(pre.train);
  manifest["n_screened"] = scr.ordered.size();
  manifest["freq_threshold"] = o.freq_threshold;
  manifest["p_cut"] = o.p_cut;
  if (o.bivariate) {
    json biv = json::array();
    for (const auto& b : bivariate_analysis(y, fs)) {
      biv.push_back({ { "feature", fs.names[b.feature] },
                      { "family", family_name(b.copula.family()) },
                      { "rotation", b.copula.rotation() },
                      { "tau", b.tau },
                      { "aic", b.aic },
                      { "irrelevant_candidate", b.irrelevant_candidate } });
    }
    manifest["bivariate"] = biv;
  }
  write_text(o.output + "_manifest.json", manifest.dump(2) + "\n");
  if (test.cols() > 0) {
    FeatureSet ft = extract_features(scr, pre.test, o.grouping);
    Table tt;
    tt.header = ft.names;
    tt.data = ft.features;
    write_csv(tt, o.output + "_test_features.csv");
  }
  log(LogLevel::info, "features_done", { { "features", fs.names.size() }, { "prefix", o.output } });
  return exit_ok;
}

int cmd_evaluate(const Options& o)
{
  Table pred = read_csv(o.input);
  Table truth = read_csv(o.truth);
  if (pred.data.rows() != truth.data.rows())
    throw InvalidInput("prediction rows (" + std::to_string(pred.data.rows()) +
                       ") do not match truth rows (" + std::to_string(truth.data.rows()) + ")");
  Eigen::VectorXd y = truth.data.col(truth.column(o.response));
  Table out;
  out.header = { "measure", "value" };
  std::vector<std::pair<std::string, double>> rows;
  for (std::size_t k = 0; k < pred.header.size(); ++k) {
    const std::string& h = pred.header[k];
    if (h.size() < 2 || h[0] != 'q')
      continue;
    double a = std::stod(h.substr(1));
    rows.emplace_back("pl_" + h.substr(1),
                      pinball(y, pred.data.col(static_cast<Eigen::Index>(k)), a));
  }
  if (!o.labels.empty()) {
    json lab = json::parse(read_text(o.labels));
    std::vector<std::string> chosen;
    if (!o.model.empty()) {
      DVine model = load_model(o.model);
      for (std::size_t k = 1; k < model.order().size(); ++k)
        chosen.push_back(model.variable_names().at(model.order()[k]));
    } else if (lab.contains("chosen")) {
      chosen = lab.at("chosen").get<std::vector<std::string>>();
    } else {
      throw InvalidInput("TPR/FDR need --model or a 'chosen' list in the labels file");
    }
    std::map<std::string, int> ids;
    auto id = [&](const std::string& s) {
      return ids.emplace(s, static_cast<int>(ids.size())).first->second;
    };
    auto ids_of = [&](const char* key) {
      std::vector<int> v;
      if (lab.contains(key))
        for (const auto& s : lab.at(key))
          v.push_back(id(s.get<std::string>()));
      return v;
    };
    std::vector<int> rel = ids_of("relevant"), irr = ids_of("irrelevant"), ch;
    for (const auto& s : chosen)
      ch.push_back(id(s));
    Rates r = tpr_fdr(ch, rel, irr);
    rows.emplace_back("tpr", r.tpr);
    rows.emplace_back("fdr", r.fdr);
  }
  std::string text = "measure,value\n";
  for (const auto& [m, v] : rows)
    text += m + "," + format_double(v) + "\n";
  if (o.output.empty())
    std::cout << text;
  else
    write_text(o.output, text);
  return exit_ok;
}

} // namespace

int run_cli(int argc, char** argv)
{
  CLI::App app{ "Sparse D-vine copula quantile regression" };
  app.require_subcommand(1);
  Options o;
  const std::vector<std::string> method_names{ "res", "parcor", "baseline" };

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* fit = app.add_subcommand("fit", "select variables and fit a D-vine regression");
  fit->add_option("--input", o.input, "training CSV")->required();
  fit->add_option("--output", o.output, "model JSON")->required();
  fit->add_option("--trace", o.trace, "trace JSON (default: <output>.trace.json)");
  fit->add_option("--response", o.response, "response column");
  fit->add_option("--method", o.method)->check(CLI::IsMember(method_names));
  fit->add_option("--criterion", o.criterion)->check(CLI::IsMember({ "aic", "bic" }));
  fit->add_option("--pseudo-quantile", o.pseudo_quantile)->check(CLI::Range(0.0, 1.0));
  fit->add_option("--dof-scope", o.dof_scope, "pair copulas counted in the cAIC penalty")
    ->check(CLI::IsMember({ "all", "response" }));
  fit->add_option("--max-iterations", o.max_iterations);
  common(fit);

  auto* predict = app.add_subcommand("predict", "conditional quantiles from a fitted model");
  predict->add_option("--model", o.model, "model JSON")->required();
  predict->add_option("--input", o.input, "data CSV")->required();
  predict->add_option("--output", o.output, "predictions CSV (default: stdout)");
  predict->add_option("--levels", o.levels)->delimiter(',');
  common(predict);

  auto* simulate = app.add_subcommand("simulate", "run the simulation benchmark");
  simulate->add_option("--dgp", o.dgp)->check(CLI::IsMember({ 1, 2 }));
  simulate->add_option("--case", o.case_id);
  simulate->add_option("--reps", o.reps)->check(CLI::PositiveNumber);
  simulate->add_option("--methods", o.methods)->delimiter(',')->check(CLI::IsMember(method_names));
  simulate->add_option("--method", o.methods)->check(CLI::IsMember(method_names));
  simulate->add_option("--criterion", o.criterion)->check(CLI::IsMember({ "aic", "bic" }));
  simulate->add_option("--levels", o.levels)->delimiter(',');
  simulate->add_option("--pseudo-quantile", o.pseudo_quantile)->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--dof-scope", o.dof_scope, "pair copulas counted in the cAIC penalty")
    ->check(CLI::IsMember({ "all", "response" }));
  simulate->add_option("--sigma", o.sigma);
  simulate->add_option("--output", o.output, "benchmark CSV; a .json sidecar is written next to it");
  simulate->add_option("--export", o.exportp, "write <prefix>_train.csv, _test.csv, _labels.json and exit");
  common(simulate);

  auto* extract = app.add_subcommand("extract-features", "SNP preprocessing, screening and grouping");
  extract->add_option("--input", o.input, "training SNP matrix (CSV or SVM1)")->required();
  extract->add_option("--test-input", o.test_input, "test SNP matrix");
  extract->add_option("--phenotype", o.phenotype, "CSV holding the response")->required();
  extract->add_option("--response", o.response, "response column");
  extract->add_option("--output", o.output, "output prefix")->required();
  extract->add_option("--grouping", o.grouping)->check(CLI::PositiveNumber);
  extract->add_option("--freq-threshold", o.freq_threshold)->check(CLI::Range(0.0, 1.0));
  extract->add_option("--p-cut", o.p_cut)->check(CLI::Range(0.0, 1.0));
  extract->add_flag("--bivariate", o.bivariate, "add two-node D-vine summaries to the manifest");
  common(extract);

  auto* evaluate = app.add_subcommand("evaluate", "pinball loss and TPR/FDR");
  evaluate->add_option("--input", o.input, "predictions CSV")->required();
  evaluate->add_option("--truth", o.truth, "CSV with the true response")->required();
  evaluate->add_option("--response", o.response, "response column");
  evaluate->add_option("--labels", o.labels, "JSON with relevant/irrelevant variable names");
  evaluate->add_option("--model", o.model, "model JSON providing the chosen variables");
  evaluate->add_option("--output", o.output, "metrics CSV (default: stdout)");
  common(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*fit)
      return cmd_fit(o);
    if (*predict)
      return cmd_predict(o);
    if (*simulate)
      return cmd_simulate(o);
    if (*extract)
      return cmd_extract_features(o);
    if (*evaluate)
      return cmd_evaluate(o);
  } catch (const NumericalError& e) {
    log(LogLevel::error, "numerical_failure", { { "message", e.what() }, { "exit_code", exit_numerical } });
    return exit_numerical;
  } catch (const InvalidInput& e) {
    log(LogLevel::error, "invalid_input", { { "message", e.what() }, { "exit_code", exit_usage } });
    return exit_usage;
  } catch (const nlohmann::json::exception& e) {
    log(LogLevel::error, "invalid_input", { { "message", e.what() }, { "exit_code", exit_usage } });
    return exit_usage;
  } catch (const std::exception& e) {
    log(LogLevel::error, "failure", { { "message", e.what() }, { "exit_code", exit_numerical } });
    return exit_numerical;
  }
  return exit_usage;
}

} // namespace sparsevine
