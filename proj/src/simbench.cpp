#include "sparsevine/simbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace sparsevine {

int dgp_case_p(Dgp dgp, int case_id)
{
  static const int dgp1_p[] = { 10, 20, 50 };
  static const int dgp2_p[] = { 20, 40, 100, 1000 };
  if (dgp == Dgp::dgp1 && case_id >= 1 && case_id <= 3)
    return dgp1_p[case_id - 1];
  if (dgp == Dgp::dgp2 && case_id >= 1 && case_id <= 4)
    return dgp2_p[case_id - 1];
  throw InvalidInput("invalid DGP case " + std::to_string(case_id));
}

DGPConfig dgp_case(Dgp dgp, int case_id)
{
  DGPConfig cfg;
  cfg.dgp = dgp;
  cfg.p = dgp_case_p(dgp, case_id);
  return cfg;
}

Eigen::MatrixXd toeplitz_cholesky(int p, double rho)
{
  Eigen::MatrixXd S(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      S(a, b) = std::pow(rho, std::abs(a - b));
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Toeplitz matrix is not positive definite");
  return llt.matrixL();
}

namespace {

void check_cfg(const DGPConfig& cfg, int min_p)
{
  if (cfg.p < min_p)
    throw InvalidInput("this DGP needs p >= " + std::to_string(min_p));
  if (cfg.n < 2 || cfg.n_train < 1 || cfg.n_train > cfg.n)
    throw InvalidInput("invalid sample size or train/test split");
  if (!(cfg.sigma >= 0.0))
    throw InvalidInput("sigma must be nonnegative");
  if (!(std::fabs(cfg.rho) < 1.0))
    throw InvalidInput("rho must lie in (-1, 1)");
}

DGPSample split(const Eigen::MatrixXd& all, int n_train)
{
  DGPSample s;
  s.train = all.topRows(n_train);
  s.test = all.bottomRows(all.rows() - n_train);
  return s;
}

std::vector<int> range(int a, int b)
{
  std::vector<int> out;
  for (int k = a; k <= b; ++k)
    out.push_back(k);
  return out;
}

} // namespace

DGPSample gen_dgp1(const DGPConfig& cfg)
{
  check_cfg(cfg, 5);
  const Eigen::MatrixXd L = toeplitz_cholesky(5, cfg.rho);
  math::Rng rng(cfg.seed);
  Eigen::MatrixXd all(cfg.n, cfg.p + 1);
  Eigen::VectorXd z(5);
  for (int i = 0; i < cfg.n; ++i) {
    for (int k = 0; k < 5; ++k)
      z(k) = rng.normal();
    Eigen::VectorXd x = L * z;
    for (int k = 0; k < 5; ++k)
      all(i, k + 1) = x(k);
    for (int k = 6; k <= cfg.p; ++k)
      all(i, k) = rng.normal();
    double eps = rng.normal();
    all(i, 0) = x(0) * x(1) * x(1) * std::sqrt(std::fabs(x(2)) + 0.1) +
                std::exp(0.4 * x(3) * x(4)) + cfg.sigma * eps;
  }
  DGPSample s = split(all, cfg.n_train);
  s.relevant = range(1, 5);
  s.irrelevant = range(6, cfg.p);
  return s;
}

DGPSample gen_dgp2(const DGPConfig& cfg, const Eigen::MatrixXd* chol)
{
  check_cfg(cfg, 10);
  Eigen::MatrixXd own;
  if (!chol || chol->rows() != cfg.p) {
    own = toeplitz_cholesky(cfg.p, cfg.rho);
    chol = &own;
  }
  math::Rng rng(cfg.seed);
  Eigen::MatrixXd Z(cfg.n, cfg.p);
  Eigen::VectorXd eps(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    for (int k = 0; k < cfg.p; ++k)
      Z(i, k) = rng.normal();
    eps(i) = rng.normal();
  }
  Eigen::MatrixXd X = Z * chol->transpose();
  Eigen::MatrixXd all(cfg.n, cfg.p + 1);
  all.rightCols(cfg.p) = X;
  for (int i = 0; i < cfg.n; ++i) {
    auto x = [&](int j) { return X(i, j - 1); };
    all(i, 0) = std::sqrt(std::fabs(5.0 * x(1) - 2.0 * x(9) + 0.5)) +
                x(8) * (-4.0 * x(3) + 1.0) + std::exp(x(6)) +
                (2.0 * std::pow(x(10), 3) + std::pow(x(4), 3)) +
                (x(7) + 1.0) * std::log(std::fabs(x(2) + x(5)) + 0.01) +
                cfg.sigma * eps(i);
  }
  DGPSample s = split(all, cfg.n_train);
  s.relevant = range(1, 10);
  s.redundant = range(11, cfg.p);
  return s;
}

DGPSample gen_dgp(const DGPConfig& cfg, const Eigen::MatrixXd* chol)
{
  return cfg.dgp == Dgp::dgp1 ? gen_dgp1(cfg) : gen_dgp2(cfg, chol);
}

Rates tpr_fdr(const std::vector<int>& chosen,
              const std::vector<int>& relevant,
              const std::vector<int>& irrelevant)
{
  std::set<int> c(chosen.begin(), chosen.end());
  Rates r;
  if (!relevant.empty()) {
    int hit = 0;
    for (int v : relevant)
      hit += c.count(v) ? 1 : 0;
    r.tpr = static_cast<double>(hit) / static_cast<double>(relevant.size());
  }
  if (!c.empty()) {
    int bad = 0;
    for (int v : irrelevant)
      bad += c.count(v) ? 1 : 0;
    r.fdr = static_cast<double>(bad) / static_cast<double>(c.size());
  }
  return r;
}

double pinball(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha)
{
  if (y.size() != yhat.size())
    throw InvalidInput("pinball: length mismatch");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidInput("pinball: alpha must lie in (0, 1)");
  if (y.size() == 0)
    return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    s += (yhat(i) - y(i)) * ((y(i) <= yhat(i) ? 1.0 : 0.0) - alpha);
  return s / static_cast<double>(y.size());
}

Aggregate aggregate(const std::vector<double>& values)
{
  Aggregate a;
  if (values.empty())
    return { std::nan(""), std::nan("") };
  const double n = static_cast<double>(values.size());
  for (double v : values)
    a.mean += v;
  a.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - a.mean) * (v - a.mean);
    a.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

MetricsReport evaluate_method(const DGPSample& sample,
                              Method method,
                              const BenchmarkOptions& opts)
{
  MetricsReport rep;
  auto t0 = std::chrono::steady_clock::now();
  try {
    SelectionConfig sc;
    sc.method = method;
    sc.criterion = opts.criterion;
    sc.pseudo_quantile = opts.pseudo_quantile;
    sc.dof_scope = opts.dof_scope;
    sc.threads = opts.threads;
    auto fit = vinereg(sample.train, sc);
    Eigen::MatrixXd pred = fit.model.conditional_quantile(sample.test, opts.levels, opts.threads);
    rep.chosen = fit.trace.chosen;
    rep.chosen_count = static_cast<int>(rep.chosen.size());
    auto rates = tpr_fdr(rep.chosen, sample.relevant, sample.irrelevant);
    rep.tpr = rates.tpr;
    rep.fdr = rates.fdr;
    rep.fits = fit.trace.total_fits;
    Eigen::VectorXd y = sample.test.col(0);
    for (std::size_t a = 0; a < opts.levels.size(); ++a)
      rep.pinball[opts.levels[a]] = pinball(y, pred.col(static_cast<Eigen::Index>(a)), opts.levels[a]);
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
      for (Eigen::Index a = 1; a < pred.cols(); ++a)
        if (pred(i, a) < pred(i, a - 1)) {
          ++rep.crossing_rows;
          break;
        }
  } catch (const std::exception& e) {
    rep.failed = true;
    rep.error = e.what();
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

std::string level_key(double alpha)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pl_%.2f", alpha);
  return buf;
}

std::string dgp_name(Dgp d)
{
  return d == Dgp::dgp1 ? "1" : "2";
}

} // namespace

BenchmarkResult run_benchmark(const DGPConfig& cfg, const BenchmarkOptions& opts)
{
  if (opts.replications < 1)
    throw InvalidInput("replications must be at least 1");
  if (opts.methods.empty())
    throw InvalidInput("no methods to benchmark");
  BenchmarkResult out;
  out.config = cfg;
  out.case_id = opts.case_id;
  out.replications = opts.replications;
  Eigen::MatrixXd chol;
  if (cfg.dgp == Dgp::dgp2)
    chol = toeplitz_cholesky(cfg.p, cfg.rho);
  for (Method m : opts.methods) {
    MethodSummary ms;
    ms.method = m;
    out.methods.push_back(ms);
  }
  for (int r = 0; r < opts.replications; ++r) {
    DGPConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    DGPSample s = gen_dgp(c, cfg.dgp == Dgp::dgp2 ? &chol : nullptr);
    for (auto& ms : out.methods) {
      MetricsReport rep = evaluate_method(s, ms.method, opts);
      if (opts.on_replication)
        opts.on_replication(r, ms.method, rep);
      ms.replications.push_back(std::move(rep));
    }
  }
  for (auto& ms : out.methods) {
    std::map<std::string, std::vector<double>> vals;
    for (const auto& rep : ms.replications) {
      if (rep.failed) {
        ++ms.failures;
        continue;
      }
      vals["tpr"].push_back(rep.tpr);
      vals["fdr"].push_back(rep.fdr);
      vals["chosen"].push_back(rep.chosen_count);
      for (const auto& [a, v] : rep.pinball)
        vals[level_key(a)].push_back(v);
      vals["time"].push_back(rep.wall_time);
    }
    for (const auto& [k, v] : vals)
      ms.measures[k] = aggregate(v);
  }
  return out;
}

std::string BenchmarkResult::to_csv() const
{
  std::ostringstream os;
  os.precision(10);
  os << "method,dgp,case,measure,mean,se\n";
  for (const auto& ms : methods) {
    for (const auto& [k, a] : ms.measures)
      os << method_name(ms.method) << "," << dgp_name(config.dgp) << "," << case_id
         << "," << k << "," << a.mean << "," << a.se << "\n";
    os << method_name(ms.method) << "," << dgp_name(config.dgp) << "," << case_id
       << ",failures," << ms.failures << ",0\n";
  }
  return os.str();
}

nlohmann::json BenchmarkResult::to_json() const
{
  using nlohmann::json;
  json j;
  j["dgp"] = config.dgp == Dgp::dgp1 ? 1 : 2;
  j["case"] = case_id;
  j["p"] = config.p;
  j["n"] = config.n;
  j["n_train"] = config.n_train;
  j["sigma"] = config.sigma;
  j["rho"] = config.rho;
  j["seed"] = config.seed;
  j["replications"] = replications;
  json ms = json::array();
  for (const auto& m : methods) {
    json reps = json::array();
    for (std::size_t r = 0; r < m.replications.size(); ++r) {
      const auto& rep = m.replications[r];
      json pl = json::object();
      for (const auto& [a, v] : rep.pinball)
        pl[level_key(a)] = v;
      reps.push_back({ { "replication", r },
                       { "seed", config.seed + r },
                       { "failed", rep.failed },
                       { "error", rep.error },
                       { "tpr", rep.tpr },
                       { "fdr", rep.fdr },
                       { "chosen", rep.chosen },
                       { "chosen_count", rep.chosen_count },
                       { "pinball", pl },
                       { "fits", rep.fits },
                       { "crossing_rows", rep.crossing_rows },
                       { "wall_time", rep.wall_time } });
    }
    json agg = json::object();
    for (const auto& [k, a] : m.measures)
      agg[k] = { { "mean", a.mean }, { "se", a.se } };
    ms.push_back({ { "method", method_name(m.method) },
                   { "failures", m.failures },
                   { "measures", agg },
                   { "replications", reps } });
  }
  j["methods"] = ms;
  return j;
}

std::string BenchmarkResult::summary() const
{
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "DGP%s case %d (p=%d, n=%d, %d reps)\n",
                dgp_name(config.dgp).c_str(), case_id, config.p, config.n, replications);
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-10s %-16s %-16s %-16s %-16s %-16s %-16s\n",
                "method", "TPR", "FDR", "chosen", "PL0.05", "PL0.50", "PL0.95");
  os << buf;
  for (const auto& m : methods) {
    auto cell = [&](const std::string& k) {
      auto it = m.measures.find(k);
      if (it == m.measures.end())
        return std::string("-");
      char c[64];
      std::snprintf(c, sizeof(c), "%.2f (%.2f)", it->second.mean, it->second.se);
      return std::string(c);
    };
    std::snprintf(buf, sizeof(buf), "%-10s %-16s %-16s %-16s %-16s %-16s %-16s\n",
                  method_name(m.method).c_str(), cell("tpr").c_str(), cell("fdr").c_str(),
                  cell("chosen").c_str(), cell("pl_0.05").c_str(), cell("pl_0.50").c_str(),
                  cell("pl_0.95").c_str());
    os << buf;
    if (m.failures > 0)
      os << "  " << m.failures << " failed replication(s)\n";
  }
  return os.str();
}

} // namespace sparsevine
