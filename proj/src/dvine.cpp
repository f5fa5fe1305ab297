#include "sparsevine/dvine.hpp"
#include "sparsevine/parallel.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace sparsevine {

namespace {

PairData make_pairs(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  PairData d(a.size(), 2);
  d.col(0) = a;
  d.col(1) = b;
  return d;
}

} // namespace

DVine::DVine(int response)
  : order_{ response }
{
  check();
}

DVine::DVine(std::vector<int> order,
             std::vector<std::vector<Bicop>> pair_copulas,
             std::map<int, KdeMargin> margins,
             std::optional<int> truncation)
  : order_(std::move(order))
  , pcs_(std::move(pair_copulas))
  , margins_(std::move(margins))
  , truncation_(truncation)
{
  check();
}

void DVine::check() const
{
  if (order_.empty())
    throw InvalidInput("D-vine order must contain the response");
  std::set<int> seen;
  for (int v : order_) {
    if (v < 0)
      throw InvalidInput("variable ids must be nonnegative");
    if (!seen.insert(v).second)
      throw InvalidInput("duplicate variable " + std::to_string(v) + " in D-vine order");
  }
  const int m = size();
  if (static_cast<int>(pcs_.size()) != m - 1)
    throw InvalidInput("D-vine with " + std::to_string(m) + " variables needs " +
                       std::to_string(m - 1) + " trees");
  for (int t = 0; t < m - 1; ++t) {
    if (static_cast<int>(pcs_[t].size()) != m - 1 - t)
      throw InvalidInput("tree " + std::to_string(t + 1) + " must hold " +
                         std::to_string(m - 1 - t) + " pair copulas");
    if (truncation_ && t >= *truncation_)
      for (const auto& pc : pcs_[t])
        if (pc.family() != BicopFamily::indep)
          throw InvalidInput("pair copulas above the truncation level must be independence");
  }
  if (truncation_ && *truncation_ < 0)
    throw InvalidInput("truncation level must be nonnegative");
}

int DVine::max_variable() const
{
  return *std::max_element(order_.begin(), order_.end());
}

const Bicop& DVine::pair_copula(int tree, int edge) const
{
  return pcs_.at(tree).at(edge);
}

DVine DVine::truncated(int t) const
{
  if (t < 0)
    throw InvalidInput("truncation level must be nonnegative");
  DVine out = *this;
  for (int k = t; k < static_cast<int>(out.pcs_.size()); ++k)
    for (auto& pc : out.pcs_[k])
      pc = Bicop();
  out.truncation_ = t;
  return out;
}

const KdeMargin& DVine::margin(int var) const
{
  auto it = margins_.find(var);
  if (it == margins_.end())
    throw InvalidInput("no margin stored for variable " + std::to_string(var));
  return it->second;
}

void DVine::set_margin(int var, KdeMargin m)
{
  margins_[var] = std::move(m);
}

void DVine::set_variable_names(std::vector<std::string> names)
{
  names_ = std::move(names);
}

int DVine::dof() const
{
  int k = 0;
  for (const auto& tree : pcs_)
    for (const auto& pc : tree)
      k += pc.n_parameters();
  return k;
}

DVineFitCache DVine::build_cache(const Eigen::MatrixXd& u) const
{
  const int m = size();
  if (max_variable() >= u.cols())
    throw InvalidInput("data has fewer columns than the model's variables");
  DVineFitCache c;
  c.right.resize(m);
  c.left.resize(m);
  for (int i = 0; i < m; ++i) {
    c.right[i].push_back(u.col(order_[i]));
    c.left[i].push_back(u.col(order_[i]));
  }
  for (int t = 1; t < m; ++t) {
    for (int e = 0; e + t < m; ++e) {
      const Bicop& pc = pcs_[t - 1][e];
      const Eigen::VectorXd& a = c.right[e][t - 1];
      const Eigen::VectorXd& b = c.left[e + t][t - 1];
      if (e == 0)
        c.cll += pc.loglik(make_pairs(a, b));
      Eigen::VectorXd r = pc.hfunc(Conditioning::second, a, b);
      Eigen::VectorXd l = pc.hfunc(Conditioning::first, b, a);
      c.right[e].push_back(std::move(r));
      c.left[e + t].push_back(std::move(l));
    }
  }
  return c;
}

double DVine::conditional_loglik(const Eigen::MatrixXd& u) const
{
  return build_cache(u).cll;
}

std::vector<double> DVine::explanatory_conditionals(const Eigen::VectorXd& u_row) const
{
  const int m = size();
  std::vector<double> out(m, 0.5);
  if (m < 2)
    return out;
  // R[i][t] = F(x_i | x_{i+1..i+t}), L[j][t] = F(x_j | x_{j-t..j-1}); positions >= 1
  std::vector<std::vector<double>> R(m), L(m);
  for (int i = 1; i < m; ++i) {
    double v = math::clamp_unit(u_row(order_[i]));
    R[i].push_back(v);
    L[i].push_back(v);
  }
  for (int t = 1; t < m - 1; ++t) {
    for (int i = 1; i + t < m; ++i) {
      const Bicop& pc = pcs_[t - 1][i];
      double a = R[i][t - 1];
      double b = L[i + t][t - 1];
      if (pc.family() == BicopFamily::indep) {
        R[i].push_back(a);
        L[i + t].push_back(b);
      } else {
        R[i].push_back(pc.hfunc(Conditioning::second, a, b));
        L[i + t].push_back(pc.hfunc(Conditioning::first, b, a));
      }
    }
  }
  for (int k = 1; k < m; ++k)
    out[k] = L[k][k - 1];
  return out;
}

double DVine::conditional_quantile_u(const Eigen::VectorXd& u_row, double alpha) const
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidInput("quantile level must lie in (0, 1)");
  double w = math::clamp_unit(alpha);
  const int m = size();
  if (m < 2)
    return w;
  auto cond = explanatory_conditionals(u_row);
  for (int k = m - 1; k >= 1; --k)
    w = pcs_[k - 1][0].hinv(Conditioning::second, w, cond[k]);
  return w;
}

Eigen::VectorXd DVine::conditional_quantile_u(const Eigen::MatrixXd& u, double alpha) const
{
  Eigen::VectorXd out(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    out(i) = conditional_quantile_u(Eigen::VectorXd(u.row(i).transpose()), alpha);
  return out;
}

double DVine::conditional_cdf_u(const Eigen::VectorXd& u_row) const
{
  double w = math::clamp_unit(u_row(response()));
  const int m = size();
  if (m < 2)
    return w;
  auto cond = explanatory_conditionals(u_row);
  for (int k = 1; k < m; ++k)
    w = pcs_[k - 1][0].hfunc(Conditioning::second, w, cond[k]);
  return w;
}

namespace {

Eigen::VectorXd pit_row(const DVine& model, const Eigen::VectorXd& x_row, bool with_response)
{
  if (model.max_variable() >= x_row.size())
    throw InvalidInput("row has fewer entries than the model's variables");
  Eigen::VectorXd u = Eigen::VectorXd::Constant(x_row.size(), 0.5);
  const auto& order = model.order();
  for (std::size_t k = with_response ? 0 : 1; k < order.size(); ++k)
    u(order[k]) = model.margin(order[k]).pit(x_row(order[k]));
  return u;
}

} // namespace

double DVine::conditional_quantile(const Eigen::VectorXd& x_row, double alpha) const
{
  double w = conditional_quantile_u(pit_row(*this, x_row, false), alpha);
  return margin(response()).quantile(math::clamp_unit(w));
}

Eigen::MatrixXd DVine::conditional_quantile(const Eigen::MatrixXd& x,
                                            const std::vector<double>& alphas,
                                            int threads) const
{
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(alphas.size()));
  parallel_for(static_cast<int>(x.rows()), threads, [&](int i) {
    Eigen::VectorXd u = pit_row(*this, x.row(i).transpose(), false);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      double w = conditional_quantile_u(u, alphas[a]);
      out(i, static_cast<Eigen::Index>(a)) =
        margin(response()).quantile(math::clamp_unit(w));
    }
  });
  return out;
}

double DVine::conditional_cdf(const Eigen::VectorXd& x_row) const
{
  return conditional_cdf_u(pit_row(*this, x_row, true));
}

Eigen::MatrixXd DVine::pit(const Eigen::MatrixXd& x) const
{
  if (max_variable() >= x.cols())
    throw InvalidInput("data has fewer columns than the model's variables");
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(x.rows(), x.cols(), 0.5);
  for (int v : order_)
    u.col(v) = margin(v).pit(x.col(v));
  return u;
}

nlohmann::json DVine::to_json() const
{
  using nlohmann::json;
  json j;
  j["schema"] = 1;
  j["order"] = order_;
  j["truncation"] = truncation_ ? json(*truncation_) : json(nullptr);
  if (!names_.empty())
    j["variables"] = names_;
  json trees = json::array();
  for (const auto& tree : pcs_) {
    json jt = json::array();
    for (const auto& pc : tree) {
      std::vector<double> par(pc.parameters().data(),
                              pc.parameters().data() + pc.parameters().size());
      jt.push_back({ { "family", family_name(pc.family()) },
                     { "rotation", pc.rotation() },
                     { "params", par },
                     { "loglik", pc.loglik() },
                     { "n_obs", pc.n_obs() } });
    }
    trees.push_back(jt);
  }
  j["pair_copulas"] = trees;
  json margins = json::array();
  for (const auto& [var, m] : margins_) {
    std::vector<double> s(m.sample().data(), m.sample().data() + m.sample().size());
    margins.push_back({ { "var", var }, { "sample", s }, { "bandwidth", m.bandwidth() } });
  }
  j["margins"] = margins;
  return j;
}

DVine DVine::from_json(const nlohmann::json& j)
{
  try {
    if (j.contains("schema") && j.at("schema").get<int>() != 1)
      throw InvalidInput("unsupported model schema version");
    auto order = j.at("order").get<std::vector<int>>();
    std::vector<std::vector<Bicop>> pcs;
    for (const auto& jt : j.at("pair_copulas")) {
      std::vector<Bicop> tree;
      for (const auto& jp : jt) {
        auto par = jp.at("params").get<std::vector<double>>();
        Bicop pc(family_from_name(jp.at("family").get<std::string>()),
                 jp.at("rotation").get<int>(),
                 Eigen::Map<Eigen::VectorXd>(par.data(), static_cast<Eigen::Index>(par.size())));
        if (jp.contains("loglik"))
          pc.set_fit_stats(jp.at("loglik").get<double>(), jp.value("n_obs", 0));
        tree.push_back(pc);
      }
      pcs.push_back(std::move(tree));
    }
    std::map<int, KdeMargin> margins;
    for (const auto& jm : j.at("margins")) {
      auto s = jm.at("sample").get<std::vector<double>>();
      margins.emplace(jm.at("var").get<int>(),
                      KdeMargin(Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())),
                                jm.at("bandwidth").get<double>()));
    }
    std::optional<int> trunc;
    if (j.contains("truncation") && !j.at("truncation").is_null())
      trunc = j.at("truncation").get<int>();
    DVine out(std::move(order), std::move(pcs), std::move(margins), trunc);
    if (j.contains("variables"))
      out.set_variable_names(j.at("variables").get<std::vector<std::string>>());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed model JSON: ") + e.what());
  }
}

std::string DVine::str() const
{
  std::ostringstream os;
  os << "D-vine order (";
  for (std::size_t k = 0; k < order_.size(); ++k)
    os << (k ? "," : "") << order_[k];
  os << ")";
  for (std::size_t t = 0; t < pcs_.size(); ++t) {
    os << "\n  tree " << t + 1 << ":";
    for (std::size_t e = 0; e < pcs_[t].size(); ++e)
      os << " " << pcs_[t][e].str();
  }
  return os.str();
}

std::pair<DVine, DVineFitCache> extend_fit(const DVine& model,
                                           const DVineFitCache& cache,
                                           const Eigen::MatrixXd& u,
                                           int new_var,
                                           Criterion crit,
                                           int* fits)
{
  const auto& order = model.order();
  if (std::find(order.begin(), order.end(), new_var) != order.end())
    throw InvalidInput("variable " + std::to_string(new_var) + " is already in the D-vine");
  if (new_var < 0 || new_var >= u.cols())
    throw InvalidInput("variable " + std::to_string(new_var) + " is not a data column");
  const int m = model.size();
  if (static_cast<int>(cache.right.size()) != m)
    throw InvalidInput("fit cache does not match the model");

  DVineFitCache c = cache;
  auto new_order = order;
  new_order.push_back(new_var);
  auto pcs = model.pair_copulas();
  pcs.emplace_back();
  c.right.emplace_back();
  c.left.emplace_back();
  c.right[m].push_back(u.col(new_var));
  c.left[m].push_back(u.col(new_var));
  auto trunc = model.truncation();
  for (int k = 1; k <= m; ++k) {
    const int i = m - k;
    const Eigen::VectorXd& a = c.right[i][k - 1];
    const Eigen::VectorXd& b = c.left[m][k - 1];
    Bicop pc;
    if (trunc && k > *trunc) {
      pc.set_fit_stats(0.0, static_cast<int>(a.size()));
    } else {
      pc = select_family(make_pairs(a, b), crit);
      if (fits)
        ++*fits;
    }
    if (i == 0)
      c.cll += pc.loglik();
    Eigen::VectorXd r = pc.hfunc(Conditioning::second, a, b);
    Eigen::VectorXd l = pc.hfunc(Conditioning::first, b, a);
    c.right[i].push_back(std::move(r));
    c.left[m].push_back(std::move(l));
    pcs[k - 1].push_back(std::move(pc));
  }
  DVine out(std::move(new_order), std::move(pcs), model.margins(), trunc);
  out.set_variable_names(model.variable_names());
  return { std::move(out), std::move(c) };
}

DVine extend_fit(const DVine& model,
                 const Eigen::MatrixXd& u,
                 int new_var,
                 Criterion crit,
                 int* fits)
{
  return extend_fit(model, model.build_cache(u), u, new_var, crit, fits).first;
}

} // namespace sparsevine
