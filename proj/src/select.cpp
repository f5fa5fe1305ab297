#include "sparsevine/select.hpp"
#include "sparsevine/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace sparsevine {

Eigen::MatrixXd normal_scores(const Eigen::MatrixXd& data)
{
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd z(n, data.cols());
  std::vector<Eigen::Index> idx(n);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    auto col = data.col(j);
    if (n < 2 || (col.array() == col(0)).all())
      throw InvalidInput("normal scores: column " + std::to_string(j) + " is constant");
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return col(a) < col(b); });
    Eigen::Index k = 0;
    while (k < n) {
      Eigen::Index e = k;
      while (e + 1 < n && col(idx[e + 1]) == col(idx[k]))
        ++e;
      // ranks k+1 .. e+1 share their average
      double rank = 0.5 * static_cast<double>(k + e) + 1.0;
      double s = math::norm_quantile(rank / static_cast<double>(n + 1));
      for (Eigen::Index r = k; r <= e; ++r)
        z(idx[r], j) = s;
      k = e + 1;
    }
  }
  return z;
}

namespace {

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z)
{
  Eigen::MatrixXd c = z.rowwise() - z.colwise().mean();
  Eigen::VectorXd s = c.colwise().norm();
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    c.col(j) /= s(j);
  Eigen::MatrixXd r = c.transpose() * c;
  return r.cwiseMax(-1.0).cwiseMin(1.0);
}

double residual_correlation(const Eigen::MatrixXd& z,
                            int a,
                            int b,
                            const std::vector<int>& given)
{
  const Eigen::Index n = z.rows();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(given.size()) + 1);
  X.col(0).setOnes();
  for (std::size_t k = 0; k < given.size(); ++k)
    X.col(static_cast<Eigen::Index>(k) + 1) = z.col(given[k]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::VectorXd ra = z.col(a) - X * qr.solve(Eigen::VectorXd(z.col(a)));
  Eigen::VectorXd rb = z.col(b) - X * qr.solve(Eigen::VectorXd(z.col(b)));
  double na = ra.norm(), nb = rb.norm();
  double scale = std::sqrt(static_cast<double>(n));
  if (!(na > 1e-10 * scale) || !(nb > 1e-10 * scale))
    throw NumericalError("partial correlation: collinear variables");
  return std::min(1.0, std::max(-1.0, ra.dot(rb) / (na * nb)));
}

} // namespace

double partial_correlation(const Eigen::MatrixXd& z,
                           const Eigen::MatrixXd& corr,
                           int a,
                           int b,
                           const std::vector<int>& given)
{
  if (std::find(given.begin(), given.end(), a) != given.end() ||
      std::find(given.begin(), given.end(), b) != given.end())
    throw InvalidInput("partial correlation: a and b must not be in the conditioning set");
  if (static_cast<Eigen::Index>(given.size()) > z.rows() - 3)
    throw InvalidInput("partial correlation: conditioning set too large for the sample");
  if (given.empty())
    return corr(a, b);
  std::vector<int> vars{ a, b };
  vars.insert(vars.end(), given.begin(), given.end());
  const auto k = static_cast<Eigen::Index>(vars.size());
  Eigen::MatrixXd S(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      S(r, c) = corr(vars[r], vars[c]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    return residual_correlation(z, a, b, given);
  Eigen::MatrixXd P = S.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  double r = -P(0, 1) / std::sqrt(P(0, 0) * P(1, 1));
  return std::min(1.0, std::max(-1.0, r));
}

double partial_correlation(const Eigen::MatrixXd& z,
                           int a,
                           int b,
                           const std::vector<int>& given)
{
  std::vector<int> vars{ a, b };
  vars.insert(vars.end(), given.begin(), given.end());
  Eigen::MatrixXd sub(z.rows(), static_cast<Eigen::Index>(vars.size()));
  for (std::size_t k = 0; k < vars.size(); ++k)
    sub.col(static_cast<Eigen::Index>(k)) = z.col(vars[k]);
  std::vector<int> g(given.size());
  std::iota(g.begin(), g.end(), 2);
  return partial_correlation(sub, correlation_matrix(sub), 0, 1, g);
}

std::string method_name(Method m)
{
  switch (m) {
    case Method::res:
      return "res";
    case Method::parcor:
      return "parcor";
    case Method::baseline:
      return "baseline";
  }
  return "?";
}

Method method_from_name(const std::string& name)
{
  if (name == "res")
    return Method::res;
  if (name == "parcor")
    return Method::parcor;
  if (name == "baseline")
    return Method::baseline;
  throw InvalidInput("unknown method '" + name + "'");
}

std::string stop_reason_name(StopReason r)
{
  switch (r) {
    case StopReason::aic_worsened:
      return "aic-worsened";
    case StopReason::all_variables:
      return "all-variables";
    case StopReason::iteration_cap:
      return "iteration-cap";
  }
  return "?";
}

nlohmann::json SelectionTrace::to_json() const
{
  using nlohmann::json;
  json its = json::array();
  for (const auto& r : iterations) {
    json scores = json::array();
    for (const auto& [var, s] : r.scores)
      scores.push_back({ { "var", var }, { "score", s } });
    its.push_back({ { "iteration", r.iteration },
                    { "scores", scores },
                    { "chosen", r.chosen },
                    { "score", r.score },
                    { "caic", r.caic },
                    { "dof", r.dof },
                    { "fits", r.fits },
                    { "cumulative_fits", r.cumulative_fits },
                    { "accepted", r.accepted } });
  }
  return { { "method", method_name(method) },
           { "initial_caic", initial_caic },
           { "iterations", its },
           { "chosen", chosen },
           { "stop_reason", stop_reason_name(stop_reason) },
           { "total_fits", total_fits },
           { "setup_fits", setup_fits } };
}

std::string format_log_line(const IterationRecord& rec)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "iter %d chosen %d score %.6g caic %.6f fits %d%s",
                rec.iteration, rec.chosen, rec.score, rec.caic,
                rec.cumulative_fits, rec.accepted ? "" : " (rejected)");
  return buf;
}

double caic(const DVine& model, const Eigen::MatrixXd& data)
{
  Eigen::MatrixXd u = model.pit(data);
  const KdeMargin& my = model.margin(model.response());
  double lf = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    lf += my.log_pdf(data(i, model.response()));
  return -2.0 * (model.conditional_loglik(u) + lf) + 2.0 * model.dof();
}

namespace {

void check_data(const Eigen::MatrixXd& data)
{
  if (data.rows() < 30)
    throw InvalidInput("selection needs at least 30 observations");
  if (data.cols() < 2)
    throw InvalidInput("selection needs at least one explanatory variable");
  if (!data.allFinite())
    throw InvalidInput("data contains non-finite values");
}

struct Candidate
{
  double score = 0.0;
  int fits = 0;
  std::optional<std::pair<DVine, DVineFitCache>> trial;
};

class Selector
{
public:
  Selector(const Eigen::MatrixXd& data, SelectionConfig config, Method method)
    : data_(data)
    , cfg_(std::move(config))
    , method_(method)
    , n_(data.rows())
    , p_(static_cast<int>(data.cols()) - 1)
  {
    check_data(data);
    if (!(cfg_.pseudo_quantile > 0.0 && cfg_.pseudo_quantile < 1.0))
      throw InvalidInput("pseudo-response quantile must lie in (0, 1)");
    margins_.resize(p_ + 1);
    u_.resize(n_, p_ + 1);
    parallel_for(p_ + 1, cfg_.threads, [&](int j) {
      margins_[j] = KdeMargin(data.col(j));
      u_.col(j) = margins_[j].pit(data.col(j));
    });
    if (method_ == Method::parcor) {
      z_ = normal_scores(data);
      corr_ = correlation_matrix(z_);
    }
  }

  SelectionResult run()
  {
    SelectionTrace trace;
    trace.method = method_;
    DVine model(0);
    model.set_margin(0, margins_[0]);
    if (!cfg_.variable_names.empty())
      model.set_variable_names(cfg_.variable_names);
    DVineFitCache cache = model.build_cache(u_);
    log_fy_ = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i)
      log_fy_ += margins_[0].log_pdf(data_(i, 0));

    std::set<int> candidates;
    for (int d = 1; d <= p_; ++d)
      candidates.insert(d);
    std::vector<int> chosen;
    for (int v : cfg_.initial_order) {
      if (!candidates.count(v))
        throw InvalidInput("initial order variable " + std::to_string(v) + " is invalid");
      std::tie(model, cache) = extend_fit(model, cache, u_, v, cfg_.criterion, &trace.setup_fits);
      model.set_margin(v, margins_[v]);
      candidates.erase(v);
      chosen.push_back(v);
    }
    double current = caic_of(model, cache);
    trace.initial_caic = current;
    pseudo_ = u_.col(0);
    if (method_ == Method::res && !chosen.empty())
      update_pseudo_response(model);

    const int cap = cfg_.max_iterations.value_or(
      std::min<int>(p_, static_cast<int>(n_ / 10)));
    int iteration = 0;
    trace.stop_reason = StopReason::all_variables;
    while (!candidates.empty()) {
      if (iteration >= cap) {
        trace.stop_reason = StopReason::iteration_cap;
        break;
      }
      ++iteration;
      IterationRecord rec;
      rec.iteration = iteration;
      std::vector<int> cand(candidates.begin(), candidates.end());
      std::vector<Candidate> scored(cand.size());
      parallel_for(static_cast<int>(cand.size()), cfg_.threads, [&](int k) {
        scored[k] = score(model, cache, chosen, cand[k]);
      });
      std::size_t best = 0;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        rec.scores.emplace_back(cand[k], scored[k].score);
        rec.fits += scored[k].fits;
        if (scored[k].score > scored[best].score)
          best = k;
      }
      const int d = cand[best];
      rec.chosen = d;
      rec.score = scored[best].score;
      std::pair<DVine, DVineFitCache> next =
        scored[best].trial ? std::move(*scored[best].trial)
                           : extend_fit(model, cache, u_, d, cfg_.criterion, &rec.fits);
      next.first.set_margin(d, margins_[d]);
      rec.caic = caic_of(next.first, next.second);
      rec.dof = dof_of(next.first);
      trace.total_fits += rec.fits;
      rec.cumulative_fits = trace.total_fits;
      rec.accepted = !(cfg_.caic_stop && rec.caic >= current);
      trace.iterations.push_back(rec);
      if (cfg_.on_iteration)
        cfg_.on_iteration(rec);
      if (!rec.accepted) {
        trace.stop_reason = StopReason::aic_worsened;
        break;
      }
      model = std::move(next.first);
      cache = std::move(next.second);
      current = rec.caic;
      candidates.erase(d);
      chosen.push_back(d);
      if (method_ == Method::res && !candidates.empty())
        update_pseudo_response(model);
    }
    trace.chosen = chosen;
    return { std::move(model), std::move(trace) };
  }

private:
  double caic_of(const DVine& model, const DVineFitCache& cache) const
  {
    return -2.0 * (cache.cll + log_fy_) + 2.0 * dof_of(model);
  }

  int dof_of(const DVine& model) const
  {
    if (cfg_.dof_scope == DofScope::all)
      return model.dof();
    int dof = 0;
    for (int t = 0; t + 1 < model.size(); ++t)
      dof += model.pair_copula(t, 0).n_parameters();
    return dof;
  }

  Candidate score(const DVine& model,
                  const DVineFitCache& cache,
                  const std::vector<int>& chosen,
                  int d) const
  {
    Candidate c;
    switch (method_) {
      case Method::res: {
        PairData pair(n_, 2);
        pair.col(0) = pseudo_;
        pair.col(1) = u_.col(d);
        c.score = select_family(pair, cfg_.criterion).loglik();
        c.fits = 1;
        break;
      }
      case Method::parcor:
        try {
          c.score = std::fabs(partial_correlation(z_, corr_, 0, d, chosen));
        } catch (const NumericalError&) {
          c.score = 0.0;
        }
        break;
      case Method::baseline:
        c.trial = extend_fit(model, cache, u_, d, cfg_.criterion, &c.fits);
        c.score = c.trial->second.cll;
        break;
    }
    return c;
  }

  // y~ = y - F_Y^{-1}(C^{-1}(q | u)), then its own kernel margin
  void update_pseudo_response(const DVine& model)
  {
    Eigen::VectorXd resid(n_);
    parallel_for(static_cast<int>(n_), cfg_.threads, [&](int i) {
      double w = model.conditional_quantile_u(Eigen::VectorXd(u_.row(i).transpose()), cfg_.pseudo_quantile);
      resid(i) = data_(i, 0) - margins_[0].quantile(math::clamp_unit(w));
    });
    KdeMargin m(resid);
    pseudo_ = m.pit(resid);
  }

  const Eigen::MatrixXd& data_;
  SelectionConfig cfg_;
  Method method_;
  Eigen::Index n_;
  int p_;
  std::vector<KdeMargin> margins_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd corr_;
  Eigen::VectorXd pseudo_;
  double log_fy_ = 0.0;
};

} // namespace

SelectionResult vinereg_res(const Eigen::MatrixXd& data, SelectionConfig config)
{
  return Selector(data, std::move(config), Method::res).run();
}

SelectionResult vinereg_parcor(const Eigen::MatrixXd& data, SelectionConfig config)
{
  return Selector(data, std::move(config), Method::parcor).run();
}

SelectionResult vinereg_baseline(const Eigen::MatrixXd& data, SelectionConfig config)
{
  return Selector(data, std::move(config), Method::baseline).run();
}

SelectionResult vinereg(const Eigen::MatrixXd& data, const SelectionConfig& config)
{
  return Selector(data, config, config.method).run();
}

} // namespace sparsevine
