#include "sparsevine/bicop.hpp"

#include "families.hpp"

#include <algorithm>
#include <limits>

namespace sparsevine {

namespace {

constexpr int max_evaluations = 500;
constexpr double rel_tolerance = 1e-8;
constexpr double log_floor = -690.0; // log(1e-300)

void check_pairs(const PairData& data)
{
  if (data.rows() < 10)
    throw InvalidInput("copula fitting needs at least 10 observations");
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (int j = 0; j < 2; ++j)
      if (!(data(i, j) >= 0.0 && data(i, j) <= 1.0))
        throw InvalidInput("pseudo-observations must lie in [0, 1]");
  for (int j = 0; j < 2; ++j) {
    auto col = data.col(j);
    if ((col.array() == col(0)).all())
      throw NumericalError("copula fit failed: a margin has only tied values");
  }
}

// Data moved onto the unrotated copula's scale.
PairData unrotate(const PairData& data, int rotation)
{
  PairData out(data.rows(), 2);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double u = math::clamp_unit(data(i, 0));
    double v = math::clamp_unit(data(i, 1));
    switch (rotation) {
      case 90:
        u = 1.0 - u;
        break;
      case 180:
        u = 1.0 - u;
        v = 1.0 - v;
        break;
      case 270:
        v = 1.0 - v;
        break;
      default:
        break;
    }
    out(i, 0) = u;
    out(i, 1) = v;
  }
  return out;
}

double base_loglik(BicopFamily family, const Eigen::VectorXd& par, const PairData& d)
{
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double l = detail::base_log_pdf(family, par, d(i, 0), d(i, 1));
    ll += std::isnan(l) ? log_floor : std::max(l, log_floor);
  }
  return ll;
}

double invert_tau_numeric(BicopFamily family, double tau, double lo, double hi)
{
  Eigen::VectorXd par(1);
  auto g = [&](double th) {
    par(0) = th;
    return detail::base_tau(family, par) - tau;
  };
  if (g(lo) >= 0.0)
    return lo;
  if (g(hi) <= 0.0)
    return hi;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

//! Starting value by inverting Kendall's tau (one-parameter families).
double tau_start(BicopFamily family, double tau, double lo, double hi)
{
  double t = std::min(std::max(tau, -0.98), 0.98);
  double th;
  switch (family) {
    case BicopFamily::gaussian:
    case BicopFamily::student:
      th = std::sin(M_PI * t / 2.0);
      break;
    case BicopFamily::clayton:
      th = 2.0 * t / (1.0 - t);
      break;
    case BicopFamily::gumbel:
      th = 1.0 / (1.0 - t);
      break;
    case BicopFamily::frank:
      th = std::fabs(t) < 1e-6 ? 9.0 * t : invert_tau_numeric(family, t, lo, hi);
      break;
    case BicopFamily::joe:
      th = invert_tau_numeric(family, t, lo, hi);
      break;
    default:
      th = 0.5 * (lo + hi);
  }
  return std::min(std::max(th, lo), hi);
}

Bicop finish(BicopFamily family, int rotation, Eigen::VectorXd par,
             const PairData& data)
{
  Bicop cop(family, rotation, std::move(par));
  cop.set_fit_stats(cop.loglik(data), static_cast<int>(data.rows()));
  return cop;
}

Bicop fit_gaussian(const PairData& d, int rotation, const PairData& data)
{
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double x = math::norm_quantile(d(i, 0));
    double y = math::norm_quantile(d(i, 1));
    sxx += x * x + y * y;
    sxy += x * y;
  }
  const double n = static_cast<double>(d.rows());
  auto negll = [&](double rho) {
    double r2 = 1.0 - rho * rho;
    return -(-0.5 * n * std::log(r2) - (rho * rho * sxx - 2.0 * rho * sxy) / (2.0 * r2));
  };
  auto b = parameter_bounds(BicopFamily::gaussian);
  auto res = math::minimize_bounded(negll, b.lower(0), b.upper(0),
                                    max_evaluations, rel_tolerance);
  Eigen::VectorXd par(1);
  par << res.x;
  return finish(BicopFamily::gaussian, rotation, par, data);
}

Bicop fit_one_par(BicopFamily family, int rotation, double tau_base,
                  const PairData& d, const PairData& data)
{
  auto b = parameter_bounds(family);
  double lo = b.lower(0), hi = b.upper(0);
  Eigen::VectorXd par(1);
  auto fix = [&](double th) {
    if (family == BicopFamily::frank && std::fabs(th) < 1e-6)
      return th < 0.0 ? -1e-6 : 1e-6;
    return th;
  };
  auto negll = [&](double th) {
    par(0) = fix(th);
    return -base_loglik(family, par, d);
  };
  double start = tau_start(family, tau_base, lo, hi);
  double f_start = negll(start);
  auto res = math::minimize_bounded(negll, lo, hi, max_evaluations - 1, rel_tolerance);
  par(0) = fix(res.f <= f_start ? res.x : start);
  return finish(family, rotation, par, data);
}

// Profile likelihood: quantiles are computed once per nu, rho is then a 1-D search.
Bicop fit_student(const PairData& d, int rotation, const PairData& data)
{
  auto b = parameter_bounds(BicopFamily::student);
  const Eigen::Index n = d.rows();
  Eigen::VectorXd x(n), y(n), marg(n);
  double best_rho = 0.0;
  auto profile = [&](double nu, double& rho_out) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = math::student_quantile(d(i, 0), nu);
      y(i) = math::student_quantile(d(i, 1), nu);
      marg(i) = math::student_log_pdf(x(i), nu) + math::student_log_pdf(y(i), nu);
    }
    const double c = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                     std::log(nu * M_PI);
    auto negll = [&](double rho) {
      double r2 = 1.0 - rho * rho;
      double ll = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double q = (x(i) * x(i) + y(i) * y(i) - 2.0 * rho * x(i) * y(i)) / (nu * r2);
        double l = c - 0.5 * std::log(r2) - 0.5 * (nu + 2.0) * std::log1p(q) - marg(i);
        ll += std::isnan(l) ? log_floor : std::max(l, log_floor);
      }
      return -ll;
    };
    auto res = math::minimize_bounded(negll, b.lower(0), b.upper(0),
                                      max_evaluations, rel_tolerance);
    rho_out = res.x;
    return res.f;
  };
  auto outer = [&](double log_nu) {
    double rho;
    return profile(std::exp(log_nu), rho);
  };
  auto res = math::minimize_bounded(outer, std::log(b.lower(1)), std::log(b.upper(1)),
                                    max_evaluations, 1e-4);
  double nu = std::min(std::max(std::exp(res.x), b.lower(1)), b.upper(1));
  profile(nu, best_rho);
  Eigen::VectorXd par(2);
  par << best_rho, nu;
  return finish(BicopFamily::student, rotation, par, data);
}

std::vector<Eigen::Vector2d> start_grid(BicopFamily family, double tau)
{
  auto b = parameter_bounds(family);
  std::vector<Eigen::Vector2d> pts;
  pts.emplace_back(0.5 * (b.lower + b.upper));
  auto add = [&](double a, double c) {
    Eigen::Vector2d p(a, c);
    pts.emplace_back(p.cwiseMax(b.lower).cwiseMin(b.upper));
  };
  double t = std::min(std::max(tau, 0.01), 0.95);
  switch (family) {
    case BicopFamily::bb1:
      for (double de : { 1.05, 1.5, 3.0 })
        add(2.0 / (de * (1.0 - t)) - 2.0, de);
      break;
    case BicopFamily::bb6:
      for (double th : { 1.1, 2.0, 4.0 })
        for (double de : { 1.1, 2.0, 4.0 })
          add(th, de);
      break;
    case BicopFamily::bb7:
      for (double th : { 1.2, 2.5, 4.5 })
        for (double de : { 0.3, 1.5, 5.0 })
          add(th, de);
      break;
    case BicopFamily::bb8:
      for (double th : { 1.5, 3.0, 6.0 })
        for (double de : { 0.3, 0.65, 0.95 })
          add(th, de);
      break;
    default:
      break;
  }
  return pts;
}

Bicop fit_two_par(BicopFamily family, int rotation, double tau_base,
                  const PairData& d, const PairData& data)
{
  auto b = parameter_bounds(family);
  int evals = 0;
  auto negll = [&](const Eigen::VectorXd& x) {
    ++evals;
    Eigen::VectorXd p = x.cwiseMax(b.lower).cwiseMin(b.upper);
    return -base_loglik(family, p, d);
  };

  Eigen::VectorXd best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& p : start_grid(family, tau_base)) {
    Eigen::VectorXd x = p;
    double f = negll(x);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  auto res = math::nelder_mead_box(negll, best, b.lower, b.upper,
                                   max_evaluations - evals, 1e-6);
  Eigen::VectorXd x = res.f <= best_f ? res.x : best;
  Eigen::VectorXd par = x.cwiseMax(b.lower).cwiseMin(b.upper);
  return finish(family, rotation, par, data);
}

Bicop fit_with_tau(const PairData& data, BicopFamily family, int rotation,
                   double empirical_tau)
{
  if (family == BicopFamily::indep) {
    Bicop cop;
    cop.set_fit_stats(0.0, static_cast<int>(data.rows()));
    return cop;
  }
  if (rotation != 0 && !is_rotatable(family))
    throw InvalidInput(family_name(family) + " copula admits rotation 0 only");
  PairData d = unrotate(data, rotation);
  double tau_base = (rotation == 90 || rotation == 270) ? -empirical_tau : empirical_tau;
  if (family == BicopFamily::gaussian)
    return fit_gaussian(d, rotation, data);
  if (family == BicopFamily::student)
    return fit_student(d, rotation, data);
  if (n_parameters(family) == 1)
    return fit_one_par(family, rotation, tau_base, d, data);
  return fit_two_par(family, rotation, tau_base, d, data);
}

} // namespace

Bicop fit_mle(const PairData& data, BicopFamily family, int rotation)
{
  check_pairs(data);
  double tau = math::kendall_tau(data.col(0), data.col(1));
  return fit_with_tau(data, family, rotation, tau);
}

std::vector<CandidateSpec> default_candidates(double empirical_tau)
{
  // fixed ordering; earlier entries win ties
  const BicopFamily order[] = { BicopFamily::indep,   BicopFamily::bb6,
                                BicopFamily::bb7,     BicopFamily::bb8,
                                BicopFamily::clayton, BicopFamily::frank,
                                BicopFamily::gaussian, BicopFamily::gumbel,
                                BicopFamily::joe,     BicopFamily::student,
                                BicopFamily::bb1 };
  std::vector<CandidateSpec> out;
  for (auto fam : order) {
    if (!is_rotatable(fam)) {
      out.push_back({ fam, 0 });
    } else if (empirical_tau >= 0.0) {
      out.push_back({ fam, 0 });
      out.push_back({ fam, 180 });
    } else {
      out.push_back({ fam, 90 });
      out.push_back({ fam, 270 });
    }
  }
  return out;
}

namespace {

Bicop select_with_tau(const PairData& data,
                      Criterion crit,
                      const std::vector<CandidateSpec>& candidates,
                      double tau)
{
  Bicop best;
  double best_crit = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& cand : candidates) {
    Bicop cop = fit_with_tau(data, cand.family, cand.rotation, tau);
    double value = cop.criterion(crit);
    if (!found || value < best_crit) {
      best = cop;
      best_crit = value;
      found = true;
    }
  }
  return best;
}

} // namespace

Bicop select_family(const PairData& data,
                    Criterion crit,
                    const std::vector<CandidateSpec>& candidates)
{
  if (candidates.empty())
    throw InvalidInput("select_family: empty candidate set");
  check_pairs(data);
  double tau = math::kendall_tau(data.col(0), data.col(1));
  return select_with_tau(data, crit, candidates, tau);
}

Bicop select_family(const PairData& data, Criterion crit)
{
  check_pairs(data);
  double tau = math::kendall_tau(data.col(0), data.col(1));
  return select_with_tau(data, crit, default_candidates(tau), tau);
}

} // namespace sparsevine
