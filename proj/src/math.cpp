#include "sparsevine/math.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <numeric>

namespace sparsevine {
namespace math {

double norm_quantile(double p)
{
  if (p <= 0.0)
    return -std::numeric_limits<double>::infinity();
  if (p >= 1.0)
    return std::numeric_limits<double>::infinity();
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double student_cdf(double x, double nu)
{
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::cdf(dist, x);
}

double student_quantile(double p, double nu)
{
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::quantile(dist, p);
}

double student_log_pdf(double x, double nu)
{
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI) -
         0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double mean(const Eigen::VectorXd& x)
{
  return x.mean();
}

double sd(const Eigen::VectorXd& x)
{
  if (x.size() < 2)
    return 0.0;
  double m = x.mean();
  return std::sqrt((x.array() - m).square().sum() / (x.size() - 1.0));
}

double sample_quantile(std::vector<double> x, double p)
{
  if (x.empty())
    throw InvalidInput("sample_quantile: empty sample");
  std::sort(x.begin(), x.end());
  double h = (x.size() - 1) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
  const Eigen::Index n = x.size();
  if (y.size() != n)
    throw InvalidInput("kendall_tau: length mismatch");
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      double dx = x(i) - x(j);
      double dy = y(i) - y(j);
      if (dx == 0.0 && dy == 0.0)
        continue;
      if (dx == 0.0)
        ties_x += 1.0;
      else if (dy == 0.0)
        ties_y += 1.0;
      else if (dx * dy > 0.0)
        concordant += 1.0;
      else
        discordant += 1.0;
    }
  }
  double denom = std::sqrt((concordant + discordant + ties_x) *
                           (concordant + discordant + ties_y));
  if (denom == 0.0)
    return 0.0;
  return (concordant - discordant) / denom;
}

double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
  Eigen::ArrayXd a = x.array() - x.mean();
  Eigen::ArrayXd b = y.array() - y.mean();
  double denom = std::sqrt(a.square().sum() * b.square().sum());
  if (denom == 0.0)
    return 0.0;
  return (a * b).sum() / denom;
}

ScalarMin minimize_bounded(const std::function<double(double)>& f,
                           double lo,
                           double hi,
                           int max_eval,
                           double rel_tol)
{
  int bits = static_cast<int>(std::ceil(-std::log2(rel_tol)));
  bits = std::min(bits, std::numeric_limits<double>::digits / 2);
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_eval);
  auto res = boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
  return { res.first, res.second, static_cast<int>(iters) };
}

SimplexMin nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& start,
                           const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper,
                           int max_eval,
                           double rel_tol)
{
  const Eigen::Index d = start.size();
  auto project = [&](Eigen::VectorXd x) {
    return x.cwiseMax(lower).cwiseMin(upper).eval();
  };
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  std::vector<Eigen::VectorXd> pts(d + 1);
  std::vector<double> vals(d + 1);
  pts[0] = project(start);
  vals[0] = eval(pts[0]);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd p = pts[0];
    double range = upper(i) - lower(i);
    double step = 0.1 * range;
    p(i) = (p(i) + step <= upper(i)) ? p(i) + step : p(i) - step;
    pts[i + 1] = project(p);
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> idx(d + 1);
  bool converged = false;
  while (evals < max_eval) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return vals[a] < vals[b];
    });
    std::size_t best = idx.front(), worst = idx.back(), second = idx[d - 1];

    double spread = std::fabs(vals[worst] - vals[best]);
    double xspread = 0.0;
    for (Eigen::Index i = 0; i <= d; ++i)
      xspread = std::max(xspread,
                         ((pts[i] - pts[best]).array() /
                          (upper - lower).array()).abs().maxCoeff());
    if (spread <= rel_tol * (std::fabs(vals[best]) + rel_tol) ||
        xspread < 1e-10) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i <= d; ++i)
      if (static_cast<std::size_t>(i) != worst)
        centroid += pts[i];
    centroid /= static_cast<double>(d);

    Eigen::VectorXd xr = project(centroid + (centroid - pts[worst]));
    double fr = eval(xr);
    if (fr < vals[best]) {
      Eigen::VectorXd xe = project(centroid + 2.0 * (centroid - pts[worst]));
      double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    bool outside = fr < vals[worst];
    Eigen::VectorXd xc = outside ? project(centroid + 0.5 * (xr - centroid))
                                 : project(centroid + 0.5 * (pts[worst] - centroid));
    double fc = eval(xc);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    // shrink towards the best vertex
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (static_cast<std::size_t>(i) == best)
        continue;
      pts[i] = project(pts[best] + 0.5 * (pts[i] - pts[best]));
      vals[i] = eval(pts[i]);
    }
  }
  std::size_t best = static_cast<std::size_t>(
    std::min_element(vals.begin(), vals.end()) - vals.begin());
  return { pts[best], vals[best], evals, converged };
}

double solve_monotone(const std::function<std::pair<double, double>(double)>& f,
                      double lo,
                      double hi,
                      double x0,
                      double ftol,
                      int max_iter)
{
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  double width = hi - lo;
  for (int it = 0; it < max_iter; ++it) {
    auto [g, dg] = f(x);
    if (std::fabs(g) <= ftol)
      return x;
    if (g > 0.0)
      hi = x;
    else
      lo = x;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1e-20, std::fabs(x)))
      return x;
    double next = x - g / dg;
    // fall back to bisection when Newton leaves the bracket or stalls
    bool stalled = (it % 2 == 1) && (hi - lo > 0.5 * width);
    if (it % 2 == 1)
      width = hi - lo;
    if (!std::isfinite(next) || next <= lo || next >= hi || stalled)
      next = 0.5 * (lo + hi);
    x = next;
  }
  throw NumericalError("solve_monotone: no convergence within iteration cap");
}

namespace {

std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
  : key_(mix64(seed ^ mix64(stream + golden_gamma)))
{}

Rng::result_type Rng::operator()()
{
  ++counter_;
  return mix64(key_ + counter_ * golden_gamma);
}

double Rng::uniform()
{
  // 53 random bits, strictly inside (0, 1)
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

} // namespace math
} // namespace sparsevine
