#include "sparsevine/margins.hpp"

#include <algorithm>
#include <cmath>

namespace sparsevine {

namespace {

constexpr int grid_size = 257;
constexpr double support_extension = 4.0;
// kernel contributions beyond this many bandwidths are 0 or 1 in double
constexpr double kernel_cutoff = 9.0;

} // namespace

double KdeMargin::silverman_bandwidth(const Eigen::VectorXd& x)
{
  const double n = static_cast<double>(x.size());
  std::vector<double> v(x.data(), x.data() + x.size());
  double s = math::sd(x);
  double iqr = math::sample_quantile(v, 0.75) - math::sample_quantile(v, 0.25);
  double spread = iqr > 0.0 ? std::min(s, iqr / 1.34) : s;
  return 1.06 * spread * std::pow(n, -0.2);
}

KdeMargin::KdeMargin(const Eigen::VectorXd& x)
  : sample_(x)
{
  if (x.size() < 10)
    throw InvalidInput("kernel density estimate needs at least 10 observations");
  if (!x.allFinite())
    throw InvalidInput("kernel density estimate: non-finite value in sample");
  if ((x.array() == x(0)).all())
    throw InvalidInput("degenerate margin: all values are equal");
  bandwidth_ = silverman_bandwidth(x);
  build();
}

KdeMargin::KdeMargin(const Eigen::VectorXd& sample, double bandwidth)
  : sample_(sample)
  , bandwidth_(bandwidth)
{
  if (sample.size() < 1 || !(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InvalidInput("kernel margin needs a sample and a positive bandwidth");
  build();
}

void KdeMargin::build()
{
  sorted_.assign(sample_.data(), sample_.data() + sample_.size());
  std::sort(sorted_.begin(), sorted_.end());
  double lo = sorted_.front() - support_extension * bandwidth_;
  double hi = sorted_.back() + support_extension * bandwidth_;
  scale_ = std::max(1.0, hi - lo);
  grid_x_.resize(grid_size);
  grid_f_.resize(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    grid_x_[k] = lo + (hi - lo) * k / (grid_size - 1);
    grid_f_[k] = cdf(grid_x_[k]);
  }
}

double KdeMargin::cdf(double x) const
{
  if (std::isnan(x))
    return x;
  const double reach = kernel_cutoff * bandwidth_;
  auto first = std::lower_bound(sorted_.begin(), sorted_.end(), x - reach);
  auto last = std::upper_bound(first, sorted_.end(), x + reach);
  // points far to the left contribute 1
  double sum = static_cast<double>(first - sorted_.begin());
  for (auto it = first; it != last; ++it)
    sum += math::norm_cdf((x - *it) / bandwidth_);
  return sum / static_cast<double>(sorted_.size());
}

double KdeMargin::pit(double x) const
{
  return math::clamp_unit(cdf(x));
}

Eigen::VectorXd KdeMargin::pit(const Eigen::VectorXd& x) const
{
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out(i) = pit(x(i));
  return out;
}

double KdeMargin::pdf(double x) const
{
  const double reach = kernel_cutoff * bandwidth_;
  auto first = std::lower_bound(sorted_.begin(), sorted_.end(), x - reach);
  auto last = std::upper_bound(first, sorted_.end(), x + reach);
  double sum = 0.0;
  for (auto it = first; it != last; ++it)
    sum += math::norm_pdf((x - *it) / bandwidth_);
  return sum / (static_cast<double>(sorted_.size()) * bandwidth_);
}

double KdeMargin::log_pdf(double x) const
{
  double f = pdf(x);
  if (f > 0.0)
    return std::log(f);
  // outside the kernel reach: use the nearest sample point's kernel
  double d = std::min(std::fabs(x - sorted_.front()), std::fabs(x - sorted_.back()));
  double z = d / bandwidth_;
  return -0.5 * z * z - std::log(std::sqrt(2.0 * M_PI) * bandwidth_) -
         std::log(static_cast<double>(sorted_.size()));
}

double KdeMargin::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw InvalidInput("quantile level must lie in (0, 1)");
  p = math::clamp_unit(p);
  double lo, hi;
  auto it = std::lower_bound(grid_f_.begin(), grid_f_.end(), p);
  if (it == grid_f_.begin()) {
    hi = grid_x_.front();
    lo = hi - support_extension * bandwidth_;
    while (cdf(lo) > p)
      lo -= support_extension * bandwidth_;
  } else if (it == grid_f_.end()) {
    lo = grid_x_.back();
    hi = lo + support_extension * bandwidth_;
    while (cdf(hi) < p)
      hi += support_extension * bandwidth_;
  } else {
    auto k = it - grid_f_.begin();
    lo = grid_x_[k - 1];
    hi = grid_x_[k];
  }
  const double tol = 1e-10 * scale_;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace sparsevine
