#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sparsevine {

//! Raised when an iterative routine fails to reach its tolerance.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Raised for inputs that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

namespace math {

//! Pseudo-observations are kept away from the boundary of the unit square.
inline constexpr double unit_eps = 1e-10;

inline double clamp_unit(double u)
{
  if (std::isnan(u))
    return u;
  return std::min(std::max(u, unit_eps), 1.0 - unit_eps);
}

inline double norm_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double norm_quantile(double p);

double student_cdf(double x, double nu);
double student_quantile(double p, double nu);
double student_log_pdf(double x, double nu);

//! log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b)
{
  if (a < b)
    std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity())
    return a;
  return a + std::log1p(std::exp(b - a));
}

double mean(const Eigen::VectorXd& x);
double sd(const Eigen::VectorXd& x);
//! Linear-interpolation sample quantile (type 7).
double sample_quantile(std::vector<double> x, double p);

//! Kendall's tau-b of two samples.
double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

//! Pearson correlation.
double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct ScalarMin
{
  double x;
  double f;
  int evaluations;
};

//! Brent minimization of f over [lo, hi].
ScalarMin minimize_bounded(const std::function<double(double)>& f,
                           double lo,
                           double hi,
                           int max_eval = 500,
                           double rel_tol = 1e-8);

struct SimplexMin
{
  Eigen::VectorXd x;
  double f;
  int evaluations;
  bool converged;
};

//! Nelder-Mead search restricted to the box [lower, upper]. Trial points
//! are projected onto the box.
SimplexMin nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& start,
                           const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper,
                           int max_eval = 500,
                           double rel_tol = 1e-8);

//! Root of a nondecreasing function on [lo, hi] by safeguarded Newton
//! steps starting at `x0`. `f` returns (value - target, derivative); the
//! derivative may be NaN. Throws NumericalError when the iteration cap is
//! reached.
double solve_monotone(const std::function<std::pair<double, double>(double)>& f,
                      double lo,
                      double hi,
                      double x0,
                      double ftol = 1e-13,
                      int max_iter = 200);

//! SplitMix64 as a counter-based generator: output k is a bijective mix of
//! seed + k * golden-gamma. Streams are separated by hashing the stream id
//! into the seed.
class Rng
{
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  double uniform();
  double normal();

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace math
} // namespace sparsevine
