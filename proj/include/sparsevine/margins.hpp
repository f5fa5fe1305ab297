#pragma once

#include "sparsevine/math.hpp"

#include <Eigen/Dense>
#include <vector>

namespace sparsevine {

//! Univariate Gaussian kernel density estimate.
//!
//! The CDF is the average of the kernel CDFs, so it is smooth and strictly
//! increasing. Quantiles are found by bisection, bracketed on a grid that
//! extends four bandwidths past the sample range.
class KdeMargin
{
public:
  KdeMargin() = default;

  //! Fits with Silverman's rule, 1.06 * min(sd, IQR / 1.34) * n^(-1/5).
  explicit KdeMargin(const Eigen::VectorXd& x);

  //! Restores a fitted margin (e.g. from JSON).
  KdeMargin(const Eigen::VectorXd& sample, double bandwidth);

  static double silverman_bandwidth(const Eigen::VectorXd& x);

  double cdf(double x) const;
  //! cdf clamped to [1e-10, 1 - 1e-10].
  double pit(double x) const;
  Eigen::VectorXd pit(const Eigen::VectorXd& x) const;
  double pdf(double x) const;
  double log_pdf(double x) const;
  double quantile(double p) const;

  const Eigen::VectorXd& sample() const { return sample_; }
  double bandwidth() const { return bandwidth_; }
  bool fitted() const { return bandwidth_ > 0.0; }

  const std::vector<double>& support_grid() const { return grid_x_; }
  const std::vector<double>& cdf_grid() const { return grid_f_; }

private:
  void build();

  Eigen::VectorXd sample_;
  std::vector<double> sorted_;
  double bandwidth_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> grid_x_;
  std::vector<double> grid_f_;
};

} // namespace sparsevine
