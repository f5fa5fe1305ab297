#pragma once

// Unrotated family kernels. All families implemented here are exchangeable,
// so a single h-function h(x | c) = P(B <= x | A = c) serves both
// conditioning directions.

#include "sparsevine/bicop.hpp"

namespace sparsevine {
namespace detail {

double base_log_pdf(BicopFamily family, const Eigen::VectorXd& par,
                    double u, double v);
double base_hfunc(BicopFamily family, const Eigen::VectorXd& par,
                  double x, double c);
double base_hinv(BicopFamily family, const Eigen::VectorXd& par,
                 double p, double c);
double base_tau(BicopFamily family, const Eigen::VectorXd& par);

} // namespace detail
} // namespace sparsevine
