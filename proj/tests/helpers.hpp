#pragma once

#include "sparsevine/bicop.hpp"
#include "sparsevine/math.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <vector>

namespace testutil {

using sparsevine::BicopFamily;
using sparsevine::Bicop;

// (family, rotation, parameters) triples covering every family twice
struct Case
{
  BicopFamily family;
  std::vector<double> par;
};

inline std::vector<Case> parameter_cases()
{
  return {
    { BicopFamily::indep, {} },
    { BicopFamily::gaussian, { 0.3 } },     { BicopFamily::gaussian, { -0.8 } },
    { BicopFamily::student, { 0.4, 5.0 } }, { BicopFamily::student, { -0.7, 15.0 } },
    { BicopFamily::clayton, { 0.8 } },      { BicopFamily::clayton, { 4.0 } },
    { BicopFamily::gumbel, { 1.3 } },       { BicopFamily::gumbel, { 3.0 } },
    { BicopFamily::frank, { -4.0 } },       { BicopFamily::frank, { 8.0 } },
    { BicopFamily::joe, { 1.5 } },          { BicopFamily::joe, { 3.5 } },
    { BicopFamily::bb1, { 0.5, 1.5 } },     { BicopFamily::bb1, { 2.0, 2.5 } },
    { BicopFamily::bb6, { 1.5, 1.5 } },     { BicopFamily::bb6, { 2.5, 2.0 } },
    { BicopFamily::bb7, { 1.5, 0.8 } },     { BicopFamily::bb7, { 3.0, 2.0 } },
    { BicopFamily::bb8, { 2.0, 0.7 } },     { BicopFamily::bb8, { 4.0, 0.9 } },
  };
}

inline std::vector<int> rotations(BicopFamily f)
{
  if (sparsevine::is_rotatable(f))
    return { 0, 90, 180, 270 };
  return { 0 };
}

inline Bicop make(const Case& c, int rot)
{
  Eigen::VectorXd p(static_cast<Eigen::Index>(c.par.size()));
  for (std::size_t i = 0; i < c.par.size(); ++i)
    p(static_cast<Eigen::Index>(i)) = c.par[i];
  return Bicop(c.family, rot, p);
}

inline double qnorm(double p)
{
  return boost::math::quantile(boost::math::normal(), p);
}

inline double pnorm(double x)
{
  return boost::math::cdf(boost::math::normal(), x);
}

// Correlated standard normals via an explicit 2x2 construction.
inline sparsevine::PairData gaussian_pairs(int n, double rho, std::uint64_t seed)
{
  sparsevine::math::Rng rng(seed, 7);
  sparsevine::PairData d(n, 2);
  for (int i = 0; i < n; ++i) {
    double a = rng.normal();
    double b = rho * a + std::sqrt(1 - rho * rho) * rng.normal();
    d(i, 0) = pnorm(a);
    d(i, 1) = pnorm(b);
  }
  return d;
}

// Clayton sample by the conditional inverse written out by hand.
inline sparsevine::PairData clayton_pairs(int n, double th, std::uint64_t seed)
{
  sparsevine::math::Rng rng(seed, 11);
  sparsevine::PairData d(n, 2);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    double w = rng.uniform();
    double v = std::pow(std::pow(u, -th) * (std::pow(w, -th / (1 + th)) - 1) + 1, -1 / th);
    d(i, 0) = u;
    d(i, 1) = v;
  }
  return d;
}

// Kendall's tau by direct O(n^2) pair counting.
inline double tau_pairs(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
  double s = 0;
  long n = x.size();
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      double a = (x(i) - x(j)) * (y(i) - y(j));
      s += (a > 0) - (a < 0);
    }
  return 2 * s / (static_cast<double>(n) * (n - 1));
}

} // namespace testutil
