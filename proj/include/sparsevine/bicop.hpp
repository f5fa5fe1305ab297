#pragma once

#include "sparsevine/math.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sparsevine {

enum class BicopFamily
{
  indep,
  gaussian,
  student,
  clayton,
  gumbel,
  frank,
  joe,
  bb1,
  bb6,
  bb7,
  bb8
};

enum class Criterion
{
  aic,
  bic
};

//! Which argument of the copula the h-function conditions on.
//! `first`: P(U2 <= v | U1 = u). `second`: P(U1 <= v | U2 = u).
enum class Conditioning
{
  first,
  second
};

std::string family_name(BicopFamily family);
BicopFamily family_from_name(const std::string& name);
int n_parameters(BicopFamily family);
//! Families that are not radially/reflection symmetric accept 90/180/270.
bool is_rotatable(BicopFamily family);
std::vector<BicopFamily> all_families();

//! Box bounds of the parameter vector; `lower`/`upper` are admissible values.
struct ParameterBounds
{
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};
ParameterBounds parameter_bounds(BicopFamily family);

using PairData = Eigen::Matrix<double, Eigen::Dynamic, 2>;

//! A parametric bivariate copula with (optional) fit statistics.
class Bicop
{
public:
  Bicop();
  Bicop(BicopFamily family, int rotation, Eigen::VectorXd parameters);
  Bicop(BicopFamily family, int rotation, std::initializer_list<double> pars);

  BicopFamily family() const { return family_; }
  int rotation() const { return rotation_; }
  const Eigen::VectorXd& parameters() const { return parameters_; }
  int n_parameters() const;

  double loglik() const { return loglik_; }
  int n_obs() const { return n_obs_; }
  double aic() const;
  double bic() const;
  double criterion(Criterion crit) const;

  //! Stores the fit statistics (used by the fitting routines and loaders).
  void set_fit_stats(double loglik, int n_obs);

  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;
  //! Sum of log densities over the rows of `data`.
  double loglik(const PairData& data) const;

  //! h-function: conditional distribution of the non-conditioning argument
  //! evaluated at `v`, given the conditioning argument equals `u`.
  double hfunc(Conditioning which, double v, double u) const;
  //! Inverse of `hfunc` in its first argument.
  double hinv(Conditioning which, double p, double u) const;

  Eigen::VectorXd hfunc(Conditioning which,
                        const Eigen::VectorXd& v,
                        const Eigen::VectorXd& u) const;

  //! Kendall's tau of the (rotated) copula.
  double tau() const;

  std::string str() const;

private:
  void check() const;

  BicopFamily family_;
  int rotation_;
  Eigen::VectorXd parameters_;
  double loglik_ = 0.0;
  int n_obs_ = 0;
};

//! Kendall's tau of an unrotated family at the given parameters.
double family_tau(BicopFamily family, const Eigen::VectorXd& parameters);

struct CandidateSpec
{
  BicopFamily family;
  int rotation;
};

//! Maximum-likelihood fit of one family/rotation.
Bicop fit_mle(const PairData& data, BicopFamily family, int rotation);

//! Default candidate list: every family, with rotations filtered by the sign
//! of `empirical_tau`. Independence first.
std::vector<CandidateSpec> default_candidates(double empirical_tau);

//! Fits every candidate and returns the one with the lowest criterion;
//! ties go to the earlier candidate. Throws InvalidInput on an empty list.
Bicop select_family(const PairData& data,
                    Criterion crit,
                    const std::vector<CandidateSpec>& candidates);

//! Family selection over `default_candidates`.
Bicop select_family(const PairData& data, Criterion crit = Criterion::aic);

} // namespace sparsevine
