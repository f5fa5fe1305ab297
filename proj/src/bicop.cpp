#include "sparsevine/bicop.hpp"

#include "families.hpp"

#include <algorithm>
#include <sstream>

namespace sparsevine {

namespace {

struct FamilyInfo
{
  BicopFamily family;
  const char* name;
  int n_par;
  bool rotatable;
};

constexpr FamilyInfo family_table[] = {
  { BicopFamily::indep, "indep", 0, false },
  { BicopFamily::gaussian, "gaussian", 1, false },
  { BicopFamily::student, "student", 2, false },
  { BicopFamily::clayton, "clayton", 1, true },
  { BicopFamily::gumbel, "gumbel", 1, true },
  { BicopFamily::frank, "frank", 1, false },
  { BicopFamily::joe, "joe", 1, true },
  { BicopFamily::bb1, "bb1", 2, true },
  { BicopFamily::bb6, "bb6", 2, true },
  { BicopFamily::bb7, "bb7", 2, true },
  { BicopFamily::bb8, "bb8", 2, true },
};

const FamilyInfo& info(BicopFamily family)
{
  for (const auto& fi : family_table)
    if (fi.family == family)
      return fi;
  throw InvalidInput("unknown copula family");
}

} // namespace

std::string family_name(BicopFamily family)
{
  return info(family).name;
}

BicopFamily family_from_name(const std::string& name)
{
  for (const auto& fi : family_table)
    if (name == fi.name)
      return fi.family;
  throw InvalidInput("unknown copula family '" + name + "'");
}

int n_parameters(BicopFamily family)
{
  return info(family).n_par;
}

bool is_rotatable(BicopFamily family)
{
  return info(family).rotatable;
}

std::vector<BicopFamily> all_families()
{
  std::vector<BicopFamily> out;
  for (const auto& fi : family_table)
    out.push_back(fi.family);
  return out;
}

ParameterBounds parameter_bounds(BicopFamily family)
{
  auto vec = [](std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
      out(i++) = x;
    return out;
  };
  switch (family) {
    case BicopFamily::indep:
      return { Eigen::VectorXd(0), Eigen::VectorXd(0) };
    case BicopFamily::gaussian:
      return { vec({ -0.999 }), vec({ 0.999 }) };
    case BicopFamily::student:
      return { vec({ -0.999, 2.0 }), vec({ 0.999, 50.0 }) };
    case BicopFamily::clayton:
      return { vec({ 1e-4 }), vec({ 28.0 }) };
    case BicopFamily::gumbel:
      return { vec({ 1.0 }), vec({ 50.0 }) };
    case BicopFamily::frank:
      return { vec({ -35.0 }), vec({ 35.0 }) };
    case BicopFamily::joe:
      return { vec({ 1.0 + 1e-6 }), vec({ 30.0 }) };
    case BicopFamily::bb1:
      return { vec({ 1e-4, 1.0 }), vec({ 7.0, 7.0 }) };
    case BicopFamily::bb6:
      return { vec({ 1.0, 1.0 }), vec({ 6.0, 8.0 }) };
    case BicopFamily::bb7:
      return { vec({ 1.0, 1e-4 }), vec({ 6.0, 25.0 }) };
    case BicopFamily::bb8:
      return { vec({ 1.0, 1e-4 }), vec({ 8.0, 1.0 }) };
  }
  throw InvalidInput("unknown copula family");
}

Bicop::Bicop()
  : Bicop(BicopFamily::indep, 0, Eigen::VectorXd(0))
{}

Bicop::Bicop(BicopFamily family, int rotation, Eigen::VectorXd parameters)
  : family_(family)
  , rotation_(rotation)
  , parameters_(std::move(parameters))
{
  check();
}

Bicop::Bicop(BicopFamily family, int rotation, std::initializer_list<double> pars)
  : family_(family)
  , rotation_(rotation)
  , parameters_(static_cast<Eigen::Index>(pars.size()))
{
  Eigen::Index i = 0;
  for (double p : pars)
    parameters_(i++) = p;
  check();
}

void Bicop::check() const
{
  if (rotation_ != 0 && rotation_ != 90 && rotation_ != 180 && rotation_ != 270)
    throw InvalidInput("rotation must be one of 0, 90, 180, 270");
  if (rotation_ != 0 && !is_rotatable(family_))
    throw InvalidInput(family_name(family_) + " copula admits rotation 0 only");
  if (parameters_.size() != sparsevine::n_parameters(family_))
    throw InvalidInput(family_name(family_) + " copula expects " +
                       std::to_string(sparsevine::n_parameters(family_)) +
                       " parameters");
  auto bounds = parameter_bounds(family_);
  for (Eigen::Index i = 0; i < parameters_.size(); ++i) {
    double p = parameters_(i);
    if (!std::isfinite(p) || p < bounds.lower(i) - 1e-12 ||
        p > bounds.upper(i) + 1e-12) {
      std::ostringstream msg;
      msg << family_name(family_) << " parameter " << i << " = " << p
          << " outside [" << bounds.lower(i) << ", " << bounds.upper(i) << "]";
      throw InvalidInput(msg.str());
    }
  }
  if (family_ == BicopFamily::frank && parameters_(0) == 0.0)
    throw InvalidInput("frank parameter must be nonzero");
}

int Bicop::n_parameters() const
{
  return sparsevine::n_parameters(family_);
}

double Bicop::aic() const
{
  return -2.0 * loglik_ + 2.0 * n_parameters();
}

double Bicop::bic() const
{
  return -2.0 * loglik_ + std::log(static_cast<double>(n_obs_)) * n_parameters();
}

double Bicop::criterion(Criterion crit) const
{
  return crit == Criterion::aic ? aic() : bic();
}

void Bicop::set_fit_stats(double loglik, int n_obs)
{
  loglik_ = loglik;
  n_obs_ = n_obs;
}

namespace {

void check_unit(double u)
{
  if (!(u >= 0.0 && u <= 1.0))
    throw InvalidInput("copula arguments must lie in [0, 1]");
}

} // namespace

double Bicop::log_pdf(double u, double v) const
{
  check_unit(u);
  check_unit(v);
  if (family_ == BicopFamily::indep)
    return 0.0;
  u = math::clamp_unit(u);
  v = math::clamp_unit(v);
  switch (rotation_) {
    case 90:
      return detail::base_log_pdf(family_, parameters_, 1.0 - u, v);
    case 180:
      return detail::base_log_pdf(family_, parameters_, 1.0 - u, 1.0 - v);
    case 270:
      return detail::base_log_pdf(family_, parameters_, u, 1.0 - v);
    default:
      return detail::base_log_pdf(family_, parameters_, u, v);
  }
}

double Bicop::pdf(double u, double v) const
{
  return std::exp(log_pdf(u, v));
}

double Bicop::loglik(const PairData& data) const
{
  if (family_ == BicopFamily::indep)
    return 0.0;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    ll += std::max(log_pdf(data(i, 0), data(i, 1)), std::log(1e-300));
  return ll;
}

namespace {

// Whether the rotated h-function reflects the evaluated argument
// (h = 1 - h_base(1 - x | .)) and/or the conditioning argument.
struct RotationMap
{
  bool flip_x;
  bool flip_c;
};

RotationMap rotation_map(int rotation, Conditioning which)
{
  bool first = which == Conditioning::first;
  switch (rotation) {
    case 90:
      return first ? RotationMap{ false, true } : RotationMap{ true, false };
    case 180:
      return { true, true };
    case 270:
      return first ? RotationMap{ true, false } : RotationMap{ false, true };
    default:
      return { false, false };
  }
}

} // namespace

double Bicop::hfunc(Conditioning which, double v, double u) const
{
  check_unit(u);
  check_unit(v);
  if (family_ == BicopFamily::indep)
    return v;
  v = math::clamp_unit(v);
  u = math::clamp_unit(u);
  auto m = rotation_map(rotation_, which);
  double c = m.flip_c ? 1.0 - u : u;
  double h = m.flip_x ? 1.0 - detail::base_hfunc(family_, parameters_, 1.0 - v, c)
                      : detail::base_hfunc(family_, parameters_, v, c);
  if (std::isnan(h))
    throw NumericalError("hfunc: NaN for " + str());
  return std::min(std::max(h, 0.0), 1.0);
}

Eigen::VectorXd Bicop::hfunc(Conditioning which,
                             const Eigen::VectorXd& v,
                             const Eigen::VectorXd& u) const
{
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out(i) = hfunc(which, v(i), u(i));
  return out;
}

double Bicop::hinv(Conditioning which, double p, double u) const
{
  check_unit(p);
  check_unit(u);
  if (family_ == BicopFamily::indep)
    return p;
  p = math::clamp_unit(p);
  u = math::clamp_unit(u);
  auto m = rotation_map(rotation_, which);
  double c = m.flip_c ? 1.0 - u : u;
  double x;
  if (m.flip_x)
    x = 1.0 - detail::base_hinv(family_, parameters_, 1.0 - p, c);
  else
    x = detail::base_hinv(family_, parameters_, p, c);
  if (!std::isfinite(x))
    throw NumericalError("hinv: non-finite result for " + str());
  return std::min(std::max(x, 0.0), 1.0);
}

double Bicop::tau() const
{
  double t = detail::base_tau(family_, parameters_);
  return (rotation_ == 90 || rotation_ == 270) ? -t : t;
}

double family_tau(BicopFamily family, const Eigen::VectorXd& parameters)
{
  return detail::base_tau(family, parameters);
}

std::string Bicop::str() const
{
  std::ostringstream os;
  os << family_name(family_);
  if (rotation_ != 0)
    os << rotation_;
  if (parameters_.size() > 0) {
    os << "(";
    for (Eigen::Index i = 0; i < parameters_.size(); ++i)
      os << (i ? ", " : "") << parameters_(i);
    os << ")";
  }
  return os.str();
}

} // namespace sparsevine
