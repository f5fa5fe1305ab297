#include "families.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>

namespace sparsevine {
namespace detail {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_diff_guard(double x)
{
  return x > 0.0 ? std::log(x) : neg_inf;
}

// ---------------------------------------------------------------------------
// Archimedean generators in log form. Each family provides
//   log_gen(t)   = log phi(t)
//   inv(ls)      = phi^{-1}(exp(ls))
//   log_d1(t)    = log(-phi'(t))
//   log_d2(t)    = log(phi''(t))
// ---------------------------------------------------------------------------

// log(1 - (1 - t)^theta), accurate at both ends
double log_one_minus_pow1m(double t, double theta)
{
  double a = theta * std::log1p(-t);
  return a < -M_LN2 ? std::log1p(-std::exp(a)) : std::log(-std::expm1(a));
}

struct Gumbel
{
  double th;
  explicit Gumbel(const Eigen::VectorXd& p) : th(p(0)) {}
  double log_gen(double t) const { return th * std::log(-std::log(t)); }
  double inv(double ls) const { return std::exp(-std::exp(ls / th)); }
  double log_d1(double t) const
  {
    double lt = std::log(t);
    return std::log(th) + (th - 1.0) * std::log(-lt) - lt;
  }
  double log_d2(double t) const
  {
    double lt = std::log(t);
    double L = -lt;
    return std::log(th) + (th - 2.0) * std::log(L) + std::log(th - 1.0 + L) -
           2.0 * lt;
  }
};

struct Joe
{
  double th;
  explicit Joe(const Eigen::VectorXd& p) : th(p(0)) {}
  explicit Joe(double theta) : th(theta) {}
  // phi(t) = -log(1 - (1-t)^th)
  double gen(double t) const { return -log_one_minus_pow1m(t, th); }
  double log_gen(double t) const { return std::log(gen(t)); }
  double inv_s(double s) const
  {
    // 1 - (1 - e^{-s})^{1/th}
    double l = s > M_LN2 ? std::log1p(-std::exp(-s)) : std::log(-std::expm1(-s));
    return -std::expm1(l / th);
  }
  double inv(double ls) const { return inv_s(std::exp(ls)); }
  double log_d1(double t) const
  {
    return std::log(th) + (th - 1.0) * std::log1p(-t) - log_one_minus_pow1m(t, th);
  }
  double log_d2(double t) const
  {
    double a = std::exp(th * std::log1p(-t));
    return std::log(th) + (th - 2.0) * std::log1p(-t) +
           std::log(th - 1.0 + a) - 2.0 * log_one_minus_pow1m(t, th);
  }
};

struct BB1
{
  double th, de;
  explicit BB1(const Eigen::VectorXd& p) : th(p(0)), de(p(1)) {}
  double log_g(double t) const { return std::log(std::expm1(-th * std::log(t))); }
  double log_gen(double t) const { return de * log_g(t); }
  double inv(double ls) const
  {
    double z = ls / de;
    double l1p = z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return std::exp(-l1p / th);
  }
  double log_d1(double t) const
  {
    double lt = std::log(t);
    return std::log(de) + (de - 1.0) * log_g(t) + std::log(th) - (th + 1.0) * lt;
  }
  double log_d2(double t) const
  {
    double lt = std::log(t);
    double lg = log_g(t);
    double log_g1 = std::log(th) - (th + 1.0) * lt;
    double log_g2 = std::log(th) + std::log(th + 1.0) - (th + 2.0) * lt;
    double t2 = std::log(de) + (de - 1.0) * lg + log_g2;
    if (de <= 1.0)
      return t2;
    double t1 = std::log(de) + std::log(de - 1.0) + (de - 2.0) * lg + 2.0 * log_g1;
    return math::log_add_exp(t1, t2);
  }
};

struct BB6
{
  double th, de;
  Joe joe;
  explicit BB6(const Eigen::VectorXd& p) : th(p(0)), de(p(1)), joe(p(0)) {}
  double log_gen(double t) const { return de * std::log(joe.gen(t)); }
  double inv(double ls) const { return joe.inv_s(std::exp(ls / de)); }
  double log_d1(double t) const
  {
    return std::log(de) + (de - 1.0) * std::log(joe.gen(t)) + joe.log_d1(t);
  }
  double log_d2(double t) const
  {
    double lj = std::log(joe.gen(t));
    double l1 = joe.log_d1(t);
    double l2 = joe.log_d2(t);
    double t2 = std::log(de) + (de - 1.0) * lj + l2;
    if (de <= 1.0)
      return t2;
    double t1 = std::log(de) + std::log(de - 1.0) + (de - 2.0) * lj + 2.0 * l1;
    return math::log_add_exp(t1, t2);
  }
};

struct BB7
{
  double th, de;
  explicit BB7(const Eigen::VectorXd& p) : th(p(0)), de(p(1)) {}
  double log_gen(double t) const
  {
    double lw = log_one_minus_pow1m(t, th);
    return std::log(std::expm1(-de * lw));
  }
  double inv(double ls) const
  {
    double l1p = ls > 30.0 ? ls + std::log1p(std::exp(-ls)) : std::log1p(std::exp(ls));
    double inner = -std::expm1(-l1p / de);
    return -std::expm1(std::log(inner) / th);
  }
  double log_d1(double t) const
  {
    double lw = log_one_minus_pow1m(t, th);
    double lw1 = std::log(th) + (th - 1.0) * std::log1p(-t);
    return std::log(de) - (de + 1.0) * lw + lw1;
  }
  double log_d2(double t) const
  {
    double lw = log_one_minus_pow1m(t, th);
    double lw1 = std::log(th) + (th - 1.0) * std::log1p(-t);
    double t1 = std::log(de) + std::log(de + 1.0) - (de + 2.0) * lw + 2.0 * lw1;
    if (th <= 1.0)
      return t1;
    double t2 = std::log(de) - (de + 1.0) * lw + std::log(th) +
                std::log(th - 1.0) + (th - 2.0) * std::log1p(-t);
    return math::log_add_exp(t1, t2);
  }
};

struct BB8
{
  double th, de, log_eta;
  explicit BB8(const Eigen::VectorXd& p)
    : th(p(0))
    , de(p(1))
    , log_eta(std::log(-std::expm1(th * std::log1p(-de))))
  {}
  double log_w(double t) const
  {
    return std::log(-std::expm1(th * std::log1p(-de * t)));
  }
  double log_gen(double t) const
  {
    // phi = -log(w / eta) = -log1p((w - eta) / eta)
    double a = th * std::log1p(-de);     // log (1-de)^th
    double b = th * std::log1p(-de * t); // log (1-de t)^th
    double diff = std::exp(b) * std::expm1(a - b); // w - eta
    double phi = -std::log1p(diff / std::exp(log_eta));
    return log_diff_guard(phi);
  }
  double inv(double ls) const
  {
    double x = std::exp(log_eta - std::exp(ls));
    return -std::expm1(std::log1p(-x) / th) / de;
  }
  double log_d1(double t) const
  {
    return std::log(th) + std::log(de) + (th - 1.0) * std::log1p(-de * t) -
           log_w(t);
  }
  double log_d2(double t) const
  {
    double lw = log_w(t);
    double lw1 = std::log(th) + std::log(de) + (th - 1.0) * std::log1p(-de * t);
    double t1 = 2.0 * lw1 - 2.0 * lw;
    if (th <= 1.0)
      return t1;
    double t2 = std::log(th) + std::log(th - 1.0) + 2.0 * std::log(de) +
                (th - 2.0) * std::log1p(-de * t) - lw;
    return math::log_add_exp(t1, t2);
  }
};

template<class G>
double arch_cdf(const G& g, double u, double v)
{
  double ls = math::log_add_exp(g.log_gen(u), g.log_gen(v));
  return g.inv(ls);
}

template<class G>
double arch_log_pdf(const G& g, double u, double v)
{
  double c = arch_cdf(g, u, v);
  if (!(c > 0.0) || !(c < 1.0))
    return neg_inf;
  return g.log_d2(c) + g.log_d1(u) + g.log_d1(v) - 3.0 * g.log_d1(c);
}

template<class G>
double arch_hfunc(const G& g, double x, double c)
{
  double cdf = arch_cdf(g, c, x);
  if (!(cdf > 0.0))
    return 0.0;
  if (!(cdf < 1.0))
    return x;
  double h = std::exp(g.log_d1(c) - g.log_d1(cdf));
  if (std::isnan(h))
    return x <= 0.5 ? 0.0 : 1.0;
  return std::min(std::max(h, 0.0), 1.0);
}

template<class G>
double arch_tau(const G& g)
{
  auto integrand = [&g](double t) {
    double r = std::exp(g.log_gen(t) - g.log_d1(t));
    return std::isfinite(r) ? r : 0.0;
  };
  double integral =
    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-11);
  return 1.0 - 4.0 * integral;
}

// ---------------------------------------------------------------------------
// Elliptical and closed-form families
// ---------------------------------------------------------------------------

double gaussian_log_pdf(double rho, double u, double v)
{
  double x = math::norm_quantile(u);
  double y = math::norm_quantile(v);
  double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double student_log_pdf(double rho, double nu, double u, double v)
{
  double x = math::student_quantile(u, nu);
  double y = math::student_quantile(v, nu);
  double r2 = 1.0 - rho * rho;
  double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
  double log_f2 = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                  std::log(nu * M_PI) - 0.5 * std::log(r2) -
                  0.5 * (nu + 2.0) * std::log1p(q);
  return log_f2 - math::student_log_pdf(x, nu) - math::student_log_pdf(y, nu);
}

double clayton_log_pdf(double th, double u, double v)
{
  double lu = std::log(u), lv = std::log(v);
  double la = std::log1p(std::expm1(-th * lu) + std::expm1(-th * lv));
  return std::log1p(th) + (-1.0 - th) * (lu + lv) + (-1.0 / th - 2.0) * la;
}

double clayton_hfunc(double th, double x, double c)
{
  double lc = std::log(c), lx = std::log(x);
  double la = std::log1p(std::expm1(-th * lc) + std::expm1(-th * lx));
  return std::exp((-th - 1.0) * lc + (-1.0 / th - 1.0) * la);
}

double clayton_hinv(double th, double p, double c)
{
  double lc = std::log(c);
  double a = std::log(p) + (th + 1.0) * lc;
  double b = std::expm1(-th / (th + 1.0) * a) - std::expm1(-th * lc);
  return std::exp(-std::log1p(b) / th);
}

double frank_log_pdf(double th, double u, double v)
{
  double em = std::expm1(-th);
  double den = -em - std::expm1(-th * u) * std::expm1(-th * v);
  return std::log(th * -em) - th * (u + v) - 2.0 * std::log(std::fabs(den));
}

double frank_hfunc(double th, double x, double c)
{
  double a = std::expm1(-th * c);
  double b = std::expm1(-th * x);
  double h = std::exp(-th * c) * b / (std::expm1(-th) + a * b);
  return std::min(std::max(h, 0.0), 1.0);
}

double frank_hinv(double th, double p, double c)
{
  double a = std::exp(-th * c);
  double B = p * std::expm1(-th) / (a * (1.0 - p) + p);
  return -std::log1p(B) / th;
}

double frank_tau(double th)
{
  if (std::fabs(th) < 1e-6)
    return th / 9.0;
  auto integrand = [](double t) {
    return std::fabs(t) < 1e-12 ? 1.0 : t / std::expm1(t);
  };
  double d1 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                integrand, 0.0, th, 15, 1e-12) / th;
  return 1.0 - 4.0 / th + 4.0 * d1 / th;
}

double joe_tau(double th)
{
  using boost::math::digamma;
  if (std::fabs(th - 2.0) < 1e-6)
    return 1.0 - boost::math::trigamma(2.0);
  return 1.0 + 2.0 / (2.0 - th) * (digamma(2.0) - digamma(2.0 / th + 1.0));
}

} // namespace

double base_log_pdf(BicopFamily family, const Eigen::VectorXd& par,
                    double u, double v)
{
  switch (family) {
    case BicopFamily::indep:
      return 0.0;
    case BicopFamily::gaussian:
      return gaussian_log_pdf(par(0), u, v);
    case BicopFamily::student:
      return student_log_pdf(par(0), par(1), u, v);
    case BicopFamily::clayton:
      return clayton_log_pdf(par(0), u, v);
    case BicopFamily::frank:
      return frank_log_pdf(par(0), u, v);
    case BicopFamily::gumbel:
      return arch_log_pdf(Gumbel(par), u, v);
    case BicopFamily::joe:
      return arch_log_pdf(Joe(par), u, v);
    case BicopFamily::bb1:
      return arch_log_pdf(BB1(par), u, v);
    case BicopFamily::bb6:
      return arch_log_pdf(BB6(par), u, v);
    case BicopFamily::bb7:
      return arch_log_pdf(BB7(par), u, v);
    case BicopFamily::bb8:
      return arch_log_pdf(BB8(par), u, v);
  }
  return neg_inf;
}

double base_hfunc(BicopFamily family, const Eigen::VectorXd& par,
                  double x, double c)
{
  switch (family) {
    case BicopFamily::indep:
      return x;
    case BicopFamily::gaussian: {
      double rho = par(0);
      double a = math::norm_quantile(c);
      double b = math::norm_quantile(x);
      return math::norm_cdf((b - rho * a) / std::sqrt(1.0 - rho * rho));
    }
    case BicopFamily::student: {
      double rho = par(0), nu = par(1);
      double a = math::student_quantile(c, nu);
      double b = math::student_quantile(x, nu);
      double scale = std::sqrt((nu + a * a) * (1.0 - rho * rho) / (nu + 1.0));
      return math::student_cdf((b - rho * a) / scale, nu + 1.0);
    }
    case BicopFamily::clayton:
      return clayton_hfunc(par(0), x, c);
    case BicopFamily::frank:
      return frank_hfunc(par(0), x, c);
    case BicopFamily::gumbel:
      return arch_hfunc(Gumbel(par), x, c);
    case BicopFamily::joe:
      return arch_hfunc(Joe(par), x, c);
    case BicopFamily::bb1:
      return arch_hfunc(BB1(par), x, c);
    case BicopFamily::bb6:
      return arch_hfunc(BB6(par), x, c);
    case BicopFamily::bb7:
      return arch_hfunc(BB7(par), x, c);
    case BicopFamily::bb8:
      return arch_hfunc(BB8(par), x, c);
  }
  return NAN;
}

double base_hinv(BicopFamily family, const Eigen::VectorXd& par,
                 double p, double c)
{
  switch (family) {
    case BicopFamily::indep:
      return p;
    case BicopFamily::gaussian: {
      double rho = par(0);
      double a = math::norm_quantile(c);
      return math::norm_cdf(rho * a + std::sqrt(1.0 - rho * rho) * math::norm_quantile(p));
    }
    case BicopFamily::student: {
      double rho = par(0), nu = par(1);
      double a = math::student_quantile(c, nu);
      double scale = std::sqrt((nu + a * a) * (1.0 - rho * rho) / (nu + 1.0));
      return math::student_cdf(math::student_quantile(p, nu + 1.0) * scale + rho * a, nu);
    }
    case BicopFamily::clayton:
      return clayton_hinv(par(0), p, c);
    case BicopFamily::frank:
      return frank_hinv(par(0), p, c);
    default:
      break;
  }
  if (p <= 0.0)
    return 0.0;
  if (p >= 1.0)
    return 1.0;
  auto f = [&](double x) {
    double h = base_hfunc(family, par, x, c);
    double d = std::exp(base_log_pdf(family, par, c, x));
    return std::make_pair(h - p, d);
  };
  return math::solve_monotone(f, 0.0, 1.0, p);
}

double base_tau(BicopFamily family, const Eigen::VectorXd& par)
{
  switch (family) {
    case BicopFamily::indep:
      return 0.0;
    case BicopFamily::gaussian:
    case BicopFamily::student:
      return 2.0 / M_PI * std::asin(par(0));
    case BicopFamily::clayton:
      return par(0) / (par(0) + 2.0);
    case BicopFamily::gumbel:
      return 1.0 - 1.0 / par(0);
    case BicopFamily::frank:
      return frank_tau(par(0));
    case BicopFamily::joe:
      return joe_tau(par(0));
    case BicopFamily::bb1:
      return 1.0 - 2.0 / (par(1) * (par(0) + 2.0));
    case BicopFamily::bb6:
      return arch_tau(BB6(par));
    case BicopFamily::bb7:
      return arch_tau(BB7(par));
    case BicopFamily::bb8:
      return arch_tau(BB8(par));
  }
  return NAN;
}

} // namespace detail
} // namespace sparsevine
