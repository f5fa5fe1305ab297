#include "doctest.h"
#include "helpers.hpp"

#include "sparsevine/margins.hpp"

#include <algorithm>

using namespace sparsevine;
using namespace testutil;

namespace {

Eigen::VectorXd normal_draws(int n, std::uint64_t seed)
{
  math::Rng rng(seed, 3);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i)
    x(i) = rng.normal();
  return x;
}

double ecdf(const Eigen::VectorXd& x, double t)
{
  return static_cast<double>((x.array() <= t).count()) / x.size();
}

} // namespace

TEST_CASE("silverman bandwidth")
{
  Eigen::VectorXd x = normal_draws(500, 2);
  std::vector<double> s(x.data(), x.data() + x.size());
  std::sort(s.begin(), s.end());
  auto q = [&](double p) {
    double h = (s.size() - 1) * p;
    auto lo = static_cast<std::size_t>(h);
    return s[lo] + (h - lo) * (s[std::min(lo + 1, s.size() - 1)] - s[lo]);
  };
  double mean = x.mean();
  double sd = std::sqrt((x.array() - mean).square().sum() / (x.size() - 1));
  double iqr = q(0.75) - q(0.25);
  double oracle = 1.06 * std::min(sd, iqr / 1.34) * std::pow(500.0, -0.2);
  KdeMargin m(x);
  CHECK(m.bandwidth() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(m.bandwidth() > 0);
}

TEST_CASE("kde cdf matches the empirical and normal cdf")
{
  Eigen::VectorXd x = normal_draws(1000, 1);
  KdeMargin m(x);
  CHECK(m.cdf(0.0) >= 0.47);
  CHECK(m.cdf(0.0) <= 0.53);
  CHECK(std::fabs(m.cdf(0.0) - ecdf(x, 0.0)) < 0.03);

  // direct kernel average oracle
  double h = m.bandwidth();
  for (double t : { -1.5, 0.2, 2.0 }) {
    double s = 0;
    for (int i = 0; i < x.size(); ++i)
      s += pnorm((t - x(i)) / h);
    CHECK(m.cdf(t) == doctest::Approx(s / x.size()).epsilon(1e-12));
  }

  KdeMargin big(normal_draws(2000, 5));
  double worst = 0;
  for (int k = 1; k <= 41; ++k) {
    double t = -3.0 + 6.0 * k / 42.0;
    worst = std::max(worst, std::fabs(big.pit(t) - pnorm(t)));
  }
  CHECK(worst < 0.03);
}

TEST_CASE("degenerate input")
{
  CHECK_THROWS_AS(KdeMargin(Eigen::VectorXd::Constant(50, 2.0)), InvalidInput);
  CHECK_THROWS_AS(KdeMargin(Eigen::VectorXd::LinSpaced(5, 0, 1)), InvalidInput);
  Eigen::VectorXd bad = Eigen::VectorXd::LinSpaced(20, 0, 1);
  bad(4) = std::nan("");
  CHECK_THROWS_AS(KdeMargin{ bad }, InvalidInput);
}

TEST_CASE("pit clamping and tails")
{
  Eigen::VectorXd x = normal_draws(300, 4);
  KdeMargin m(x);
  double lo = x.minCoeff() - 10 * m.bandwidth();
  double hi = x.maxCoeff() + 10 * m.bandwidth();
  CHECK(m.pit(lo) <= 0.01);
  CHECK(m.pit(lo) >= 1e-10);
  CHECK(m.pit(hi) >= 0.99);
  CHECK(m.pit(hi) <= 1 - 1e-10);
  CHECK(m.pit(std::numeric_limits<double>::infinity()) == 1 - 1e-10);
  CHECK(m.pit(-std::numeric_limits<double>::infinity()) == 1e-10);

  Eigen::VectorXd sym(201);
  for (int i = 0; i < 201; ++i)
    sym(i) = std::sin((i - 100) / 60.0);
  KdeMargin s(sym);
  CHECK(std::fabs(s.pit(0.0) - 0.5) < 0.05);
  CHECK(std::fabs(s.quantile(0.5)) < 0.02);
}

TEST_CASE("quantile inverts the cdf")
{
  Eigen::VectorXd x(100);
  for (int i = 0; i < 100; ++i)
    x(i) = (i % 3) - 1.0 + 0.01 * i;
  KdeMargin m(x);
  double scale = std::max(1.0, x.maxCoeff() - x.minCoeff());
  for (double v = -0.9; v < 1.9; v += 0.1)
    CHECK(std::fabs(m.quantile(m.cdf(v)) - v) < 1e-6 * scale);
  double prev = -1e300;
  for (int k = 1; k < 100; ++k) {
    double p = k / 100.0;
    double q = m.quantile(p);
    CHECK(q >= prev);
    CHECK(m.cdf(q) == doctest::Approx(p).epsilon(1e-8));
    prev = q;
  }
  CHECK(std::isfinite(m.quantile(1e-10)));
  CHECK(std::isfinite(m.quantile(1 - 1e-10)));
}

TEST_CASE("grid and density")
{
  KdeMargin m(normal_draws(400, 9));
  const auto& g = m.support_grid();
  const auto& f = m.cdf_grid();
  REQUIRE(g.size() == f.size());
  CHECK(f.front() < 0.01);
  CHECK(f.back() > 0.99);
  for (std::size_t i = 1; i < f.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(f[i] > f[i - 1]);
  }
  double s = 0, a = g.front() - 2, b = g.back() + 2;
  int n = 4000;
  for (int i = 0; i < n; ++i)
    s += m.pdf(a + (i + 0.5) * (b - a) / n);
  CHECK(s * (b - a) / n == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(m.log_pdf(0.3) == doctest::Approx(std::log(m.pdf(0.3))));
  CHECK(std::isfinite(m.log_pdf(1e6)));

  KdeMargin r(m.sample(), m.bandwidth());
  CHECK(r.cdf(0.7) == m.cdf(0.7));
  CHECK(r.quantile(0.3) == m.quantile(0.3));
}
