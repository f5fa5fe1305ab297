#include "sparsevine/bicop.hpp"
#include "sparsevine/dvine.hpp"
#include "sparsevine/genomics.hpp"
#include "sparsevine/select.hpp"
#include "sparsevine/simbench.hpp"

#include <boost/math/distributions/normal.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <set>
#include <sstream>

using namespace sparsevine;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
  bool pass;
  std::string detail;
};

// quantile crossings seen by criteria 5-9, checked in criterion 10
long crossing_rows = 0;
long checked_rows = 0;

double pnorm(double x)
{
  return boost::math::cdf(boost::math::normal(), x);
}

void count_crossings(const DVine& m, const Eigen::MatrixXd& x)
{
  std::vector<double> lv{ 0.05, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 0.95 };
  Eigen::MatrixXd q = m.conditional_quantile(x, lv);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    ++checked_rows;
    for (Eigen::Index k = 1; k < q.cols(); ++k)
      if (q(i, k) < q(i, k - 1)) {
        ++crossing_rows;
        break;
      }
  }
}

double tau_pairs(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
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

Eigen::MatrixXd gaussian_rows(const Eigen::MatrixXd& sigma, int n, std::uint64_t seed)
{
  Eigen::MatrixXd l = sigma.llt().matrixL();
  math::Rng rng(seed, 77);
  Eigen::MatrixXd x(n, sigma.rows());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(sigma.rows());
    for (int j = 0; j < z.size(); ++j)
      z(j) = rng.normal();
    x.row(i) = (l * z).transpose();
  }
  return x;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Outcome criterion1()
{
  auto t0 = Clock::now();
  struct C
  {
    BicopFamily f;
    std::vector<double> a, b;
  };
  std::vector<C> cases = {
    { BicopFamily::indep, {}, {} },
    { BicopFamily::gaussian, { 0.3 }, { -0.8 } },
    { BicopFamily::student, { 0.4, 5 }, { -0.7, 15 } },
    { BicopFamily::clayton, { 0.8 }, { 4 } },
    { BicopFamily::gumbel, { 1.3 }, { 3 } },
    { BicopFamily::frank, { -4 }, { 8 } },
    { BicopFamily::joe, { 1.5 }, { 3.5 } },
    { BicopFamily::bb1, { 0.5, 1.5 }, { 2, 2.5 } },
    { BicopFamily::bb6, { 1.5, 1.5 }, { 2.5, 2 } },
    { BicopFamily::bb7, { 1.5, 0.8 }, { 3, 2 } },
    { BicopFamily::bb8, { 2, 0.7 }, { 4, 0.9 } },
  };
  double worst_rt = 0, lo_norm = 1e9, hi_norm = -1e9;
  int copulas = 0;
  bool ok = true;
  for (const auto& c : cases)
    for (const auto& par : { c.a, c.b }) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(par.size()));
      for (std::size_t k = 0; k < par.size(); ++k)
        p(static_cast<Eigen::Index>(k)) = par[k];
      std::vector<int> rots = is_rotatable(c.f) ? std::vector<int>{ 0, 90, 180, 270 } : std::vector<int>{ 0 };
      for (int r : rots) {
        Bicop cop(c.f, r, p);
        ++copulas;
        for (int i = 1; i <= 19; ++i)
          for (int j = 1; j <= 19; ++j) {
            double u = i / 20.0, v = j / 20.0;
            for (auto w : { Conditioning::first, Conditioning::second }) {
              double h = cop.hfunc(w, v, u);
              ok &= h >= 0 && h <= 1 && cop.pdf(u, v) >= 0;
              worst_rt = std::max(worst_rt, std::fabs(cop.hinv(w, h, u) - v));
            }
          }
        const int m = 201;
        double s = 0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            s += cop.pdf((i + 0.5) / m, (j + 0.5) / m);
        s /= m * m;
        lo_norm = std::min(lo_norm, s);
        hi_norm = std::max(hi_norm, s);
      }
    }
  double t = seconds_since(t0);
  bool pass = ok && worst_rt < 1e-6 && lo_norm >= 0.98 && hi_norm <= 1.02 && t < 60;
  return { pass, fmt("%d copulas, max roundtrip err %.2e (< 1e-6), density mass in [%.4f, %.4f] "
                     "(within [0.98, 1.02]), %.1f s (< 60 s)",
                     copulas, worst_rt, lo_norm, hi_norm, t) };
}

Outcome criterion2()
{
  const int n = 2000;
  double worst_g = 0, worst_c = 0;
  for (double rho : { 0.3, 0.6, 0.9 })
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      math::Rng rng(seed, 100);
      PairData d(n, 2);
      for (int i = 0; i < n; ++i) {
        double a = rng.normal();
        d(i, 0) = pnorm(a);
        d(i, 1) = pnorm(rho * a + std::sqrt(1 - rho * rho) * rng.normal());
      }
      double oracle = std::sin(M_PI * tau_pairs(d.col(0), d.col(1)) / 2);
      double fit = fit_mle(d, BicopFamily::gaussian, 0).parameters()(0);
      worst_g = std::max(worst_g, std::fabs(fit - oracle));
    }
  for (double th : { 1.0, 2.0 })
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      math::Rng rng(seed, 200);
      PairData d(n, 2);
      for (int i = 0; i < n; ++i) {
        // Marshall-Olkin: gamma frailty
        double g = 0;
        double shape = 1 / th;
        // gamma(shape) by the Marsaglia-Tsang method with the shape boost
        double a = shape + 1, dd = a - 1.0 / 3, cc = 1 / std::sqrt(9 * dd);
        for (;;) {
          double z = rng.normal(), v = std::pow(1 + cc * z, 3);
          if (v <= 0)
            continue;
          double u = rng.uniform();
          if (std::log(u) < 0.5 * z * z + dd - dd * v + dd * std::log(v)) {
            g = dd * v;
            break;
          }
        }
        g *= std::pow(rng.uniform(), 1 / shape);
        for (int k = 0; k < 2; ++k) {
          double e = -std::log(rng.uniform());
          d(i, k) = std::pow(1 + e / g, -1 / th);
        }
      }
      double t = tau_pairs(d.col(0), d.col(1));
      double oracle = 2 * t / (1 - t);
      double fit = fit_mle(d, BicopFamily::clayton, 0).parameters()(0);
      worst_c = std::max(worst_c, std::fabs(fit - oracle));
    }
  return { worst_g <= 0.05 && worst_c <= 0.3,
           fmt("max |rho_mle - rho_tau| %.4f (<= 0.05), max |theta_mle - theta_tau| %.4f (<= 0.3), "
               "30 + 20 fits at n=2000",
               worst_g, worst_c) };
}

Outcome criterion3()
{
  std::vector<std::vector<Bicop>> pcs = {
    { Bicop(BicopFamily::gaussian, 0, { 0.6 }), Bicop(BicopFamily::clayton, 0, { 1.5 }),
      Bicop(BicopFamily::gumbel, 180, { 1.8 }) },
    { Bicop(BicopFamily::frank, 0, { 3.0 }), Bicop(BicopFamily::bb8, 0, { 3.0, 0.8 }) },
    { Bicop(BicopFamily::student, 0, { 0.5, 4.0 }) },
  };
  math::Rng rng(9, 9);
  std::map<int, KdeMargin> margins;
  for (int v = 0; v < 4; ++v) {
    Eigen::VectorXd s(200);
    for (int i = 0; i < 200; ++i)
      s(i) = rng.normal();
    margins.emplace(v, KdeMargin(s));
  }
  DVine vine = DVine({ 0, 1, 2, 3 }, pcs, margins).truncated(2);
  double worst = 0, react = 0;
  DVine full({ 0, 1, 2, 3 }, pcs, margins);
  for (int r = 0; r < 200; ++r) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j)
      x(j) = 2 * rng.normal();
    Eigen::VectorXd y = x;
    y(3) = (r % 2 ? 1e3 : -50) * rng.uniform();
    for (double a : { 0.05, 0.25, 0.5, 0.75, 0.95 }) {
      worst = std::max(worst, std::fabs(vine.conditional_quantile(x, a) - vine.conditional_quantile(y, a)));
      react = std::max(react, std::fabs(full.conditional_quantile(x, a) - full.conditional_quantile(y, a)));
    }
  }
  return { worst <= 1e-12 && react > 1e-6,
           fmt("max change %.1e (<= 1e-12) over 200 rows x 5 levels; the untruncated vine moves by %.3g",
               worst, react) };
}

Outcome criterion4()
{
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(9, 9);
  for (int j = 1; j <= 8; ++j)
    sigma(0, j) = sigma(j, 0) = 0.25;
  Eigen::MatrixXd x = gaussian_rows(sigma, 200, 4);
  SelectionConfig cfg;
  cfg.caic_stop = false;
  cfg.max_iterations = 8;
  int res = vinereg_res(x, cfg).trace.total_fits;
  int par = vinereg_parcor(x, cfg).trace.total_fits;

  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(5, 5);
  s(0, 1) = s(1, 0) = 0.40;
  s(0, 2) = s(2, 0) = 0.70;
  s(1, 2) = s(2, 1) = 0.32;
  Eigen::MatrixXd y = gaussian_rows(s, 450, 5);
  SelectionConfig c;
  c.initial_order = { 2, 1 };
  c.max_iterations = 1;
  c.caic_stop = false;
  int b3 = vinereg_baseline(y, c).trace.iterations[0].fits;
  int r3 = vinereg_res(y, c).trace.iterations[0].fits;
  int p3 = vinereg_parcor(y, c).trace.iterations[0].fits;
  bool pass = res == 72 && par == 36 && b3 == 6 && r3 == 5 && p3 == 3;
  return { pass, fmt("p=8 exhaustion: Res %d (= 72), ParCor %d (= 36); order (0,2,1) with 2 candidates: "
                     "baseline %d / Res %d / ParCor %d (= 6 / 5 / 3)",
                     res, par, b3, r3, p3) };
}

Outcome criterion5()
{
  auto t0 = Clock::now();
  Eigen::MatrixXd s(3, 3);
  s << 1, 0.5, 0.4, 0.5, 1, 0.8, 0.4, 0.8, 1;
  int res_first = 0, par_first = 0, res_excl = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Eigen::MatrixXd x = gaussian_rows(s, 450, seed);
    auto r = vinereg_res(x);
    auto p = vinereg_parcor(x);
    res_first += r.trace.iterations.at(0).chosen == 1;
    par_first += p.trace.iterations.at(0).chosen == 1;
    res_excl += std::count(r.trace.chosen.begin(), r.trace.chosen.end(), 2) == 0;
    if (r.model.size() > 1)
      count_crossings(r.model, x);
    if (p.model.size() > 1)
      count_crossings(p.model, x);
  }
  double t = seconds_since(t0);
  bool pass = res_first >= 18 && par_first >= 18 && res_excl >= 16 && t < 120;
  return { pass, fmt("X1 first: Res %d/20, ParCor %d/20 (>= 18); Res excludes X2 %d/20 (>= 16); %.1f s (< 120 s)",
                     res_first, par_first, res_excl, t) };
}

BenchmarkResult dgp1_bench;
BenchmarkResult dgp2_bench;
double dgp1_time = 0;

void tally(const BenchmarkResult& b)
{
  for (const auto& m : b.methods)
    for (const auto& r : m.replications) {
      crossing_rows += r.crossing_rows;
      checked_rows += r.failed ? 0 : 150;
    }
}

double mean_of(const BenchmarkResult& b, Method m, const std::string& key)
{
  for (const auto& ms : b.methods)
    if (ms.method == m)
      return ms.measures.at(key).mean;
  return std::nan("");
}

int failures_of(const BenchmarkResult& b)
{
  int f = 0;
  for (const auto& ms : b.methods)
    f += ms.failures;
  return f;
}

Outcome criterion6()
{
  auto t0 = Clock::now();
  BenchmarkOptions o;
  o.methods = { Method::res, Method::parcor };
  o.replications = 20;
  o.case_id = 1;
  dgp1_bench = run_benchmark(dgp_case(Dgp::dgp1, 1), o);
  dgp1_time = seconds_since(t0);
  tally(dgp1_bench);
  double tpr = mean_of(dgp1_bench, Method::res, "tpr");
  double fdr = mean_of(dgp1_bench, Method::res, "fdr");
  double ch = mean_of(dgp1_bench, Method::res, "chosen");
  double ptpr = mean_of(dgp1_bench, Method::parcor, "tpr");
  bool pass = tpr >= 0.65 && tpr <= 0.95 && fdr <= 0.20 && ch >= 3.0 && ch <= 6.5 && ptpr >= 0.50 &&
              ptpr <= 0.85 && dgp1_time < 1800 && failures_of(dgp1_bench) == 0;
  return { pass, fmt("Res TPR %.3f ([0.65, 0.95]), FDR %.3f (<= 0.20), chosen %.2f ([3.0, 6.5]); "
                     "ParCor TPR %.3f ([0.50, 0.85]); %d failed reps; %.0f s (< 1800 s)",
                     tpr, fdr, ch, ptpr, failures_of(dgp1_bench), dgp1_time) };
}

Outcome criterion7()
{
  if (dgp1_bench.methods.empty()) {
    BenchmarkOptions o;
    o.methods = { Method::res };
    o.replications = 20;
    o.case_id = 1;
    dgp1_bench = run_benchmark(dgp_case(Dgp::dgp1, 1), o);
    tally(dgp1_bench);
  }
  BenchmarkOptions o;
  o.methods = { Method::res };
  o.replications = 20;
  o.case_id = 1;
  dgp2_bench = run_benchmark(dgp_case(Dgp::dgp2, 1), o);
  tally(dgp2_bench);
  double p05 = mean_of(dgp1_bench, Method::res, "pl_0.05");
  double p50 = mean_of(dgp1_bench, Method::res, "pl_0.50");
  double d2 = mean_of(dgp2_bench, Method::res, "pl_0.50");
  bool pass = p05 >= 0.15 && p05 <= 0.30 && p50 >= 0.60 && p50 <= 1.00 && d2 >= 1.6 && d2 <= 2.1 &&
              failures_of(dgp2_bench) == 0;
  return { pass, fmt("DGP1 case 1 Res PL0.05 %.3f ([0.15, 0.30]), PL0.50 %.3f ([0.60, 1.00]); "
                     "DGP2 case 1 Res PL0.50 %.3f ([1.6, 2.1])",
                     p05, p50, d2) };
}

Outcome criterion8()
{
  auto t0 = Clock::now();
  DGPConfig cfg = dgp_case(Dgp::dgp2, 3);
  DGPSample s = gen_dgp(cfg);
  BenchmarkOptions o;
  o.case_id = 3;
  MetricsReport r = evaluate_method(s, Method::res, o);
  double t = seconds_since(t0);
  crossing_rows += r.crossing_rows;
  checked_rows += r.failed ? 0 : s.test.rows();
  int cap = cfg.p * (cfg.p + 1);
  bool pass = !r.failed && t < 600 && r.fits <= cap;
  return { pass, fmt("p=100, n=300 train: %.1f s (< 600 s), %d pair-copula fits (<= %d), %d chosen%s", t,
                     r.fits, cap, r.chosen_count, r.failed ? (", failed: " + r.error).c_str() : "") };
}

Outcome criterion9()
{
  // frequency filter example: 300 zeros and 14 twos
  SnpMatrix ex;
  ex.values.resize(314, 3);
  math::Rng rng(14);
  for (int i = 0; i < 314; ++i) {
    ex.values(i, 0) = rng.uniform() < 0.5 ? 2 : 0;
    ex.values(i, 1) = i < 14 ? 2 : 0;
    ex.values(i, 2) = rng.uniform() < 0.3 ? 2 : 0;
  }
  ex.column_ids = { "a", "b", "c" };
  SnpMatrix none{ ByteMatrix(0, 3), ex.column_ids, {} };
  auto pre = preprocess(ex, none);
  bool filter_ok = pre.kept == std::vector<int>{ 0, 2 } && pre.dropped_rare == 1;

  int min_planted = 1 << 30, first = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PlantedSnpData d = simulate_planted_snps(500, 2000, 100, seed);
    auto pp = preprocess(d.snps, SnpMatrix{ ByteMatrix(0, d.snps.cols()), d.snps.column_ids, {} });
    ScreenResult sr = screen(d.y, pp.train);
    FeatureSet fs = extract_features(sr, pp.train, 100);
    std::set<std::string> causal;
    for (int c : d.causal)
      causal.insert(d.snps.column_ids[c]);
    int planted = 0;
    for (int c : fs.members.at(0))
      planted += causal.count(pp.train.column_ids[c]);
    min_planted = std::min(min_planted, planted);
    Eigen::MatrixXd x(d.y.size(), fs.features.cols() + 1);
    x << d.y, fs.features;
    auto r = vinereg_res(x);
    first += !r.trace.iterations.empty() && r.trace.iterations[0].chosen == 1 && r.trace.iterations[0].accepted;
    if (r.model.size() > 1)
      count_crossings(r.model, x);
  }
  bool pass = filter_ok && min_planted >= 90 && first >= 8;
  return { pass, fmt("planted SNPs in the first feature: min %d over 10 seeds (>= 90); Res picks it first "
                     "%d/10 (>= 8); 14/314 column dropped alone: %s",
                     min_planted, first, filter_ok ? "yes" : "no") };
}

Outcome criterion10()
{
  return { crossing_rows == 0 && checked_rows > 0,
           fmt("%ld crossing rows among %ld predicted rows from criteria 5-9", crossing_rows, checked_rows) };
}

} // namespace

int main(int argc, char** argv)
{
  std::set<int> only;
  bool strict = false;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--strict") == 0)
      strict = true;
    else
      only.insert(std::atoi(argv[k]));
  }
  std::vector<std::pair<int, Outcome (*)()>> all = {
    { 1, criterion1 }, { 2, criterion2 }, { 3, criterion3 }, { 4, criterion4 }, { 5, criterion5 },
    { 6, criterion6 }, { 7, criterion7 }, { 8, criterion8 }, { 9, criterion9 }, { 10, criterion10 },
  };
  int passed = 0, run = 0;
  for (auto [id, fn] : all) {
    if (!only.empty() && !only.count(id))
      continue;
    ++run;
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = { false, std::string("error: ") + e.what() };
    }
    passed += o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail
              << fmt(" [%.0f s]", seconds_since(t0)) << std::endl;
  }
  std::cout << passed << "/" << run << " criteria passed" << std::endl;
  return strict && passed != run ? 1 : 0;
}
