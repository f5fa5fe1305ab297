#pragma once

#include "sparsevine/select.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparsevine {

enum class Dgp
{
  dgp1,
  dgp2
};

struct DGPConfig
{
  Dgp dgp = Dgp::dgp1;
  int p = 10;
  int n = 450;
  int n_train = 300;
  double sigma = 1.0;
  //! Toeplitz base of the correlated block
  double rho = 0.75;
  std::uint64_t seed = 1;
};

//! p for the benchmark cases: DGP1 cases 1-3 (10, 20, 50), DGP2 cases 1-4
//! (20, 40, 100, 1000).
int dgp_case_p(Dgp dgp, int case_id);
DGPConfig dgp_case(Dgp dgp, int case_id);

struct DGPSample
{
  //! column 0 is the response, column j the j-th explanatory variable
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
  std::vector<int> relevant;
  std::vector<int> irrelevant;
  std::vector<int> redundant;
};

//! Lower Cholesky factor of Σ_ab = rho^|a-b|.
Eigen::MatrixXd toeplitz_cholesky(int p, double rho);

//! Y = X1 X2^2 sqrt(|X3| + 0.1) + exp(0.4 X4 X5) + sigma eps. X1..X5 are
//! Toeplitz-correlated, the rest iid standard normal.
DGPSample gen_dgp1(const DGPConfig& cfg);

//! Y = sqrt(|5 X1 - 2 X9 + 0.5|) + X8 (1 - 4 X3) + exp(X6) + 2 X10^3 + X4^3
//!     + (X7 + 1) log(|X2 + X5| + 0.01) + sigma eps, all X Toeplitz-correlated.
//! `chol` may hold a precomputed toeplitz_cholesky(p, rho).
DGPSample gen_dgp2(const DGPConfig& cfg, const Eigen::MatrixXd* chol = nullptr);

DGPSample gen_dgp(const DGPConfig& cfg, const Eigen::MatrixXd* chol = nullptr);

struct Rates
{
  double tpr = 0.0;
  double fdr = 0.0;
};

Rates tpr_fdr(const std::vector<int>& chosen,
              const std::vector<int>& relevant,
              const std::vector<int>& irrelevant);

//! mean of (yhat - y) * (1{y <= yhat} - alpha)
double pinball(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha);

struct MetricsReport
{
  bool failed = false;
  std::string error;
  double tpr = 0.0;
  double fdr = 0.0;
  int chosen_count = 0;
  std::vector<int> chosen;
  std::map<double, double> pinball;
  double wall_time = 0.0;
  int fits = 0;
  //! rows whose predicted quantiles decrease in alpha
  int crossing_rows = 0;
};

struct Aggregate
{
  double mean = 0.0;
  double se = 0.0;
};

struct MethodSummary
{
  Method method = Method::res;
  std::vector<MetricsReport> replications;
  //! keyed by measure: tpr, fdr, chosen, pl_0.05, pl_0.50, pl_0.95, time
  std::map<std::string, Aggregate> measures;
  int failures = 0;
};

struct BenchmarkResult
{
  DGPConfig config;
  int case_id = 0;
  int replications = 0;
  std::vector<MethodSummary> methods;

  //! method,dgp,case,measure,mean,se
  std::string to_csv() const;
  nlohmann::json to_json() const;
  //! Human-readable summary table.
  std::string summary() const;
};

struct BenchmarkOptions
{
  std::vector<Method> methods{ Method::res, Method::parcor };
  int replications = 1;
  std::vector<double> levels{ 0.05, 0.50, 0.95 };
  Criterion criterion = Criterion::aic;
  double pseudo_quantile = 0.5;
  DofScope dof_scope = DofScope::all;
  int threads = 1;
  int case_id = 0;
  std::function<void(int rep, Method m, const MetricsReport&)> on_replication;
};

//! Mean and standard error (sd / sqrt(count)) of the values.
Aggregate aggregate(const std::vector<double>& values);

//! Replication r uses seed cfg.seed + r.
BenchmarkResult run_benchmark(const DGPConfig& cfg, const BenchmarkOptions& opts);

//! Fits one method on a sample and evaluates it on the test split.
MetricsReport evaluate_method(const DGPSample& sample,
                              Method method,
                              const BenchmarkOptions& opts);

} // namespace sparsevine
