#pragma once

#include "sparsevine/dvine.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sparsevine {

//! Φ⁻¹(rank / (n + 1)) for each column, ties get their average rank.
Eigen::MatrixXd normal_scores(const Eigen::MatrixXd& data);

//! Partial correlation of columns a and b of `z` given the columns in
//! `given`. Uses the inverse correlation submatrix; when that matrix has a
//! condition number above 1e12, correlates least-squares residuals instead.
//! Throws NumericalError when the residuals are degenerate.
double partial_correlation(const Eigen::MatrixXd& z,
                           int a,
                           int b,
                           const std::vector<int>& given);

//! Same, reusing a precomputed correlation matrix of the columns of `z`.
double partial_correlation(const Eigen::MatrixXd& z,
                           const Eigen::MatrixXd& corr,
                           int a,
                           int b,
                           const std::vector<int>& given);

enum class Method
{
  res,
  parcor,
  baseline
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class StopReason
{
  aic_worsened,
  all_variables,
  iteration_cap
};

std::string stop_reason_name(StopReason r);

struct IterationRecord
{
  int iteration = 0;
  //! (candidate variable, score), candidates in increasing order
  std::vector<std::pair<int, double>> scores;
  int chosen = -1;
  double score = 0.0;
  double caic = 0.0;
  int dof = 0;
  //! pair copulas fitted in this iteration (scoring + extension)
  int fits = 0;
  int cumulative_fits = 0;
  bool accepted = false;
};

//! Which pair copulas count toward the degrees of freedom of the cAIC.
enum class DofScope
{
  //! every non-Independence pair copula
  all,
  //! only the copulas joining the response (first edge of each tree)
  response
};

struct SelectionConfig
{
  Method method = Method::res;
  Criterion criterion = Criterion::aic;
  //! quantile level of the pseudo-response update (Res only)
  double pseudo_quantile = 0.5;
  //! defaults to min(p, n / 10)
  std::optional<int> max_iterations;
  int threads = 1;
  //! stop when the conditional AIC does not strictly improve
  bool caic_stop = true;
  DofScope dof_scope = DofScope::all;
  //! variables appended before the first iteration, in this order
  std::vector<int> initial_order;
  std::vector<std::string> variable_names;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct SelectionTrace
{
  Method method = Method::res;
  double initial_caic = 0.0;
  std::vector<IterationRecord> iterations;
  std::vector<int> chosen;
  StopReason stop_reason = StopReason::all_variables;
  int total_fits = 0;
  //! fits spent on `initial_order`, not part of total_fits
  int setup_fits = 0;

  nlohmann::json to_json() const;
};

//! Iteration, chosen variable, score, cAIC and cumulative fit count.
std::string format_log_line(const IterationRecord& rec);

struct SelectionResult
{
  DVine model;
  SelectionTrace trace;
};

//! Column 0 of `data` is the response, columns 1..p the candidates.
SelectionResult vinereg_res(const Eigen::MatrixXd& data, SelectionConfig config = {});
SelectionResult vinereg_parcor(const Eigen::MatrixXd& data, SelectionConfig config = {});
SelectionResult vinereg_baseline(const Eigen::MatrixXd& data, SelectionConfig config = {});
//! Dispatches on config.method.
SelectionResult vinereg(const Eigen::MatrixXd& data, const SelectionConfig& config);

//! -2 * sum(conditional loglik + log f_Y(y)) + 2 * dof on raw data.
double caic(const DVine& model, const Eigen::MatrixXd& data);

} // namespace sparsevine
