#pragma once

#include "sparsevine/bicop.hpp"
#include "sparsevine/margins.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparsevine {

//! Conditional pseudo-observations of the training data for one D-vine.
//!
//! For position i in the order, right[i][t] holds F(x_i | x_{i+1}, ..., x_{i+t})
//! and left[i][t] holds F(x_i | x_{i-t}, ..., x_{i-1}). `cll` is the
//! conditional log-likelihood of the response accumulated so far.
struct DVineFitCache
{
  std::vector<std::vector<Eigen::VectorXd>> right;
  std::vector<std::vector<Eigen::VectorXd>> left;
  double cll = 0.0;
};

//! D-vine with the response at the first position of the path.
//!
//! Data passed to the evaluation methods is indexed by variable id: column
//! (or entry) v holds variable v, and variable ids are the entries of
//! `order()`. Pair copula (t, e) joins positions e and e + t + 1, conditioned
//! on the positions in between.
class DVine
{
public:
  //! Response-only model.
  explicit DVine(int response = 0);

  DVine(std::vector<int> order,
        std::vector<std::vector<Bicop>> pair_copulas,
        std::map<int, KdeMargin> margins = {},
        std::optional<int> truncation = std::nullopt);

  const std::vector<int>& order() const { return order_; }
  int response() const { return order_.front(); }
  int size() const { return static_cast<int>(order_.size()); }
  //! Largest variable id in the order.
  int max_variable() const;

  const std::vector<std::vector<Bicop>>& pair_copulas() const { return pcs_; }
  //! Copula in tree t (0-based) on edge e; Independence above the truncation.
  const Bicop& pair_copula(int tree, int edge) const;

  std::optional<int> truncation() const { return truncation_; }
  //! Copy with all trees above level t set to Independence.
  DVine truncated(int t) const;

  const std::map<int, KdeMargin>& margins() const { return margins_; }
  const KdeMargin& margin(int var) const;
  void set_margin(int var, KdeMargin m);

  const std::vector<std::string>& variable_names() const { return names_; }
  void set_variable_names(std::vector<std::string> names);

  //! Parameter count over all non-Independence pair copulas.
  int dof() const;

  //! Computes the fit cache for `u` (columns indexed by variable id).
  DVineFitCache build_cache(const Eigen::MatrixXd& u) const;

  //! Sum over rows of the log conditional copula density of the response.
  double conditional_loglik(const Eigen::MatrixXd& u) const;

  //! Conditional quantile on the copula scale; `u_row` indexed by variable.
  double conditional_quantile_u(const Eigen::VectorXd& u_row, double alpha) const;
  Eigen::VectorXd conditional_quantile_u(const Eigen::MatrixXd& u, double alpha) const;
  //! F(u_response | explanatory) on the copula scale.
  double conditional_cdf_u(const Eigen::VectorXd& u_row) const;

  //! Quantile of the response given raw explanatory values. Entries of
  //! `x_row` that are not explanatory variables are ignored.
  double conditional_quantile(const Eigen::VectorXd& x_row, double alpha) const;
  //! n x levels matrix of predictions.
  Eigen::MatrixXd conditional_quantile(const Eigen::MatrixXd& x,
                                       const std::vector<double>& alphas,
                                       int threads = 1) const;
  //! Conditional CDF at the raw response value stored in x_row(response()).
  double conditional_cdf(const Eigen::VectorXd& x_row) const;

  //! Pseudo-observations of raw data through the stored margins.
  Eigen::MatrixXd pit(const Eigen::MatrixXd& x) const;

  nlohmann::json to_json() const;
  static DVine from_json(const nlohmann::json& j);

  std::string str() const;

private:
  void check() const;
  //! Forward pass among explanatory positions: returns F(x_k | x_1..x_{k-1})
  //! for k = 1, ..., m - 1 (index 0 unused).
  std::vector<double> explanatory_conditionals(const Eigen::VectorXd& u_row) const;

  std::vector<int> order_;
  std::vector<std::vector<Bicop>> pcs_;
  std::map<int, KdeMargin> margins_;
  std::optional<int> truncation_;
  std::vector<std::string> names_;
};

//! Appends `new_var` to the order. Fits exactly one pair copula per tree on
//! the new rightmost diagonal (none above a truncation level); previously
//! fitted copulas are copied unchanged. `fits` is incremented by the number
//! of copulas fitted.
std::pair<DVine, DVineFitCache> extend_fit(const DVine& model,
                                           const DVineFitCache& cache,
                                           const Eigen::MatrixXd& u,
                                           int new_var,
                                           Criterion crit = Criterion::aic,
                                           int* fits = nullptr);

DVine extend_fit(const DVine& model,
                 const Eigen::MatrixXd& u,
                 int new_var,
                 Criterion crit = Criterion::aic,
                 int* fits = nullptr);

} // namespace sparsevine
