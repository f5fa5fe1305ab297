#pragma once

#include "sparsevine/bicop.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sparsevine {

using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

//! Genotype matrix with entries in {0, 2}; rows are lines, columns SNPs.
struct SnpMatrix
{
  ByteMatrix values;
  std::vector<std::string> column_ids;
  std::vector<std::string> row_ids;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  //! Throws InvalidInput naming the first entry outside {0, 2}.
  void validate() const;
  SnpMatrix select_columns(const std::vector<int>& cols) const;
  SnpMatrix select_rows(const std::vector<int>& rows) const;
};

struct PreprocessResult
{
  SnpMatrix train;
  SnpMatrix test;
  //! retained column indices of the input
  std::vector<int> kept;
  int dropped_duplicates = 0;
  int dropped_rare = 0;
};

//! Drops exact duplicate columns (first one kept) and columns whose minor
//! category frequency in `train` is below `freq_threshold`. Decisions use
//! `train` only; `test` loses the same columns.
PreprocessResult preprocess(const SnpMatrix& train,
                            const SnpMatrix& test,
                            double freq_threshold = 0.05);

struct SnpStat
{
  int column = 0;
  double intercept = 0.0;
  double slope = 0.0;
  double se = 0.0;
  double pvalue = 1.0;
};

struct ScreenResult
{
  //! one entry per column
  std::vector<SnpStat> stats;
  //! columns with p-value below the cut, by p-value then column index
  std::vector<int> ordered;
};

//! Per-SNP least squares of y on (1, snp) with a two-sided normal Wald test.
ScreenResult screen(const Eigen::VectorXd& y,
                    const SnpMatrix& snps,
                    double p_cut = 0.10,
                    int threads = 1);

struct FeatureSet
{
  Eigen::MatrixXd features;
  std::vector<std::string> names;
  //! per feature: SNP columns and slope weights
  std::vector<std::vector<int>> members;
  std::vector<std::vector<double>> weights;
  std::vector<std::pair<double, double>> pvalue_range;
  int grouping = 0;

  nlohmann::json manifest(const SnpMatrix& snps) const;
  std::string to_csv() const;
};

//! Blocks of G consecutive screened SNPs; feature = sum of slope * SNP.
FeatureSet extract_features(const ScreenResult& screen, const SnpMatrix& snps, int grouping);

struct BivariateSummary
{
  int feature = 0;
  Bicop copula;
  double tau = 0.0;
  double aic = 0.0;
  bool irrelevant_candidate = false;
};

//! Two-node D-vine (kernel margins, family selection) per feature.
std::vector<BivariateSummary> bivariate_analysis(const Eigen::VectorXd& y,
                                                 const FeatureSet& features,
                                                 Criterion crit = Criterion::aic);

//! CSV with a header of SNP ids; a first column named "id" holds row ids.
SnpMatrix read_snp_csv(const std::string& path);
//! "SVM1", u32 n, u32 P, then P columns of n bytes (little endian).
SnpMatrix read_snp_binary(const std::string& path);
void write_snp_binary(const SnpMatrix& snps, const std::string& path);
void write_snp_csv(const SnpMatrix& snps, const std::string& path);
//! Dispatches on the magic bytes.
SnpMatrix read_snp_matrix(const std::string& path);

struct PlantedSnpData
{
  SnpMatrix snps;
  Eigen::VectorXd y;
  std::vector<int> causal;
};

//! Synthetic genotypes where `n_causal` SNPs in linkage with a common
//! haplotype drive the response; the other SNPs are independent noise.
PlantedSnpData simulate_planted_snps(int n, int n_snps, int n_causal, std::uint64_t seed);

} // namespace sparsevine
