#include "sparsevine/genomics.hpp"
#include "sparsevine/margins.hpp"
#include "sparsevine/parallel.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace sparsevine {

void SnpMatrix::validate() const
{
  if (static_cast<Eigen::Index>(column_ids.size()) != cols())
    throw InvalidInput("SNP matrix: column id count does not match");
  if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != rows())
    throw InvalidInput("SNP matrix: row id count does not match");
  for (Eigen::Index j = 0; j < cols(); ++j)
    for (Eigen::Index i = 0; i < rows(); ++i) {
      auto v = values(i, j);
      if (v != 0 && v != 2)
        throw InvalidInput("SNP value " + std::to_string(v) + " at row " +
                           std::to_string(i + 1) + ", column " + column_ids[j] +
                           " is not 0 or 2");
    }
}

SnpMatrix SnpMatrix::select_columns(const std::vector<int>& cols) const
{
  SnpMatrix out;
  out.values.resize(rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(cols[k]);
    out.column_ids.push_back(column_ids[cols[k]]);
  }
  out.row_ids = row_ids;
  return out;
}

SnpMatrix SnpMatrix::select_rows(const std::vector<int>& rws) const
{
  SnpMatrix out;
  out.values.resize(static_cast<Eigen::Index>(rws.size()), cols());
  for (std::size_t k = 0; k < rws.size(); ++k) {
    out.values.row(static_cast<Eigen::Index>(k)) = values.row(rws[k]);
    if (!row_ids.empty())
      out.row_ids.push_back(row_ids[rws[k]]);
  }
  out.column_ids = column_ids;
  return out;
}

PreprocessResult preprocess(const SnpMatrix& train,
                            const SnpMatrix& test,
                            double freq_threshold)
{
  if (test.cols() != train.cols() && test.cols() != 0)
    throw InvalidInput("train and test SNP matrices have different columns");
  if (train.rows() == 0)
    throw InvalidInput("empty training SNP matrix");
  if (!(freq_threshold >= 0.0 && freq_threshold < 1.0))
    throw InvalidInput("frequency threshold must lie in [0, 1)");
  PreprocessResult res;
  const auto n = train.rows();
  std::unordered_map<std::string, std::vector<int>> seen;
  std::string key(static_cast<std::size_t>(n), '\0');
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    std::memcpy(key.data(), train.values.col(j).data(), static_cast<std::size_t>(n));
    auto& bucket = seen[key];
    bool duplicate = !bucket.empty();
    bucket.push_back(static_cast<int>(j));
    if (duplicate) {
      ++res.dropped_duplicates;
      continue;
    }
    Eigen::Index twos = (train.values.col(j).array() == 2).count();
    double minor = static_cast<double>(std::min(twos, n - twos)) / static_cast<double>(n);
    if (minor < freq_threshold) {
      ++res.dropped_rare;
      continue;
    }
    res.kept.push_back(static_cast<int>(j));
  }
  if (res.kept.empty())
    throw InvalidInput("no SNP columns left after preprocessing");
  res.train = train.select_columns(res.kept);
  res.test = test.cols() == 0 ? test : test.select_columns(res.kept);
  return res;
}

ScreenResult screen(const Eigen::VectorXd& y, const SnpMatrix& snps, double p_cut, int threads)
{
  const auto n = snps.rows();
  if (n < 10)
    throw InvalidInput("screening needs at least 10 observations");
  if (y.size() != n)
    throw InvalidInput("response length does not match the SNP matrix");
  ScreenResult res;
  res.stats.resize(static_cast<std::size_t>(snps.cols()));
  const double ybar = y.mean();
  const double syy = (y.array() - ybar).square().sum();
  parallel_for(static_cast<int>(snps.cols()), threads, [&](int j) {
    Eigen::VectorXd x = snps.values.col(j).cast<double>();
    double xbar = x.mean();
    double sxx = (x.array() - xbar).square().sum();
    if (!(sxx > 0.0))
      throw InvalidInput("SNP column " + snps.column_ids[j] + " is constant");
    double sxy = ((x.array() - xbar) * (y.array() - ybar)).sum();
    SnpStat& s = res.stats[j];
    s.column = j;
    s.slope = sxy / sxx;
    s.intercept = ybar - s.slope * xbar;
    double rss = std::max(0.0, syy - s.slope * sxy);
    s.se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    if (s.se > 0.0)
      s.pvalue = std::erfc(std::fabs(s.slope / s.se) / std::sqrt(2.0));
    else
      s.pvalue = s.slope != 0.0 ? 0.0 : 1.0;
  });
  for (const auto& s : res.stats)
    if (s.pvalue < p_cut)
      res.ordered.push_back(s.column);
  std::stable_sort(res.ordered.begin(), res.ordered.end(), [&](int a, int b) {
    return res.stats[a].pvalue < res.stats[b].pvalue;
  });
  return res;
}

FeatureSet extract_features(const ScreenResult& scr, const SnpMatrix& snps, int grouping)
{
  if (grouping <= 0)
    throw InvalidInput("grouping size must be positive");
  if (scr.ordered.empty())
    throw InvalidInput("no screened SNPs to group");
  const int m = static_cast<int>(scr.ordered.size());
  const int k = (m + grouping - 1) / grouping;
  FeatureSet fs;
  fs.grouping = grouping;
  fs.features = Eigen::MatrixXd::Zero(snps.rows(), k);
  for (int d = 0; d < k; ++d) {
    std::vector<int> cols;
    std::vector<double> w;
    double pmin = 1.0, pmax = 0.0;
    for (int r = d * grouping; r < std::min(m, (d + 1) * grouping); ++r) {
      int c = scr.ordered[r];
      if (c >= snps.cols())
        throw InvalidInput("screen result does not match the SNP matrix");
      const SnpStat& s = scr.stats[c];
      cols.push_back(c);
      w.push_back(s.slope);
      pmin = std::min(pmin, s.pvalue);
      pmax = std::max(pmax, s.pvalue);
      fs.features.col(d) += s.slope * snps.values.col(c).cast<double>();
    }
    fs.members.push_back(cols);
    fs.weights.push_back(w);
    fs.pvalue_range.emplace_back(pmin, pmax);
    fs.names.push_back("feature" + std::to_string(d + 1));
  }
  return fs;
}

nlohmann::json FeatureSet::manifest(const SnpMatrix& snps) const
{
  using nlohmann::json;
  json feats = json::array();
  for (std::size_t d = 0; d < members.size(); ++d) {
    std::vector<std::string> ids;
    for (int c : members[d])
      ids.push_back(snps.column_ids[c]);
    feats.push_back({ { "name", names[d] },
                      { "snps", ids },
                      { "weights", weights[d] },
                      { "pvalue_min", pvalue_range[d].first },
                      { "pvalue_max", pvalue_range[d].second } });
  }
  return { { "grouping", grouping }, { "n_features", members.size() }, { "features", feats } };
}

std::string FeatureSet::to_csv() const
{
  std::ostringstream os;
  os.precision(17);
  for (std::size_t d = 0; d < names.size(); ++d)
    os << (d ? "," : "") << names[d];
  os << "\n";
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index d = 0; d < features.cols(); ++d)
      os << (d ? "," : "") << features(i, d);
    os << "\n";
  }
  return os.str();
}

std::vector<BivariateSummary> bivariate_analysis(const Eigen::VectorXd& y,
                                                 const FeatureSet& fs,
                                                 Criterion crit)
{
  if (y.size() < 10)
    throw InvalidInput("bivariate analysis needs at least 10 observations");
  if (fs.features.rows() != y.size())
    throw InvalidInput("feature rows do not match the response");
  KdeMargin my(y);
  Eigen::VectorXd v = my.pit(y);
  std::vector<BivariateSummary> out;
  for (Eigen::Index d = 0; d < fs.features.cols(); ++d) {
    KdeMargin mx(Eigen::VectorXd(fs.features.col(d)));
    PairData pd(y.size(), 2);
    pd.col(0) = v;
    pd.col(1) = mx.pit(Eigen::VectorXd(fs.features.col(d)));
    BivariateSummary s;
    s.feature = static_cast<int>(d);
    s.copula = select_family(pd, crit);
    s.tau = s.copula.tau();
    s.aic = s.copula.aic();
    s.irrelevant_candidate = s.copula.family() == BicopFamily::indep;
    out.push_back(s);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    while (!cell.empty() && cell.front() == ' ')
      cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

} // namespace

SnpMatrix read_snp_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidInput("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw InvalidInput(path + ": missing header row");
  auto header = split_csv_line(line);
  bool has_ids = !header.empty() && header[0] == "id";
  SnpMatrix m;
  m.column_ids.assign(header.begin() + (has_ids ? 1 : 0), header.end());
  std::vector<std::vector<std::uint8_t>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r")
      continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidInput(path + ": line " + std::to_string(lineno) + " has " +
                         std::to_string(cells.size()) + " fields, expected " +
                         std::to_string(header.size()));
    std::vector<std::uint8_t> r;
    for (std::size_t k = has_ids ? 1 : 0; k < cells.size(); ++k) {
      const std::string& c = cells[k];
      if (c != "0" && c != "2")
        throw InvalidInput(path + ": SNP value '" + c + "' at row " +
                           std::to_string(rows.size() + 1) + ", column " + header[k] +
                           " is not 0 or 2");
      r.push_back(static_cast<std::uint8_t>(c[0] - '0'));
    }
    if (has_ids)
      m.row_ids.push_back(cells[0]);
    rows.push_back(std::move(r));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.column_ids.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

namespace {

std::uint32_t read_u32(std::istream& in)
{
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void write_u32(std::ostream& out, std::uint32_t v)
{
  unsigned char b[4] = { static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                         static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24) };
  out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

SnpMatrix read_snp_binary(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidInput("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SVM1", 4) != 0)
    throw InvalidInput(path + ": not an SVM1 file");
  std::uint32_t n = read_u32(in);
  std::uint32_t p = read_u32(in);
  if (!in)
    throw InvalidInput(path + ": truncated header");
  SnpMatrix m;
  m.values.resize(n, p);
  // column-major storage matches the file layout
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(n) * p);
  if (!in)
    throw InvalidInput(path + ": truncated data");
  for (std::uint32_t j = 0; j < p; ++j)
    m.column_ids.push_back("snp" + std::to_string(j + 1));
  m.validate();
  return m;
}

void write_snp_binary(const SnpMatrix& snps, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidInput("cannot write " + path);
  out.write("SVM1", 4);
  write_u32(out, static_cast<std::uint32_t>(snps.rows()));
  write_u32(out, static_cast<std::uint32_t>(snps.cols()));
  out.write(reinterpret_cast<const char*>(snps.values.data()),
            static_cast<std::streamsize>(snps.values.size()));
}

void write_snp_csv(const SnpMatrix& snps, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw InvalidInput("cannot write " + path);
  bool ids = !snps.row_ids.empty();
  if (ids)
    out << "id";
  for (std::size_t j = 0; j < snps.column_ids.size(); ++j)
    out << (ids || j ? "," : "") << snps.column_ids[j];
  out << "\n";
  for (Eigen::Index i = 0; i < snps.rows(); ++i) {
    if (ids)
      out << snps.row_ids[i];
    for (Eigen::Index j = 0; j < snps.cols(); ++j)
      out << (ids || j ? "," : "") << int(snps.values(i, j));
    out << "\n";
  }
}

SnpMatrix read_snp_matrix(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidInput("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::memcmp(magic, "SVM1", 4) == 0)
    return read_snp_binary(path);
  return read_snp_csv(path);
}

PlantedSnpData simulate_planted_snps(int n, int n_snps, int n_causal, std::uint64_t seed)
{
  if (n < 1 || n_snps < 1 || n_causal < 0 || n_causal > n_snps)
    throw InvalidInput("invalid planted SNP configuration");
  math::Rng rng(seed);
  std::vector<int> perm(n_snps);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n_snps - 1; i > 0; --i)
    std::swap(perm[i], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
  PlantedSnpData d;
  d.causal.assign(perm.begin(), perm.begin() + n_causal);
  std::sort(d.causal.begin(), d.causal.end());
  std::vector<char> is_causal(n_snps, 0);
  for (int c : d.causal)
    is_causal[c] = 1;

  Eigen::VectorXi haplotype(n);
  for (int i = 0; i < n; ++i)
    haplotype(i) = rng.uniform() < 0.5 ? 1 : 0;
  d.snps.values.resize(n, n_snps);
  Eigen::VectorXd effect = Eigen::VectorXd::Zero(n_snps);
  for (int j = 0; j < n_snps; ++j) {
    if (is_causal[j]) {
      effect(j) = 0.01 + 0.02 * rng.uniform();
      for (int i = 0; i < n; ++i) {
        int flip = rng.uniform() < 0.15 ? 1 : 0;
        d.snps.values(i, j) = static_cast<std::uint8_t>(2 * (haplotype(i) ^ flip));
      }
    } else {
      double f = 0.1 + 0.4 * rng.uniform();
      for (int i = 0; i < n; ++i)
        d.snps.values(i, j) = rng.uniform() < f ? 2 : 0;
    }
    d.snps.column_ids.push_back("snp" + std::to_string(j + 1));
  }
  for (int i = 0; i < n; ++i)
    d.snps.row_ids.push_back("line" + std::to_string(i + 1));
  d.y = d.snps.values.cast<double>() * effect;
  for (int i = 0; i < n; ++i)
    d.y(i) += rng.normal();
  return d;
}

} // namespace sparsevine
