#include "sparsevine/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sparsevine {

int Table::column(const std::string& name) const
{
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name)
      return static_cast<int>(k);
  throw InvalidInput("missing column '" + name + "'");
}

namespace {

std::string trim(std::string s)
{
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t k = 0;
  while (k < s.size() && (s[k] == ' ' || s[k] == '\t'))
    ++k;
  s.erase(0, k);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos)
      break;
    start = pos + 1;
  }
  return out;
}

} // namespace

Table parse_csv(const std::string& text, const std::string& source)
{
  std::istringstream in(text);
  std::string line;
  Table t;
  // skip a UTF-8 byte order mark and blank lines before the header
  while (std::getline(in, line)) {
    if (line.rfind("\xEF\xBB\xBF", 0) == 0)
      line.erase(0, 3);
    if (!trim(line).empty())
      break;
  }
  if (trim(line).empty())
    throw InvalidInput(source + ": missing header row");
  t.header = split(line);
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw InvalidInput(source + ": line " + std::to_string(lineno) + " has " +
                         std::to_string(cells.size()) + " fields, expected " +
                         std::to_string(t.header.size()));
    std::vector<double> r(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::string& c = cells[k];
      auto res = std::from_chars(c.data(), c.data() + c.size(), r[k]);
      if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size() ||
          !std::isfinite(r[k]))
        throw InvalidInput(source + ": non-numeric value '" + c + "' at line " +
                           std::to_string(lineno) + ", column " + std::to_string(k + 1) + " (" + t.header[k] + ")");
    }
    rows.push_back(std::move(r));
  }
  t.data.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      t.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return t;
}

Table read_csv(const std::string& path)
{
  return parse_csv(read_text(path), path);
}

std::string format_double(double x)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_csv(const Table& t)
{
  std::string out;
  for (std::size_t k = 0; k < t.header.size(); ++k)
    out += (k ? "," : "") + t.header[k];
  out += "\n";
  for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
    for (Eigen::Index k = 0; k < t.data.cols(); ++k) {
      if (k)
        out += ",";
      out += format_double(t.data(i, k));
    }
    out += "\n";
  }
  return out;
}

void write_csv(const Table& t, const std::string& path)
{
  write_text(path, format_csv(t));
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidInput("cannot write " + path);
  out << text;
  if (!out)
    throw InvalidInput("failed writing " + path);
}

std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace sparsevine
