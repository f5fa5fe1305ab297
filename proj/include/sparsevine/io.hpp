#pragma once

#include "sparsevine/math.hpp"

#include <string>
#include <vector>

namespace sparsevine {

//! Numeric CSV table: header row, comma separated, '.' decimals.
struct Table
{
  std::vector<std::string> header;
  Eigen::MatrixXd data;

  //! Index of the named column; throws InvalidInput if absent.
  int column(const std::string& name) const;
};

Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& source = "<string>");
void write_csv(const Table& t, const std::string& path);
std::string format_csv(const Table& t);

//! Exact round-trip formatting of a double.
std::string format_double(double x);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace sparsevine
