#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "npn/error.hpp"
#include "npn/matrix.hpp"
#include "npn/rank_stats.hpp"

namespace npn {

/// Shortest decimal text that parses back to the same double. Infinities are
/// written as "inf" / "-inf".
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_number(std::string_view token, double& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

}  // namespace detail

/// Parses comma-separated numeric text. A first row containing any
/// non-numeric token is treated as a header and skipped. Blank lines are
/// ignored. Locations in errors are 1-based (line, field).
inline DataMatrix parse_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    std::size_t bad_field = 0;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (!detail::parse_number(fields[f], row[f])) {
        numeric = false;
        bad_field = f;
        break;
      }
    }
    if (first_content_line) {
      first_content_line = false;
      if (!numeric) continue;  // header
    }
    const std::string where = "line " + std::to_string(line_no);
    if (!numeric) {
      throw Error(ErrorKind::ParseError, where + ", field " + std::to_string(bad_field + 1) + ": '" +
                                             std::string(fields[bad_field]) + "' is not a number");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw Error(ErrorKind::ParseError,
                  where + ": expected " + std::to_string(cols) + " fields, found " + std::to_string(row.size()));
    }
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (!std::isfinite(row[f])) {
        throw Error(ErrorKind::NonFiniteValue, where + ", field " + std::to_string(f + 1) + ": '" +
                                                   std::string(fields[f]) + "' is not finite");
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::EmptyFile, "no data rows");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return DataMatrix(std::move(m));
}

inline DataMatrix load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

inline std::string to_csv(const DataMatrix& x, const std::vector<std::string>& header = {}) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  if (!header.empty()) out += '\n';
  for (std::size_t i = 0; i < x.n(); ++i) {
    for (std::size_t j = 0; j < x.dim(); ++j) {
      if (j) out += ',';
      out += format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path, const DataMatrix& x, const std::vector<std::string>& header = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << to_csv(x, header);
}

}  // namespace npn
