#include "sdlab/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdlab {
namespace csvio {

std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_rows(const std::string& path, const std::string& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("csv.write: cannot open '" + path + "' for writing");
  }
  out << header << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  out.flush();
  if (!out) {
    throw std::runtime_error("csv.write: write failed for '" + path + "'");
  }
}

namespace {

bool parse_number(const std::string& cell, double* out) {
  const char* s = cell.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s, &end);
  if (end == s || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (*end != '\0') return false;
  *out = v;
  return true;
}

std::string strip_eol(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

}  // namespace

std::vector<std::pair<double, double>> read_two_column(const std::string& path,
                                                       const std::string& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("csv.read: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("csv.read: '" + path + "' is empty");
  }
  if (strip_eol(line) != expected_header) {
    throw std::runtime_error("csv.read: '" + path + "' line 1: expected header '" +
                             expected_header + "', got '" + strip_eol(line) + "'");
  }
  std::vector<std::pair<double, double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = strip_eol(line);
    if (body.empty()) continue;
    size_t comma = body.find(',');
    if (comma == std::string::npos || body.find(',', comma + 1) != std::string::npos) {
      throw std::runtime_error("csv.read: '" + path + "' line " + std::to_string(lineno) +
                               ": expected exactly two comma-separated fields");
    }
    double a = 0.0;
    double b = 0.0;
    if (!parse_number(body.substr(0, comma), &a) || !parse_number(body.substr(comma + 1), &b)) {
      throw std::runtime_error("csv.read: '" + path + "' line " + std::to_string(lineno) +
                               ": field is not a finite number");
    }
    rows.emplace_back(a, b);
  }
  if (rows.empty()) {
    throw std::runtime_error("csv.read: '" + path + "' has no data rows");
  }
  return rows;
}

}  // namespace csvio
}  // namespace sdlab
