#include "bmtensor/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace bmtensor {

namespace {

double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(where + ": not a number: '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite value '" + tok + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_tensor(std::ostream& os, const SymTensor3& t) {
  os << "symtensor3 " << t.dim() << '\n';
  const auto data = t.data();
  const auto n = static_cast<std::size_t>(t.dim());
  for (std::size_t q = 0; q < data.size(); ++q) {
    os << format_double(data[q]);
    os << (((q + 1) % n == 0) ? '\n' : ' ');
  }
}

SymTensor3 read_tensor(std::istream& is) {
  std::string magic;
  long long n = 0;
  if (!(is >> magic) || magic != "symtensor3")
    throw ParseError("tensor file: expected header 'symtensor3 <n>'");
  if (!(is >> n) || n <= 0)
    throw ParseError("tensor file: header dimension must be a positive integer");
  const auto expected = static_cast<std::size_t>(n * n * n);
  std::vector<double> data;
  data.reserve(expected);
  std::string tok;
  while (is >> tok) data.push_back(parse_double(tok, "tensor file"));
  if (data.size() != expected)
    throw ParseError("tensor file: expected " + std::to_string(expected) +
                     " entries for n=" + std::to_string(n) + ", got " +
                     std::to_string(data.size()));
  SymTensor3 t(static_cast<Index>(n), std::move(data));
  double scale = 1.0;
  for (double x : t.data()) scale = std::max(scale, std::abs(x));
  if (t.max_asymmetry() > 1e-12 * scale)
    throw ParseError("tensor file: entries are not symmetric under index permutation");
  return t;
}

void write_factors(std::ostream& os, const FactorMatrix& U) {
  for (Index p = 0; p < U.cols(); ++p) os << (p ? "," : "") << 'f' << (p + 1);
  os << '\n';
  for (Index i = 0; i < U.rows(); ++i) {
    for (Index p = 0; p < U.cols(); ++p) os << (p ? "," : "") << format_double(U(i, p));
    os << '\n';
  }
}

FactorMatrix read_factors(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("factor file: missing header");
  const auto header = split_commas(trim(line));
  for (std::size_t p = 0; p < header.size(); ++p)
    if (header[p] != "f" + std::to_string(p + 1))
      throw ParseError("factor file: header column " + std::to_string(p + 1) +
                       " should be 'f" + std::to_string(p + 1) + "', got '" +
                       header[p] + "'");
  const std::size_t r = header.size();
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    const std::string where = "factor file row " + std::to_string(rows.size() + 1);
    if (cells.size() != r)
      throw ParseError(where + ": expected " + std::to_string(r) + " values, got " +
                       std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("factor file: no data rows");
  FactorMatrix U(static_cast<Index>(rows.size()), static_cast<Index>(r));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t p = 0; p < r; ++p)
      U(static_cast<Index>(i), static_cast<Index>(p)) = rows[i][p];
  return U;
}

void write_tensor_file(const std::filesystem::path& path, const SymTensor3& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_tensor(os, t);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

SymTensor3 read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open tensor file: " + path.string());
  try {
    return read_tensor(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_factors_file(const std::filesystem::path& path, const FactorMatrix& U) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_factors(os, U);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

FactorMatrix read_factors_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open factor file: " + path.string());
  try {
    return read_factors(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace bmtensor
