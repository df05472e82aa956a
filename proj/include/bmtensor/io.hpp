#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

/// Thrown for malformed or unreadable tensor/factor files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Text tensor format: a header line "symtensor3 <n>" followed by the n^3
/// entries in storage order (i fastest), whitespace separated.
void write_tensor(std::ostream& os, const SymTensor3& t);
SymTensor3 read_tensor(std::istream& is);
void write_tensor_file(const std::filesystem::path& path, const SymTensor3& t);
SymTensor3 read_tensor_file(const std::filesystem::path& path);

/// Factor CSV: header "f1,...,fr", then one row per coordinate.
void write_factors(std::ostream& os, const FactorMatrix& U);
FactorMatrix read_factors(std::istream& is);
void write_factors_file(const std::filesystem::path& path, const FactorMatrix& U);
FactorMatrix read_factors_file(const std::filesystem::path& path);

}  // namespace bmtensor
