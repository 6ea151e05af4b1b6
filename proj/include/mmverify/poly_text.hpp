#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mmverify/algebra.hpp"

namespace mmv {

/// A term of a polynomial written over variable names with an exact coefficient.
struct NamedTerm {
  BigInt coeff;
  std::vector<std::pair<std::string, std::uint32_t>> factors;
};

class PolyParseError : public std::runtime_error {
 public:
  PolyParseError(std::size_t column, const std::string& what);
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Parses `3*x^2*y - 4*a + 7`. Like terms are not merged.
std::vector<NamedTerm> parse_poly_text(std::string_view text);

/// Coefficients are CRT-reconstructed into the symmetric range.
std::string format_poly(const MmPoly& f, const std::function<std::string(Var)>& name);
std::string format_terms(const std::vector<NamedTerm>& terms);

}  // namespace mmv
