#include "mmverify/poly_text.hpp"

#include <cctype>
#include <sstream>

namespace mmv {

PolyParseError::PolyParseError(std::size_t column, const std::string& what)
    : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool done() {
    skip_space();
    return i_ >= s_.size();
  }
  char peek() {
    skip_space();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  void advance() { ++i_; }
  std::size_t column() const { return i_ + 1; }

  BigInt number() {
    skip_space();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) throw PolyParseError(column(), "expected a number");
    return BigInt(std::string(s_.substr(start, i_ - start)));
  }
  std::string identifier() {
    skip_space();
    std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '[' ||
                              s_[i_] == ']' || s_[i_] == '.'))
      ++i_;
    if (start == i_) throw PolyParseError(column(), "expected a variable name");
    return std::string(s_.substr(start, i_ - start));
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<NamedTerm> parse_poly_text(std::string_view text) {
  Lexer lex(text);
  std::vector<NamedTerm> terms;
  if (lex.done()) throw PolyParseError(1, "empty polynomial");
  bool first = true;
  while (!lex.done()) {
    int sign = 1;
    char c = lex.peek();
    if (c == '+' || c == '-') {
      sign = c == '-' ? -1 : 1;
      lex.advance();
    } else if (!first) {
      throw PolyParseError(lex.column(), "expected '+' or '-'");
    }
    first = false;
    NamedTerm term{BigInt(sign), {}};
    while (true) {
      c = lex.peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        term.coeff *= lex.number();
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string name = lex.identifier();
        std::uint32_t exp = 1;
        if (lex.peek() == '^') {
          lex.advance();
          BigInt e = lex.number();
          if (e > 64) throw PolyParseError(lex.column(), "exponent too large");
          exp = static_cast<std::uint32_t>(e);
        }
        if (exp > 0) term.factors.emplace_back(std::move(name), exp);
      } else {
        throw PolyParseError(lex.column(), std::string("unexpected '") + (c ? std::string(1, c) : "end") + "'");
      }
      if (lex.peek() != '*') break;
      lex.advance();
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

namespace {

void append_term(std::ostringstream& out, bool first, const BigInt& coeff, const std::vector<std::string>& factors) {
  BigInt mag = coeff < 0 ? BigInt(-coeff) : coeff;
  if (coeff < 0) {
    out << '-';
  } else if (!first) {
    out << '+';
  }
  bool wrote = false;
  if (mag != 1 || factors.empty()) {
    out << mag;
    wrote = true;
  }
  for (const std::string& f : factors) {
    if (wrote) out << '*';
    out << f;
    wrote = true;
  }
}

}  // namespace

std::string format_poly(const MmPoly& f, const std::function<std::string(Var)>& name) {
  if (f.is_zero()) return "0";
  std::ostringstream out;
  for (std::size_t t = 0; t < f.size(); ++t) {
    BigInt c = crt_reconstruct(f.coeff_vec(t), f.basis());
    // Highest-ranked variable first, matching the term order.
    std::vector<std::string> factors;
    auto fs = f.monomial(t).factors();
    for (std::size_t k = fs.size(); k-- > 0;) {
      std::string v = name(fs[k].var);
      if (fs[k].exp > 1) v += "^" + std::to_string(fs[k].exp);
      factors.push_back(std::move(v));
    }
    append_term(out, t == 0, c, factors);
  }
  return out.str();
}

std::string format_terms(const std::vector<NamedTerm>& terms) {
  std::ostringstream out;
  bool first = true;
  for (const NamedTerm& t : terms) {
    if (t.coeff == 0) continue;
    std::vector<std::string> factors;
    for (const auto& [n, e] : t.factors) factors.push_back(e > 1 ? n + "^" + std::to_string(e) : n);
    append_term(out, first, t.coeff, factors);
    first = false;
  }
  return first ? "0" : out.str();
}

}  // namespace mmv
