#include <cctype>

#include "poisson/expr.hpp"

namespace poisson {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const ChartPtr& chart) : text_(text), chart_(chart) {}

  Expr parse() {
    Expr e = sum();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t pos) const { throw ParseError(what, pos); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr sum() {
    Expr e = product();
    for (;;) {
      if (accept('+'))
        e = e + product();
      else if (accept('-'))
        e = e - product();
      else
        return e;
    }
  }

  Expr product() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = unary();
        if (!d.is_constant()) fail_at("non-constant divisor", at);
        const Rational q = d.constant_value();
        if (q == 0) fail_at("division by zero", at);
        e = e.scaled(1 / q);
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      skip_space();
      const std::size_t at = pos_;
      Expr ex = unary();
      if (!ex.is_constant()) fail_at("non-integer exponent", at);
      const Rational q = ex.constant_value();
      if (q.get_den() != 1 || q < 0) fail_at("non-integer exponent", at);
      if (q > 64) fail_at("exponent too large", at);
      return base.pow(static_cast<unsigned>(q.get_num().get_ui()));
    }
    return base;
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::constant(chart_, number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t at = pos_;
      std::string name = identifier();
      if (name == "exp") {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '(') {
          ++pos_;
          const std::size_t arg_at = pos_;
          Expr arg = sum();
          expect(')');
          if (!arg.is_polynomial()) fail_at("exp argument must be a polynomial", arg_at);
          return Expr::exponential(chart_, arg.as_polynomial());
        }
      }
      auto idx = chart_->find(name);
      if (!idx) fail_at("unknown variable '" + name + "'", at);
      return Expr::variable(chart_, *idx);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '\''))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Rational number() {
    const std::size_t start = pos_;
    std::string digits;
    int frac = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) digits += text_[pos_++];
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits += text_[pos_++];
        ++frac;
      }
    }
    if (digits.empty()) fail_at("malformed number", start);
    long exponent = -frac;
    if (pos_ + 1 < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E') &&
        (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
         ((text_[pos_ + 1] == '-' || text_[pos_ + 1] == '+') && pos_ + 2 < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))))) {
      ++pos_;
      int sign = 1;
      if (text_[pos_] == '-' || text_[pos_] == '+') sign = text_[pos_++] == '-' ? -1 : 1;
      long e = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        e = e * 10 + (text_[pos_++] - '0');
        if (e > 400) fail_at("exponent out of range", start);
      }
      exponent += sign * e;
    }
    mpz_class mant(digits, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    Rational q = exponent < 0 ? Rational(mant, scale) : Rational(mant * scale);
    q.canonicalize();
    return q;
  }

  std::string_view text_;
  const ChartPtr& chart_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const ChartPtr& chart) { return Parser(text, chart).parse(); }

}  // namespace poisson
