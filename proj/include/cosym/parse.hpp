#pragma once

// Recursive-descent parser for the expression grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' exponent)?
//   exponent:= integer | '-' integer | '(' '-'? integer ')'
//   primary := number | 'pi' | coordinate | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'exp' | 'log'
//
// Whitespace is insignificant. Exponents are integers.

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "cosym/chart.hpp"
#include "cosym/expr.hpp"

namespace cosym {

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Chart& chart) : text_(text), chart_(chart) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(pos_, std::string("unexpected character '") + text_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    bool parens = accept('(');
    bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError(pos_, "expected integer exponent");
    int n = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (ec != std::errc{}) throw ParseError(start, "exponent out of range");
    if (parens) expect(')');
    return pow(base, negative ? -n : n);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_) throw ParseError(start, "malformed number");
    return Expr(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "pi") return Expr::pi();
    if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
      expect('(');
      Expr arg = expression();
      expect(')');
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      return log(arg);
    }
    if (auto idx = chart_.index_of(name)) return Expr::variable(*idx, name);
    throw UnknownIdentifierError(name, start);
  }

  std::string_view text_;
  const Chart& chart_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` against the coordinates of `chart`.
inline Expr parse_expr(std::string_view text, const Chart& chart) { return detail::Parser(text, chart).parse(); }

inline Expr parse_expr(std::string_view text, const ChartPtr& chart) { return parse_expr(text, *chart); }

/// Coordinate function x_i of a chart.
inline Expr coordinate(const ChartPtr& chart, int i) { return Expr::variable(i, chart->coordinate(i)); }

inline Expr coordinate(const ChartPtr& chart, const std::string& name) {
  auto idx = chart->index_of(name);
  if (!idx) throw UnknownIdentifierError(name, 0);
  return coordinate(chart, *idx);
}

}  // namespace cosym
