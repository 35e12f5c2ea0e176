#pragma once

// Scalar expressions over chart coordinates.
//
// An Expr is an immutable, shareable AST. Coordinates are referenced by their
// index in the owning chart; the coordinate name is kept only for printing.
// All arithmetic goes through the smart constructors, which fold constants and
// apply the 0/1 identities and nothing else.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cosym/errors.hpp"

namespace cosym {

enum class Op : std::uint8_t { Constant, Pi, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log };

namespace detail {

struct ExprNode {
  Op op = Op::Constant;
  double value = 0.0;
  int index = -1;
  int exponent = 0;
  std::string name;
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

inline NodePtr make_node(Op op, double value = 0.0, int index = -1, int exponent = 0, std::string name = {},
                         NodePtr a = nullptr, NodePtr b = nullptr) {
  return std::make_shared<const ExprNode>(ExprNode{op, value, index, exponent, std::move(name), std::move(a), std::move(b)});
}

inline const NodePtr& zero_node() {
  static const NodePtr node = make_node(Op::Constant, 0.0);
  return node;
}

}  // namespace detail

class Expr {
 public:
  Expr() : node_(detail::zero_node()) {}
  Expr(double value) : node_(value == 0.0 ? detail::zero_node() : detail::make_node(Op::Constant, value)) {}  // NOLINT

  static Expr constant(double value) { return Expr(value); }
  static Expr pi() { return Expr(detail::make_node(Op::Pi)); }
  static Expr variable(int index, std::string name) {
    return Expr(detail::make_node(Op::Variable, 0.0, index, 0, std::move(name)));
  }

  Op op() const noexcept { return node_->op; }
  double value() const noexcept { return node_->value; }
  int index() const noexcept { return node_->index; }
  int exponent() const noexcept { return node_->exponent; }
  const std::string& name() const noexcept { return node_->name; }
  Expr lhs() const { return Expr(node_->a); }
  Expr rhs() const { return Expr(node_->b); }

  bool is_constant() const noexcept { return op() == Op::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }
  bool is_zero() const noexcept { return is_constant(0.0); }
  /// True for literals and pi.
  bool is_numeric() const noexcept { return op() == Op::Constant || op() == Op::Pi; }
  double numeric_value() const noexcept { return op() == Op::Pi ? std::numbers::pi : value(); }
  bool same_node(const Expr& o) const noexcept { return node_ == o.node_; }

  // Raw constructors without simplification; used by the smart constructors.
  static Expr binary(Op op, const Expr& a, const Expr& b) {
    return Expr(detail::make_node(op, 0.0, -1, 0, {}, a.node_, b.node_));
  }
  static Expr unary(Op op, const Expr& a) { return Expr(detail::make_node(op, 0.0, -1, 0, {}, a.node_)); }
  static Expr power(const Expr& a, int n) { return Expr(detail::make_node(Op::Pow, 0.0, -1, n, {}, a.node_)); }

 private:
  explicit Expr(detail::NodePtr node) : node_(std::move(node)) {}
  detail::NodePtr node_;
};

// ---------------------------------------------------------------------------
// Smart constructors

inline Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return Expr::unary(Op::Neg, a);
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr::binary(Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expr::binary(Op::Sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::binary(Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr(a.value() / b.value());
  if (b.is_constant(1.0)) return a;
  if (a.is_zero() && !(b.is_zero())) return Expr();
  return Expr::binary(Op::Div, a, b);
}

inline Expr pow(const Expr& base, int n) {
  if (n == 0) return Expr(1.0);
  if (n == 1) return base;
  if (base.is_constant() && !(base.value() == 0.0 && n < 0)) return Expr(std::pow(base.value(), n));
  return Expr::power(base, n);
}

inline Expr sin(const Expr& a) {
  if (a.is_constant()) return Expr(std::sin(a.value()));
  return Expr::unary(Op::Sin, a);
}

inline Expr cos(const Expr& a) {
  if (a.is_constant()) return Expr(std::cos(a.value()));
  return Expr::unary(Op::Cos, a);
}

inline Expr exp(const Expr& a) {
  if (a.is_constant()) return Expr(std::exp(a.value()));
  return Expr::unary(Op::Exp, a);
}

inline Expr log(const Expr& a) {
  if (a.is_constant() && a.value() > 0.0) return Expr(std::log(a.value()));
  return Expr::unary(Op::Log, a);
}

inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Constant:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

inline void print(const Expr& e, std::string& out) {
  auto child = [&out](const Expr& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  switch (e.op()) {
    case Op::Constant:
      out += format_number(e.value());
      return;
    case Op::Pi:
      out += "pi";
      return;
    case Op::Variable:
      out += e.name().empty() ? "x" + std::to_string(e.index()) : e.name();
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      child(e.lhs(), precedence(e.lhs()) < p);
      out += e.op() == Op::Add ? " + " : e.op() == Op::Sub ? " - " : e.op() == Op::Mul ? "*" : "/";
      // Right operands at equal precedence need parentheses for the
      // left-associative grammar to rebuild the same tree.
      child(e.rhs(), precedence(e.rhs()) <= p);
      return;
    }
    case Op::Neg:
      out += '-';
      child(e.lhs(), precedence(e.lhs()) < 3);
      return;
    case Op::Pow:
      child(e.lhs(), precedence(e.lhs()) < 5);
      out += '^';
      if (e.exponent() < 0) {
        out += "(" + std::to_string(e.exponent()) + ")";
      } else {
        out += std::to_string(e.exponent());
      }
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
      out += e.op() == Op::Sin ? "sin(" : e.op() == Op::Cos ? "cos(" : e.op() == Op::Exp ? "exp(" : "log(";
      print(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Evaluates `e` with coordinate values `x` (indexed like the chart).
/// Throws DomainError on division by zero or log of a nonpositive value.
inline double eval(const Expr& e, std::span<const double> x) {
  switch (e.op()) {
    case Op::Constant:
      return e.value();
    case Op::Pi:
      return std::numbers::pi;
    case Op::Variable:
      return x[static_cast<std::size_t>(e.index())];
    case Op::Add:
      return eval(e.lhs(), x) + eval(e.rhs(), x);
    case Op::Sub:
      return eval(e.lhs(), x) - eval(e.rhs(), x);
    case Op::Mul:
      return eval(e.lhs(), x) * eval(e.rhs(), x);
    case Op::Div: {
      const double den = eval(e.rhs(), x);
      if (den == 0.0) throw DomainError("division by zero", to_string(e));
      return eval(e.lhs(), x) / den;
    }
    case Op::Pow: {
      const double base = eval(e.lhs(), x);
      if (base == 0.0 && e.exponent() < 0) throw DomainError("division by zero", to_string(e));
      return std::pow(base, e.exponent());
    }
    case Op::Neg:
      return -eval(e.lhs(), x);
    case Op::Sin:
      return std::sin(eval(e.lhs(), x));
    case Op::Cos:
      return std::cos(eval(e.lhs(), x));
    case Op::Exp:
      return std::exp(eval(e.lhs(), x));
    case Op::Log: {
      const double v = eval(e.lhs(), x);
      if (!(v > 0.0)) throw DomainError("log of nonpositive value", to_string(e));
      return std::log(v);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Structural queries and rewriting

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Constant:
      return a.value() == b.value();
    case Op::Pi:
      return true;
    case Op::Variable:
      return a.index() == b.index();
    case Op::Pow:
      return a.exponent() == b.exponent() && structurally_equal(a.lhs(), b.lhs());
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
      return structurally_equal(a.lhs(), b.lhs());
    default:
      return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
  }
}

inline bool is_binary(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div; }
inline bool is_leaf(Op op) { return op == Op::Constant || op == Op::Pi || op == Op::Variable; }

/// Height of the tree; a leaf has depth 1.
inline int depth(const Expr& e) {
  if (is_leaf(e.op())) return 1;
  if (is_binary(e.op())) return 1 + std::max(depth(e.lhs()), depth(e.rhs()));
  return 1 + depth(e.lhs());
}

inline std::size_t node_count(const Expr& e) {
  if (is_leaf(e.op())) return 1;
  if (is_binary(e.op())) return 1 + node_count(e.lhs()) + node_count(e.rhs());
  return 1 + node_count(e.lhs());
}

inline bool depends_on(const Expr& e, int index) {
  if (e.op() == Op::Variable) return e.index() == index;
  if (is_leaf(e.op())) return false;
  if (is_binary(e.op())) return depends_on(e.lhs(), index) || depends_on(e.rhs(), index);
  return depends_on(e.lhs(), index);
}

/// Largest coordinate index referenced, or -1 for closed expressions.
inline int max_variable_index(const Expr& e) {
  if (e.op() == Op::Variable) return e.index();
  if (is_leaf(e.op())) return -1;
  if (is_binary(e.op())) return std::max(max_variable_index(e.lhs()), max_variable_index(e.rhs()));
  return max_variable_index(e.lhs());
}

/// Rebuilds `e` bottom-up through the smart constructors, replacing each
/// coordinate i by `leaf(i, name)`.
template <class LeafFn>
Expr rebuild(const Expr& e, const LeafFn& leaf) {
  switch (e.op()) {
    case Op::Constant:
    case Op::Pi:
      return e;
    case Op::Variable:
      return leaf(e.index(), e.name());
    case Op::Add:
      return rebuild(e.lhs(), leaf) + rebuild(e.rhs(), leaf);
    case Op::Sub:
      return rebuild(e.lhs(), leaf) - rebuild(e.rhs(), leaf);
    case Op::Mul:
      return rebuild(e.lhs(), leaf) * rebuild(e.rhs(), leaf);
    case Op::Div:
      return rebuild(e.lhs(), leaf) / rebuild(e.rhs(), leaf);
    case Op::Pow:
      return pow(rebuild(e.lhs(), leaf), e.exponent());
    case Op::Neg:
      return -rebuild(e.lhs(), leaf);
    case Op::Sin:
      return sin(rebuild(e.lhs(), leaf));
    case Op::Cos:
      return cos(rebuild(e.lhs(), leaf));
    case Op::Exp:
      return exp(rebuild(e.lhs(), leaf));
    case Op::Log:
      return log(rebuild(e.lhs(), leaf));
  }
  return e;
}

/// Conservative simplification: constant folding and 0/1 identities.
inline Expr simplify(const Expr& e) {
  return rebuild(e, [](int i, const std::string& name) { return Expr::variable(i, name); });
}

/// Replaces coordinate i by `replacement[i]`.
inline Expr substitute(const Expr& e, std::span<const Expr> replacement) {
  return rebuild(e, [&](int i, const std::string&) { return replacement[static_cast<std::size_t>(i)]; });
}

/// Renumbers coordinates: coordinate i becomes `index_map[i]` named `names[index_map[i]]`.
inline Expr reindex(const Expr& e, std::span<const int> index_map, std::span<const std::string> names) {
  return rebuild(e, [&](int i, const std::string&) {
    const int j = index_map[static_cast<std::size_t>(i)];
    return Expr::variable(j, names[static_cast<std::size_t>(j)]);
  });
}

/// Exact partial derivative with respect to coordinate `index`.
inline Expr differentiate(const Expr& e, int index) {
  switch (e.op()) {
    case Op::Constant:
    case Op::Pi:
      return Expr();
    case Op::Variable:
      return e.index() == index ? Expr(1.0) : Expr();
    case Op::Add:
      return differentiate(e.lhs(), index) + differentiate(e.rhs(), index);
    case Op::Sub:
      return differentiate(e.lhs(), index) - differentiate(e.rhs(), index);
    case Op::Mul: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      return differentiate(a, index) * b + a * differentiate(b, index);
    }
    case Op::Div: {
      const Expr a = e.lhs();
      const Expr b = e.rhs();
      const Expr da = differentiate(a, index);
      const Expr db = differentiate(b, index);
      return da / b - (a * db) / pow(b, 2);
    }
    case Op::Pow: {
      const Expr base = e.lhs();
      const int n = e.exponent();
      return Expr(static_cast<double>(n)) * pow(base, n - 1) * differentiate(base, index);
    }
    case Op::Neg:
      return -differentiate(e.lhs(), index);
    case Op::Sin:
      return cos(e.lhs()) * differentiate(e.lhs(), index);
    case Op::Cos:
      return -(sin(e.lhs()) * differentiate(e.lhs(), index));
    case Op::Exp:
      return e * differentiate(e.lhs(), index);
    case Op::Log:
      return differentiate(e.lhs(), index) / e.lhs();
  }
  return Expr();
}

}  // namespace cosym
