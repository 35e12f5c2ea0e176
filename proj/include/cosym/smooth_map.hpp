#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosym/chart.hpp"
#include "cosym/expr.hpp"
#include "cosym/parse.hpp"

namespace cosym {

inline std::vector<double> eval_all(std::span<const Expr> exprs, std::span<const double> x) {
  std::vector<double> out(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) out[i] = eval(exprs[i], x);
  return out;
}

inline Eigen::VectorXd gradient_at(std::span<const Expr> partials, std::span<const double> x) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(partials.size()));
  for (std::size_t i = 0; i < partials.size(); ++i) g(static_cast<Eigen::Index>(i)) = eval(partials[i], x);
  return g;
}

inline std::vector<Expr> gradient(const Expr& f, int dimension) {
  std::vector<Expr> g;
  g.reserve(static_cast<std::size_t>(dimension));
  for (int j = 0; j < dimension; ++j) g.push_back(differentiate(f, j));
  return g;
}

/// A map between charts given by one expression per target coordinate in the
/// source coordinates. The symbolic Jacobian is computed once at construction.
class SmoothMap {
 public:
  SmoothMap(ChartPtr source, ChartPtr target, std::vector<Expr> components, std::string name = {})
      : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)), name_(std::move(name)) {
    if (static_cast<int>(components_.size()) != target_->dimension())
      throw Error("map \"" + name_ + "\" into \"" + target_->name() + "\" needs " + std::to_string(target_->dimension()) +
                  " components, got " + std::to_string(components_.size()));
    for (const auto& c : components_)
      if (max_variable_index(c) >= source_->dimension())
        throw Error("map \"" + name_ + "\": component references a coordinate outside \"" + source_->name() + "\"");
    partials_.reserve(components_.size() * static_cast<std::size_t>(source_->dimension()));
    for (const auto& c : components_)
      for (int j = 0; j < source_->dimension(); ++j) partials_.push_back(differentiate(c, j));
  }

  /// Builds a map from expression strings in the source coordinates.
  static SmoothMap parse(ChartPtr source, ChartPtr target, const std::vector<std::string>& components, std::string name = {}) {
    std::vector<Expr> exprs;
    exprs.reserve(components.size());
    for (const auto& c : components) exprs.push_back(parse_expr(c, *source));
    return SmoothMap(std::move(source), std::move(target), std::move(exprs), std::move(name));
  }

  static SmoothMap identity(const ChartPtr& chart) {
    std::vector<Expr> comps;
    for (int i = 0; i < chart->dimension(); ++i) comps.push_back(coordinate(chart, i));
    return SmoothMap(chart, chart, std::move(comps), "id_" + chart->name());
  }

  const ChartPtr& source() const noexcept { return source_; }
  const ChartPtr& target() const noexcept { return target_; }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  const std::string& name() const noexcept { return name_; }

  const Expr& partial(int i, int j) const {
    return partials_[static_cast<std::size_t>(i * source_->dimension() + j)];
  }

  /// Raw target coordinates (periodic components are not reduced).
  std::vector<double> apply_raw(std::span<const double> x) const { return eval_all(components_, x); }

  Point operator()(const Point& p) const {
    require_same_chart(p.chart(), source_, "map \"" + name_ + "\"");
    return Point(target_, apply_raw(p.values()));
  }

  Eigen::MatrixXd jacobian(std::span<const double> x) const {
    const int m = target_->dimension();
    const int n = source_->dimension();
    Eigen::MatrixXd jac(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) jac(i, j) = eval(partial(i, j), x);
    return jac;
  }

  Eigen::MatrixXd jacobian(const Point& p) const {
    require_same_chart(p.chart(), source_, "jacobian of \"" + name_ + "\"");
    return jacobian(p.values());
  }

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<Expr> components_;
  std::vector<Expr> partials_;
  std::string name_;
};

/// Symbolic composition outer ∘ inner.
inline SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  require_same_chart(inner.target(), outer.source(), "compose " + outer.name() + " after " + inner.name());
  std::vector<Expr> comps;
  comps.reserve(outer.components().size());
  for (const auto& c : outer.components()) comps.push_back(substitute(c, inner.components()));
  return SmoothMap(inner.source(), outer.target(), std::move(comps), outer.name() + "∘" + inner.name());
}

/// Pulls a function on the target chart back to the source chart.
inline Expr pullback_function(const SmoothMap& map, const Expr& f) { return substitute(f, map.components()); }

/// Entry (i, j) is ∂F_i/∂x_j at p.
inline Eigen::MatrixXd jacobian(const SmoothMap& map, const Point& p) { return map.jacobian(p); }

/// Components in the coordinate frame, one expression per coordinate.
class VectorField {
 public:
  VectorField(ChartPtr chart, std::vector<Expr> components, std::string name = {})
      : chart_(std::move(chart)), components_(std::move(components)), name_(std::move(name)) {
    if (static_cast<int>(components_.size()) != chart_->dimension())
      throw Error("vector field \"" + name_ + "\" on \"" + chart_->name() + "\" needs " +
                  std::to_string(chart_->dimension()) + " components");
    for (const auto& c : components_)
      if (max_variable_index(c) >= chart_->dimension())
        throw Error("vector field \"" + name_ + "\": component references a coordinate outside the chart");
  }

  static VectorField parse(ChartPtr chart, const std::vector<std::string>& components, std::string name = {}) {
    std::vector<Expr> exprs;
    for (const auto& c : components) exprs.push_back(parse_expr(c, *chart));
    return VectorField(std::move(chart), std::move(exprs), std::move(name));
  }

  /// The coordinate field ∂/∂x_i.
  static VectorField coordinate_field(const ChartPtr& chart, int i) {
    std::vector<Expr> comps(static_cast<std::size_t>(chart->dimension()));
    comps[static_cast<std::size_t>(i)] = Expr(1.0);
    return VectorField(chart, std::move(comps), "d_" + chart->coordinate(i));
  }

  static VectorField zero(const ChartPtr& chart) {
    return VectorField(chart, std::vector<Expr>(static_cast<std::size_t>(chart->dimension())), "0");
  }

  const ChartPtr& chart() const noexcept { return chart_; }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  const std::string& name() const noexcept { return name_; }

  Eigen::VectorXd at(std::span<const double> x) const {
    Eigen::VectorXd v(chart_->dimension());
    for (int i = 0; i < chart_->dimension(); ++i) v(i) = eval(components_[static_cast<std::size_t>(i)], x);
    return v;
  }

  Eigen::VectorXd at(const Point& p) const {
    require_same_chart(p.chart(), chart_, "vector field \"" + name_ + "\"");
    return at(p.values());
  }

  /// Directional derivative X(f) = Σ X^i ∂_i f.
  Expr apply(const Expr& f) const {
    Expr out;
    for (int i = 0; i < chart_->dimension(); ++i) out += components_[static_cast<std::size_t>(i)] * differentiate(f, i);
    return out;
  }

 private:
  ChartPtr chart_;
  std::vector<Expr> components_;
  std::string name_;
};

/// Commutator [X, Y]^i = X(Y^i) - Y(X^i).
inline VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart(), y.chart(), "lie bracket");
  std::vector<Expr> comps;
  for (int i = 0; i < x.chart()->dimension(); ++i) comps.push_back(x.apply(y.component(i)) - y.apply(x.component(i)));
  return VectorField(x.chart(), std::move(comps), "[" + x.name() + "," + y.name() + "]");
}

/// Tangent vector dF_p · X(p) at F(p).
inline Eigen::VectorXd pushforward(const SmoothMap& map, const VectorField& field, const Point& p) {
  require_same_chart(field.chart(), map.source(), "pushforward");
  return map.jacobian(p) * field.at(p);
}

/// A vector field known only through a pointwise evaluator (the output of
/// pointwise linear solves).
class PointwiseVectorField {
 public:
  using Evaluator = std::function<Eigen::VectorXd(const Point&)>;
  PointwiseVectorField(ChartPtr chart, Evaluator eval) : chart_(std::move(chart)), eval_(std::move(eval)) {}
  const ChartPtr& chart() const noexcept { return chart_; }
  Eigen::VectorXd operator()(const Point& p) const { return eval_(p); }

 private:
  ChartPtr chart_;
  Evaluator eval_;
};

/// A scalar field known only through a pointwise evaluator.
class PointwiseFunction {
 public:
  using Evaluator = std::function<double(const Point&)>;
  PointwiseFunction(ChartPtr chart, Evaluator eval) : chart_(std::move(chart)), eval_(std::move(eval)) {}
  const ChartPtr& chart() const noexcept { return chart_; }
  double operator()(const Point& p) const { return eval_(p); }

 private:
  ChartPtr chart_;
  Evaluator eval_;
};

/// A random polynomial of total degree <= max_degree with `terms` monomials and
/// coefficients in [-1, 1]. Deterministic for a given generator state.
inline Expr random_polynomial(const ChartPtr& chart, int max_degree, int terms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> var(0, chart->dimension() - 1);
  std::uniform_int_distribution<int> deg(0, max_degree);
  Expr out;
  for (int t = 0; t < terms; ++t) {
    Expr mono(std::round(coeff(rng) * 1000.0) / 1000.0);
    const int d = deg(rng);
    for (int e = 0; e < d; ++e) mono = mono * coordinate(chart, var(rng));
    out = out + mono;
  }
  return out;
}

/// `count` random polynomials from a seed.
inline std::vector<Expr> polynomial_corpus(const ChartPtr& chart, std::size_t count, int max_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Expr> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_polynomial(chart, max_degree, 3, rng));
  return out;
}

/// Gradient of a pointwise scalar by the fourth-order central stencil.
inline Eigen::VectorXd gradient_fd(const std::function<double(const Point&)>& f, const Point& p, double h = 1e-3) {
  Eigen::VectorXd g(p.dimension());
  for (int j = 0; j < p.dimension(); ++j) {
    auto shifted = [&](double step) {
      std::vector<double> x(p.values().begin(), p.values().end());
      x[static_cast<std::size_t>(j)] += step;
      return f(Point(p.chart(), std::move(x)));
    };
    g(j) = (8.0 * (shifted(h) - shifted(-h)) - (shifted(2.0 * h) - shifted(-2.0 * h))) / (12.0 * h);
  }
  return g;
}

}  // namespace cosym
