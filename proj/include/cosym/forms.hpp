#pragma once

// Exterior calculus on a single chart.
//
// A k-form stores one coefficient per strictly increasing multi-index; every
// other ordering is handled by permutation signs. DifferentialForm is the
// symbolic representation; FormField wraps either a symbolic form or a
// pointwise evaluator (used for forms obtained by solving linear systems).

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosym/chart.hpp"
#include "cosym/expr.hpp"
#include "cosym/multi_index.hpp"
#include "cosym/parse.hpp"
#include "cosym/smooth_map.hpp"

namespace cosym {

class DifferentialForm {
 public:
  /// The zero k-form.
  DifferentialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree_ < 0 || degree_ > chart_->dimension())
      throw DegreeError("degree " + std::to_string(degree_) + " out of range on \"" + chart_->name() + "\" (dimension " +
                        std::to_string(chart_->dimension()) + ")");
    coeffs_.assign(binomial(chart_->dimension(), degree_), Expr());
  }

  DifferentialForm(ChartPtr chart, int degree, std::vector<Expr> coefficients) : DifferentialForm(std::move(chart), degree) {
    if (coefficients.size() != coeffs_.size())
      throw DegreeError("expected " + std::to_string(coeffs_.size()) + " coefficients for a " + std::to_string(degree_) +
                        "-form");
    for (const auto& c : coefficients)
      if (max_variable_index(c) >= chart_->dimension()) throw Error("form coefficient references a foreign coordinate");
    coeffs_ = std::move(coefficients);
  }

  static DifferentialForm function(ChartPtr chart, Expr f) {
    return DifferentialForm(std::move(chart), 0, std::vector<Expr>{std::move(f)});
  }

  /// The coordinate differential dx_i.
  static DifferentialForm differential(const ChartPtr& chart, int i) {
    DifferentialForm out(chart, 1);
    out.coeffs_[static_cast<std::size_t>(i)] = Expr(1.0);
    return out;
  }

  /// df = Σ ∂_j f dx_j.
  static DifferentialForm exact(const ChartPtr& chart, const Expr& f) {
    DifferentialForm out(chart, 1);
    for (int j = 0; j < chart->dimension(); ++j) out.coeffs_[static_cast<std::size_t>(j)] = differentiate(f, j);
    return out;
  }

  const ChartPtr& chart() const noexcept { return chart_; }
  int degree() const noexcept { return degree_; }
  int dimension() const noexcept { return chart_->dimension(); }
  const std::vector<Expr>& coefficients() const noexcept { return coeffs_; }
  const MultiIndexSet& indices() const { return multi_indices(dimension(), degree_); }

  /// Coefficient on an arbitrary ordering of indices (sign-adjusted).
  Expr coefficient(std::vector<int> idx) const {
    check_length(idx);
    const int sign = sort_with_sign(idx);
    if (sign == 0) return Expr();
    const Expr& c = coeffs_[indices().rank_of(idx)];
    return sign > 0 ? c : -c;
  }

  /// Adds c · dx_{idx[0]} ∧ ... ∧ dx_{idx[k-1]}.
  void add_term(std::vector<int> idx, const Expr& c) {
    check_length(idx);
    const int sign = sort_with_sign(idx);
    if (sign == 0) return;
    Expr& slot = coeffs_[indices().rank_of(idx)];
    slot = sign > 0 ? slot + c : slot - c;
  }

  Eigen::VectorXd at(std::span<const double> x) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(coeffs_.size()));
    for (std::size_t r = 0; r < coeffs_.size(); ++r) v(static_cast<Eigen::Index>(r)) = eval(coeffs_[r], x);
    return v;
  }

  Eigen::VectorXd at(const Point& p) const {
    require_same_chart(p.chart(), chart_, "form evaluation");
    return at(p.values());
  }

  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
    a.require_compatible(b, "form addition");
    DifferentialForm out = a;
    for (std::size_t r = 0; r < out.coeffs_.size(); ++r) out.coeffs_[r] = a.coeffs_[r] + b.coeffs_[r];
    return out;
  }

  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
    a.require_compatible(b, "form subtraction");
    DifferentialForm out = a;
    for (std::size_t r = 0; r < out.coeffs_.size(); ++r) out.coeffs_[r] = a.coeffs_[r] - b.coeffs_[r];
    return out;
  }

  friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
    DifferentialForm out = a;
    for (auto& c : out.coeffs_) c = f * c;
    return out;
  }

  DifferentialForm operator-() const { return Expr(-1.0) * *this; }

  /// Human-readable sum of terms, e.g. "1*dq1^dp1 + cos(theta)*dtheta".
  std::string to_string() const {
    std::string out;
    const auto& set = indices();
    for (std::size_t r = 0; r < coeffs_.size(); ++r) {
      if (coeffs_[r].is_zero()) continue;
      if (!out.empty()) out += " + ";
      out += "(" + cosym::to_string(coeffs_[r]) + ")";
      for (std::size_t t = 0; t < set[r].size(); ++t) out += (t == 0 ? "*d" : "^d") + chart_->coordinate(set[r][t]);
    }
    return out.empty() ? "0" : out;
  }

 private:
  void check_length(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != degree_) throw DegreeError("multi-index length does not match form degree");
    for (int i : idx)
      if (i < 0 || i >= dimension()) throw Error("multi-index entry out of range");
  }

  void require_compatible(const DifferentialForm& b, const std::string& ctx) const {
    require_same_chart(chart_, b.chart_, ctx);
    if (degree_ != b.degree_) throw DegreeError(ctx + ": degrees differ");
  }

  ChartPtr chart_;
  int degree_;
  std::vector<Expr> coeffs_;
};

/// Parses a term key such as "dq1^dp1" into coordinate indices; "1" is the empty product.
inline std::vector<int> parse_multi_index(const std::string& key, const Chart& chart) {
  std::vector<int> idx;
  if (key == "1" || key.empty()) return idx;
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find('^', start);
    if (end == std::string::npos) end = key.size();
    std::string tok = key.substr(start, end - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.erase(tok.begin());
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.pop_back();
    if (tok.size() < 2 || tok[0] != 'd') throw ParseError(start, "form term \"" + key + "\" must look like dx^dy");
    auto i = chart.index_of(tok.substr(1));
    if (!i) throw UnknownIdentifierError(tok.substr(1), start + 1);
    idx.push_back(*i);
    start = end + 1;
  }
  return idx;
}

/// Builds a form from a table of term keys to expression strings.
inline DifferentialForm parse_form(const ChartPtr& chart, int degree, const std::map<std::string, std::string>& terms) {
  DifferentialForm out(chart, degree);
  for (const auto& [key, text] : terms) {
    auto idx = parse_multi_index(key, *chart);
    if (static_cast<int>(idx.size()) != degree)
      throw DegreeError("term \"" + key + "\" does not have degree " + std::to_string(degree));
    out.add_term(std::move(idx), parse_expr(text, *chart));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic operations

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  const int k = a.degree() + b.degree();
  if (k > a.dimension())
    throw DegreeError("wedge of degrees " + std::to_string(a.degree()) + " and " + std::to_string(b.degree()) +
                      " exceeds dimension " + std::to_string(a.dimension()));
  DifferentialForm out(a.chart(), k);
  const auto& ia = a.indices();
  const auto& ib = b.indices();
  for (std::size_t r = 0; r < ia.size(); ++r) {
    if (a.coefficients()[r].is_zero()) continue;
    for (std::size_t s = 0; s < ib.size(); ++s) {
      if (b.coefficients()[s].is_zero()) continue;
      std::vector<int> idx = ia[r];
      idx.insert(idx.end(), ib[s].begin(), ib[s].end());
      out.add_term(std::move(idx), a.coefficients()[r] * b.coefficients()[s]);
    }
  }
  return out;
}

/// d of a k-form, k < dim. Raises DegreeError when k equals the dimension.
inline DifferentialForm exterior_derivative(const DifferentialForm& a) {
  if (a.degree() >= a.dimension())
    throw DegreeError("exterior derivative of a top-degree form (degree " + std::to_string(a.degree()) + ")");
  DifferentialForm out(a.chart(), a.degree() + 1);
  const auto& set = a.indices();
  for (std::size_t r = 0; r < set.size(); ++r) {
    const Expr& c = a.coefficients()[r];
    if (c.is_numeric()) continue;
    for (int j = 0; j < a.dimension(); ++j) {
      if (!depends_on(c, j)) continue;
      std::vector<int> idx{j};
      idx.insert(idx.end(), set[r].begin(), set[r].end());
      out.add_term(std::move(idx), differentiate(c, j));
    }
  }
  return out;
}

/// ι_X a. Raises DegreeError on 0-forms.
inline DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "interior product");
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  DifferentialForm out(a.chart(), a.degree() - 1);
  const auto& set = a.indices();
  for (std::size_t r = 0; r < set.size(); ++r) {
    const Expr& c = a.coefficients()[r];
    if (c.is_zero()) continue;
    const auto& idx = set[r];
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      const Expr& xi = x.component(idx[pos]);
      if (xi.is_zero()) continue;
      std::vector<int> rest = idx;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
      const Expr term = xi * c;
      out.add_term(std::move(rest), pos % 2 == 0 ? term : -term);
    }
  }
  return out;
}

/// L_X a = ι_X da + d ι_X a. Terms that vanish for degree reasons are skipped.
inline DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "lie derivative");
  DifferentialForm out(a.chart(), a.degree());
  if (a.degree() < a.dimension()) out = out + interior_product(x, exterior_derivative(a));
  if (a.degree() > 0) out = out + exterior_derivative(interior_product(x, a));
  return out;
}

/// F*a, with a on the target chart of F.
inline DifferentialForm pullback_form(const SmoothMap& map, const DifferentialForm& a) {
  if (!same_chart(map.target(), a.chart()))
    throw ChartMismatchError("pullback along \"" + map.name() + "\": form lives on \"" + a.chart()->name() +
                             "\", map targets \"" + map.target()->name() + "\"");
  const ChartPtr& src = map.source();
  std::vector<DifferentialForm> dF;
  dF.reserve(static_cast<std::size_t>(a.dimension()));
  for (int i = 0; i < a.dimension(); ++i) {
    DifferentialForm d(src, 1);
    for (int j = 0; j < src->dimension(); ++j) d.add_term({j}, map.partial(i, j));
    dF.push_back(std::move(d));
  }
  const int k = a.degree();
  if (k > src->dimension()) {
    // Too high a degree for the source: the pullback is identically zero,
    // but the result type cannot represent it.
    throw DegreeError("pullback of a " + std::to_string(k) + "-form to a chart of dimension " +
                      std::to_string(src->dimension()));
  }
  DifferentialForm out(src, k);
  const auto& set = a.indices();
  for (std::size_t r = 0; r < set.size(); ++r) {
    const Expr& c = a.coefficients()[r];
    if (c.is_zero()) continue;
    DifferentialForm term = DifferentialForm::function(src, substitute(c, map.components()));
    for (int i : set[r]) term = wedge(term, dF[static_cast<std::size_t>(i)]);
    out = out + term;
  }
  return out;
}

/// Σ a_i dx_i for a list of one-form coefficients.
inline DifferentialForm one_form(const ChartPtr& chart, std::vector<Expr> coefficients) {
  return DifferentialForm(chart, 1, std::move(coefficients));
}

// ---------------------------------------------------------------------------
// Pointwise operations on coefficient vectors

namespace pointwise {

inline Eigen::VectorXd wedge(int n, int ka, const Eigen::VectorXd& a, int kb, const Eigen::VectorXd& b) {
  const auto& ia = multi_indices(n, ka);
  const auto& ib = multi_indices(n, kb);
  const auto& out_set = multi_indices(n, ka + kb);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_set.size()));
  for (std::size_t r = 0; r < ia.size(); ++r) {
    if (a(static_cast<Eigen::Index>(r)) == 0.0) continue;
    for (std::size_t s = 0; s < ib.size(); ++s) {
      std::vector<int> idx = ia[r];
      idx.insert(idx.end(), ib[s].begin(), ib[s].end());
      const int sign = sort_with_sign(idx);
      if (sign == 0) continue;
      out(static_cast<Eigen::Index>(out_set.rank_of(idx))) +=
          sign * a(static_cast<Eigen::Index>(r)) * b(static_cast<Eigen::Index>(s));
    }
  }
  return out;
}

/// Pulls back the k-form coefficients `a` (on the target) through `jac`
/// (target-dim × source-dim): (F*a)_J = Σ_I a_I det(jac[I, J]).
inline Eigen::VectorXd pullback(int k, const Eigen::VectorXd& a, const Eigen::MatrixXd& jac) {
  const int m = static_cast<int>(jac.rows());
  const int n = static_cast<int>(jac.cols());
  const auto& target_set = multi_indices(m, k);
  const auto& source_set = multi_indices(n, k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(source_set.size()));
  for (std::size_t r = 0; r < target_set.size(); ++r) {
    const double c = a(static_cast<Eigen::Index>(r));
    if (c == 0.0) continue;
    for (std::size_t s = 0; s < source_set.size(); ++s)
      out(static_cast<Eigen::Index>(s)) += c * minor_det(jac, target_set[r], source_set[s]);
  }
  return out;
}

/// Linear map from k-form coefficients on the target to k-form coefficients on
/// the source, so that pullback(k, a, jac) == pullback_matrix(k, jac) * a.
inline Eigen::MatrixXd pullback_matrix(int k, const Eigen::MatrixXd& jac) {
  const int m = static_cast<int>(jac.rows());
  const int n = static_cast<int>(jac.cols());
  const auto& target_set = multi_indices(m, k);
  const auto& source_set = multi_indices(n, k);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(source_set.size()), static_cast<Eigen::Index>(target_set.size()));
  for (std::size_t s = 0; s < source_set.size(); ++s)
    for (std::size_t r = 0; r < target_set.size(); ++r)
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r)) = minor_det(jac, target_set[r], source_set[s]);
  return out;
}

inline Eigen::VectorXd interior(int n, int k, const Eigen::VectorXd& v, const Eigen::VectorXd& a) {
  const auto& set = multi_indices(n, k);
  const auto& out_set = multi_indices(n, k - 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_set.size()));
  for (std::size_t r = 0; r < set.size(); ++r) {
    const double c = a(static_cast<Eigen::Index>(r));
    if (c == 0.0) continue;
    for (std::size_t pos = 0; pos < set[r].size(); ++pos) {
      std::vector<int> rest = set[r];
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
      const double term = v(set[r][pos]) * c;
      out(static_cast<Eigen::Index>(out_set.rank_of(rest))) += pos % 2 == 0 ? term : -term;
    }
  }
  return out;
}

/// a(v_1, ..., v_k) with the vectors as columns of `vectors`.
inline double evaluate(int n, int k, const Eigen::VectorXd& a, const Eigen::MatrixXd& vectors) {
  const auto& set = multi_indices(n, k);
  std::vector<int> cols(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) cols[static_cast<std::size_t>(c)] = c;
  double out = 0.0;
  for (std::size_t r = 0; r < set.size(); ++r) out += a(static_cast<Eigen::Index>(r)) * minor_det(vectors, set[r], cols);
  return out;
}

/// Antisymmetric matrix W with W(i, j) = a(∂_i, ∂_j) for a 2-form.
inline Eigen::MatrixXd two_form_matrix(int n, const Eigen::VectorXd& a) {
  const auto& set = multi_indices(n, 2);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < set.size(); ++r) {
    w(set[r][0], set[r][1]) = a(static_cast<Eigen::Index>(r));
    w(set[r][1], set[r][0]) = -a(static_cast<Eigen::Index>(r));
  }
  return w;
}

}  // namespace pointwise

/// A k-form on a chart known either symbolically or through an evaluator
/// returning coefficient vectors on increasing multi-indices.
class FormField {
 public:
  using Evaluator = std::function<Eigen::VectorXd(const Point&)>;

  FormField(const DifferentialForm& form)  // NOLINT: symbolic forms convert implicitly
      : chart_(form.chart()), degree_(form.degree()), symbolic_(form) {}

  FormField(ChartPtr chart, int degree, Evaluator eval, std::string description = {})
      : chart_(std::move(chart)), degree_(degree), eval_(std::move(eval)), description_(std::move(description)) {}

  const ChartPtr& chart() const noexcept { return chart_; }
  int degree() const noexcept { return degree_; }
  int dimension() const noexcept { return chart_->dimension(); }
  bool is_symbolic() const noexcept { return symbolic_.has_value(); }
  const DifferentialForm& symbolic() const { return *symbolic_; }
  const std::string& description() const noexcept { return description_; }

  Eigen::VectorXd at(const Point& p) const {
    require_same_chart(p.chart(), chart_, "form field evaluation");
    return symbolic_ ? symbolic_->at(p.values()) : eval_(p);
  }

 private:
  ChartPtr chart_;
  int degree_;
  std::optional<DifferentialForm> symbolic_;
  Evaluator eval_;
  std::string description_;
};

/// (F*a)(p) computed pointwise from the Jacobian of F at p.
inline Eigen::VectorXd pullback_at(const SmoothMap& map, const FormField& a, const Point& p) {
  require_same_chart(map.target(), a.chart(), "pointwise pullback along \"" + map.name() + "\"");
  return pointwise::pullback(a.degree(), a.at(map(p)), map.jacobian(p));
}

/// Exterior derivative of a pointwise form at p from the fourth-order central
/// difference stencil in each coordinate.
inline Eigen::VectorXd exterior_derivative_fd(const FormField& a, const Point& p, double h = 1e-3) {
  const int n = a.dimension();
  const int k = a.degree();
  if (k >= n) throw DegreeError("exterior derivative of a top-degree form");
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto shifted = [&](double step) {
      std::vector<double> x(p.values().begin(), p.values().end());
      x[static_cast<std::size_t>(j)] += step;
      return a.at(Point(p.chart(), std::move(x)));
    };
    partial[static_cast<std::size_t>(j)] =
        (8.0 * (shifted(h) - shifted(-h)) - (shifted(2.0 * h) - shifted(-2.0 * h))) / (12.0 * h);
  }
  const auto& set = multi_indices(n, k);
  const auto& out_set = multi_indices(n, k + 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_set.size()));
  for (std::size_t r = 0; r < set.size(); ++r) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> idx{j};
      idx.insert(idx.end(), set[r].begin(), set[r].end());
      const int sign = sort_with_sign(idx);
      if (sign == 0) continue;
      out(static_cast<Eigen::Index>(out_set.rank_of(idx))) +=
          sign * partial[static_cast<std::size_t>(j)](static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

/// dα at p: symbolic when α is symbolic, otherwise by finite differences.
inline Eigen::VectorXd exterior_derivative_at(const FormField& a, const Point& p) {
  if (a.is_symbolic()) return exterior_derivative(a.symbolic()).at(p);
  return exterior_derivative_fd(a, p);
}

/// Pointwise value of a form on k vectors (columns).
inline double evaluate_form(const FormField& a, const Point& p, const Eigen::MatrixXd& vectors) {
  if (vectors.cols() != a.degree()) throw DegreeError("form of degree " + std::to_string(a.degree()) + " needs that many vectors");
  return pointwise::evaluate(a.dimension(), a.degree(), a.at(p), vectors);
}

}  // namespace cosym
