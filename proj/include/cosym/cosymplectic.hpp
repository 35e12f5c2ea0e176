#pragma once

// Cosymplectic structures (ω, η) on a chart of odd dimension 2n+1.
//
// Conventions: the flat map is X ↦ ι_X ω + (ι_X η) η, the Reeb field solves
// ♭(ξ) = η, the Hamiltonian field of f solves ♭(X_f) = df − ξ(f) η, and
// {f, g} = ω(X_f, X_g). With ω = dq∧dp this gives X_q = −∂p and {q, p} = 1.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosym/action.hpp"
#include "cosym/forms.hpp"
#include "cosym/linalg.hpp"
#include "cosym/report.hpp"

namespace cosym {

class CosymplecticStructure {
 public:
  CosymplecticStructure(FormField omega, FormField eta, std::string name = {})
      : omega_(std::move(omega)), eta_(std::move(eta)), name_(std::move(name)) {
    require_same_chart(omega_.chart(), eta_.chart(), "cosymplectic pair");
    if (omega_.degree() != 2) throw DegreeError("ω must be a 2-form");
    if (eta_.degree() != 1) throw DegreeError("η must be a 1-form");
  }

  const ChartPtr& chart() const noexcept { return omega_.chart(); }
  int dimension() const noexcept { return omega_.dimension(); }
  const FormField& omega() const noexcept { return omega_; }
  const FormField& eta() const noexcept { return eta_; }
  const std::string& name() const noexcept { return name_; }

  /// W(i, j) = ω(∂_i, ∂_j).
  Eigen::MatrixXd omega_matrix(const Point& p) const { return pointwise::two_form_matrix(dimension(), omega_.at(p)); }
  Eigen::VectorXd eta_at(const Point& p) const { return eta_.at(p); }

  /// Matrix of ♭ in the coordinate frame: ♭(X) = F X.
  Eigen::MatrixXd flat_matrix(const Point& p) const {
    const Eigen::VectorXd e = eta_at(p);
    return omega_matrix(p).transpose() + e * e.transpose();
  }

  Eigen::VectorXd flat(const Point& p, const Eigen::VectorXd& x) const { return flat_matrix(p) * x; }

  Eigen::VectorXd flat_inverse(const Point& p, const Eigen::VectorXd& alpha) const {
    return linalg::solve_square(flat_matrix(p), alpha, "flat map of \"" + name_ + "\"");
  }

  Eigen::VectorXd reeb(const Point& p) const { return flat_inverse(p, eta_at(p)); }

  /// X_f from the differential of f at p.
  Eigen::VectorXd hamiltonian(const Point& p, const Eigen::VectorXd& df) const {
    const Eigen::MatrixXd f = flat_matrix(p);
    const Eigen::VectorXd e = eta_at(p);
    const Eigen::VectorXd xi = linalg::solve_square(f, e, "Reeb field of \"" + name_ + "\"");
    return linalg::solve_square(f, df - xi.dot(df) * e, "Hamiltonian field of \"" + name_ + "\"");
  }

  Eigen::VectorXd hamiltonian(const Point& p, const Expr& f) const {
    return hamiltonian(p, gradient_at(gradient(f, dimension()), p.values()));
  }

  double poisson(const Point& p, const Eigen::VectorXd& df, const Eigen::VectorXd& dg) const {
    return hamiltonian(p, df).dot(omega_matrix(p) * hamiltonian(p, dg));
  }

  double poisson(const Point& p, const Expr& f, const Expr& g) const {
    const int n = dimension();
    return poisson(p, gradient_at(gradient(f, n), p.values()), gradient_at(gradient(g, n), p.values()));
  }

  /// Top coefficient of ωⁿ∧η (0 when the dimension is even).
  double volume(const Point& p) const {
    const int dim = dimension();
    if (dim % 2 == 0) return 0.0;
    const Eigen::VectorXd w = omega_.at(p);
    Eigen::VectorXd power = Eigen::VectorXd::Ones(1);
    for (int j = 0; j < dim / 2; ++j) power = pointwise::wedge(dim, 2 * j, power, 2, w);
    return pointwise::wedge(dim, dim - 1, power, 1, eta_at(p))(0);
  }

  /// Orthonormal basis of ker η_p (columns). Raises RankError when η_p = 0.
  Eigen::MatrixXd leaf_basis(const Point& p) const {
    const Eigen::VectorXd e = eta_at(p);
    const Eigen::MatrixXd b = linalg::null_space(e.transpose());
    if (b.cols() != dimension() - 1) throw RankError("η vanishes at a sample point of \"" + name_ + "\"");
    return b;
  }

 private:
  FormField omega_;
  FormField eta_;
  std::string name_;
};

namespace detail {

inline std::vector<Point> samples_for(const ChartPtr& chart, const Sampling& sampling, std::string_view stream) {
  return sample_points(chart, sampling.samples, derive_seed(sampling.seed, stream_id(stream)));
}

/// Max sampled coefficient of dα (symbolic or finite-difference).
inline void closedness(CheckReport& r, const std::string& label, const FormField& a, const std::vector<Point>& pts,
                       const Tolerances& tol) {
  if (a.degree() >= a.dimension()) {
    r.add_exact(label + " closed", true, "top degree");
    return;
  }
  Residual res;
  if (a.is_symbolic()) {
    const DifferentialForm da = exterior_derivative(a.symbolic());
    for (const auto& p : pts) res.add(linalg::max_abs(da.at(p)));
    r.add(res.upper(label + " closed", tol.closed));
  } else {
    for (const auto& p : pts) res.add(linalg::max_abs(exterior_derivative_fd(a, p)));
    r.add(res.upper(label + " closed", tol.fd_closed, "finite-difference check of a pointwise form"));
  }
}

}  // namespace detail

/// Closedness, odd dimension, ωⁿ∧η nonvanishing and flat invertibility.
/// With `unit_dimension`, also the groupoid count dim = 2·dim(units) + 1.
inline CheckReport verify_cosymplectic(const CosymplecticStructure& s, const Sampling& sampling, const Tolerances& tol,
                                       std::optional<int> unit_dimension = std::nullopt) {
  CheckReport r;
  r.subject = "cosymplectic " + s.name();
  r.seed = sampling.seed;
  const int dim = s.dimension();
  r.add_exact("odd dimension", dim % 2 == 1, "dimension " + std::to_string(dim));
  if (unit_dimension)
    r.add_exact("dimension is 2*units+1", dim == 2 * *unit_dimension + 1,
                std::to_string(dim) + " vs 2*" + std::to_string(*unit_dimension) + "+1");
  const auto pts = detail::samples_for(s.chart(), sampling, "cosymplectic");
  detail::closedness(r, "omega", s.omega(), pts, tol);
  detail::closedness(r, "eta", s.eta(), pts, tol);
  if (dim % 2 == 1) {
    Residual vol, sv;
    double worst_condition = 1.0;
    for (const auto& p : pts) {
      vol.add(std::abs(s.volume(p)));
      const Eigen::VectorXd sing = linalg::singular_values(s.flat_matrix(p));
      sv.add(sing(sing.size() - 1));
      worst_condition = std::max(worst_condition, linalg::condition_number(s.flat_matrix(p)));
    }
    r.add(vol.lower("volume form nonvanishing", tol.volume));
    char buf[64];
    std::snprintf(buf, sizeof buf, "max condition number %.3g", worst_condition);
    r.add(sv.lower("flat map invertible", linalg::rank_tolerance, buf));
  } else {
    r.add_exact("volume form nonvanishing", false, "no volume form of the shape ω^n∧η in even dimension");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pointwise fields

inline PointwiseVectorField flat_inverse(const CosymplecticStructure& s, const FormField& alpha) {
  require_same_chart(alpha.chart(), s.chart(), "flat inverse");
  if (alpha.degree() != 1) throw DegreeError("flat inverse takes a 1-form");
  return PointwiseVectorField(s.chart(), [s, alpha](const Point& p) { return s.flat_inverse(p, alpha.at(p)); });
}

inline PointwiseVectorField reeb(const CosymplecticStructure& s) {
  return PointwiseVectorField(s.chart(), [s](const Point& p) { return s.reeb(p); });
}

inline PointwiseVectorField hamiltonian_vf(const CosymplecticStructure& s, const Expr& f) {
  auto grad = gradient(f, s.dimension());
  return PointwiseVectorField(s.chart(), [s, grad](const Point& p) { return s.hamiltonian(p, gradient_at(grad, p.values())); });
}

inline PointwiseFunction poisson_bracket(const CosymplecticStructure& s, const Expr& f, const Expr& g) {
  auto gf = gradient(f, s.dimension());
  auto gg = gradient(g, s.dimension());
  return PointwiseFunction(s.chart(), [s, gf, gg](const Point& p) {
    return s.poisson(p, gradient_at(gf, p.values()), gradient_at(gg, p.values()));
  });
}

/// Basis of ker η at p, as columns.
inline Eigen::MatrixXd leaf_distribution(const CosymplecticStructure& s, const Point& p) { return s.leaf_basis(p); }

/// {f, {g, h}} + cyclic at p; the inner brackets are differentiated numerically.
inline double jacobiator(const CosymplecticStructure& s, const Expr& f, const Expr& g, const Expr& h, const Point& p) {
  const int n = s.dimension();
  auto outer = [&](const Expr& a, const Expr& b, const Expr& c) {
    const PointwiseFunction inner = poisson_bracket(s, b, c);
    const Eigen::VectorXd d_inner = gradient_fd([&](const Point& x) { return inner(x); }, p);
    return s.poisson(p, gradient_at(gradient(a, n), p.values()), d_inner);
  };
  return outer(f, g, h) + outer(g, h, f) + outer(h, f, g);
}

// ---------------------------------------------------------------------------
// Sampled identity checks

/// ♭(♭⁻¹(α)) = α for random covectors.
inline CheckReport verify_flat_roundtrip(const CosymplecticStructure& s, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "flat round trip " + s.name();
  r.seed = sampling.seed;
  const auto pts = detail::samples_for(s.chart(), sampling, "flat-roundtrip");
  std::mt19937_64 rng(derive_seed(sampling.seed, stream_id("flat-covectors")));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Residual res;
  try {
    for (const auto& p : pts) {
      Eigen::VectorXd alpha(s.dimension());
      for (int i = 0; i < s.dimension(); ++i) alpha(i) = dist(rng);
      res.add(linalg::max_abs(s.flat(p, s.flat_inverse(p, alpha)) - alpha));
    }
    r.add(res.upper("flat round trip", tol.solve));
  } catch (const Error& e) {
    r.add_error("flat round trip", e.what());
  }
  return r;
}

/// ι_ξ ω = 0, ι_ξ η = 1, L_ξ ω = 0, L_ξ η = 0.
inline CheckReport verify_reeb(const CosymplecticStructure& s, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "reeb " + s.name();
  r.seed = sampling.seed;
  const int n = s.dimension();
  const auto pts = detail::samples_for(s.chart(), sampling, "reeb");
  try {
    Residual iw, ie;
    for (const auto& p : pts) {
      const Eigen::VectorXd xi = s.reeb(p);
      iw.add(linalg::max_abs(pointwise::interior(n, 2, xi, s.omega().at(p))));
      ie.add(std::abs(xi.dot(s.eta_at(p)) - 1.0));
    }
    r.add(iw.upper("i_xi omega = 0", tol.solve));
    r.add(ie.upper("i_xi eta = 1", tol.solve));

    // L_ξ = ι_ξ d + d ι_ξ, with ι_ξ α a pointwise form differentiated numerically.
    auto lie = [&](const FormField& a) {
      const int k = a.degree();
      FormField contracted(s.chart(), k - 1, [s, a, k, n](const Point& x) {
        return pointwise::interior(n, k, s.reeb(x), a.at(x));
      });
      Residual res;
      for (const auto& p : pts) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(n, k)));
        if (k < n) v += pointwise::interior(n, k + 1, s.reeb(p), exterior_derivative_at(a, p));
        v += exterior_derivative_fd(contracted, p);
        res.add(linalg::max_abs(v));
      }
      return res;
    };
    r.add(lie(s.omega()).upper("L_xi omega = 0", tol.solve, "finite-difference Lie derivative"));
    r.add(lie(s.eta()).upper("L_xi eta = 0", tol.solve, "finite-difference Lie derivative"));
  } catch (const Error& e) {
    r.add_error("reeb solve", e.what());
  }
  return r;
}

/// ι_{X_f} ω = df − ξ(f) η and ι_{X_f} η = 0 for each f.
inline CheckReport verify_hamiltonian(const CosymplecticStructure& s, const std::vector<Expr>& functions,
                                      const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "hamiltonian " + s.name();
  r.seed = sampling.seed;
  const int n = s.dimension();
  const auto pts = detail::samples_for(s.chart(), sampling, "hamiltonian");
  Residual w, e;
  try {
    for (const auto& f : functions) {
      const auto grad = gradient(f, n);
      for (const auto& p : pts) {
        const Eigen::VectorXd df = gradient_at(grad, p.values());
        const Eigen::VectorXd x = s.hamiltonian(p, df);
        const Eigen::VectorXd xi = s.reeb(p);
        const Eigen::VectorXd eta = s.eta_at(p);
        w.add(linalg::max_abs(pointwise::interior(n, 2, x, s.omega().at(p)) - (df - xi.dot(df) * eta)));
        e.add(std::abs(x.dot(eta)));
      }
    }
    r.add(w.upper("i_Xf omega = df - xi(f) eta", tol.solve));
    r.add(e.upper("i_Xf eta = 0", tol.solve));
  } catch (const Error& ex) {
    r.add_error("hamiltonian solve", ex.what());
  }
  return r;
}

/// Antisymmetry, Leibniz, Jacobi and ξ acting as a derivation of the bracket,
/// over all ordered triples from `functions` (cyclically, to keep the count linear).
inline CheckReport verify_poisson(const CosymplecticStructure& s, const std::vector<Expr>& functions,
                                  const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "poisson " + s.name();
  r.seed = sampling.seed;
  const int n = s.dimension();
  const auto pts = detail::samples_for(s.chart(), sampling, "poisson");
  const std::size_t m = functions.size();
  if (m == 0) return r;
  Residual anti, leib, jac, reeb_der;
  try {
    for (std::size_t i = 0; i < m; ++i) {
      const Expr& f = functions[i];
      const Expr& g = functions[(i + 1) % m];
      const Expr& h = functions[(i + 2) % m];
      for (const auto& p : pts) {
        anti.add(std::abs(s.poisson(p, f, g) + s.poisson(p, g, f)));
        leib.add(std::abs(s.poisson(p, f, g * h) - s.poisson(p, f, g) * eval(h, p.values()) -
                          eval(g, p.values()) * s.poisson(p, f, h)));
        jac.add(std::abs(jacobiator(s, f, g, h, p)));
        // ξ{f, g} = {ξf, g} + {f, ξg}; ξf is computed pointwise, so its
        // differential comes from finite differences as well.
        const PointwiseFunction fg = poisson_bracket(s, f, g);
        const Eigen::VectorXd xi = s.reeb(p);
        const double lhs = xi.dot(gradient_fd([&](const Point& x) { return fg(x); }, p));
        const auto gf = gradient(f, n);
        const auto gg = gradient(g, n);
        const Eigen::VectorXd d_xif =
            gradient_fd([&](const Point& x) { return s.reeb(x).dot(gradient_at(gf, x.values())); }, p);
        const Eigen::VectorXd d_xig =
            gradient_fd([&](const Point& x) { return s.reeb(x).dot(gradient_at(gg, x.values())); }, p);
        const double rhs = s.poisson(p, d_xif, gradient_at(gg, p.values())) + s.poisson(p, gradient_at(gf, p.values()), d_xig);
        reeb_der.add(std::abs(lhs - rhs));
      }
    }
    r.add(anti.upper("antisymmetry", tol.solve));
    r.add(leib.upper("leibniz", tol.solve));
    r.add(jac.upper("jacobi", tol.jacobi));
    r.add(reeb_der.upper("xi is a poisson vector field", tol.jacobi));
  } catch (const Error& e) {
    r.add_error("poisson solve", e.what());
  }
  return r;
}

/// ker η has dimension 2n, ω restricted to it has full rank, and ξ is transverse.
inline CheckReport verify_leaf_distribution(const CosymplecticStructure& s, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "leaf distribution " + s.name();
  r.seed = sampling.seed;
  const auto pts = detail::samples_for(s.chart(), sampling, "leaves");
  Residual rank_defect, transverse;
  try {
    for (const auto& p : pts) {
      const Eigen::MatrixXd b = s.leaf_basis(p);
      const Eigen::MatrixXd restricted = b.transpose() * s.omega_matrix(p) * b;
      rank_defect.add(static_cast<double>(b.cols() - linalg::rank(restricted)));
      Eigen::MatrixXd frame(s.dimension(), s.dimension());
      frame << b, s.reeb(p);
      transverse.add(std::abs(frame.determinant()));
    }
    r.add(rank_defect.upper("omega nondegenerate on ker eta", 0.0));
    r.add(transverse.lower("reeb transverse to ker eta", tol.volume));
  } catch (const Error& e) {
    r.add_error("leaf distribution", e.what());
  }
  return r;
}

/// Closed and nondegenerate 2-form (used for symplectizations and leaves).
inline CheckReport verify_symplectic(const FormField& omega, const Sampling& sampling, const Tolerances& tol,
                                     const std::string& label = "omega") {
  CheckReport r;
  r.subject = "symplectic " + label;
  r.seed = sampling.seed;
  if (omega.degree() != 2) throw DegreeError("symplectic form must have degree 2");
  r.add_exact("even dimension", omega.dimension() % 2 == 0, "dimension " + std::to_string(omega.dimension()));
  const auto pts = detail::samples_for(omega.chart(), sampling, "symplectic-" + label);
  detail::closedness(r, label, omega, pts, tol);
  Residual det;
  for (const auto& p : pts) det.add(std::abs(pointwise::two_form_matrix(omega.dimension(), omega.at(p)).determinant()));
  r.add(det.lower(label + " nondegenerate", tol.volume));
  return r;
}

// ---------------------------------------------------------------------------
// Constructions

/// (N, i*ω, i*(ι_X ω)) for a hypersurface i: N → M of a symplectic chart and a
/// symplectic field X transverse to it.
inline CosymplecticStructure from_symplectic_hypersurface(const DifferentialForm& omega, const SmoothMap& inclusion,
                                                          const VectorField& x, const Sampling& sampling,
                                                          const Tolerances& tol) {
  const ChartPtr& m = omega.chart();
  require_same_chart(inclusion.target(), m, "hypersurface inclusion");
  require_same_chart(x.chart(), m, "transverse field");
  if (omega.degree() != 2) throw DegreeError("hypersurface construction needs a 2-form");
  const ChartPtr& nchart = inclusion.source();
  if (nchart->dimension() != m->dimension() - 1)
    throw Error("hypersurface chart has dimension " + std::to_string(nchart->dimension()) + ", expected " +
                std::to_string(m->dimension() - 1));

  const DifferentialForm lx = lie_derivative(x, omega);
  for (const auto& p : detail::samples_for(m, sampling, "hypersurface-lie"))
    if (linalg::max_abs(lx.at(p)) >= tol.solve) throw NonSymplecticFieldError("L_X omega does not vanish for \"" + x.name() + "\"");

  for (const auto& p : detail::samples_for(nchart, sampling, "hypersurface-transverse")) {
    const Point ip = inclusion(p);
    Eigen::MatrixXd span(m->dimension(), m->dimension());
    span << inclusion.jacobian(p), x.at(ip);
    if (linalg::rank(span) < m->dimension()) {
      std::string where;
      for (double v : p.values()) where += (where.empty() ? "" : ", ") + std::to_string(v);
      throw TransversalityError("field \"" + x.name() + "\" is tangent to the hypersurface at (" + where + ")");
    }
  }
  return CosymplecticStructure(pullback_form(inclusion, omega), pullback_form(inclusion, interior_product(x, omega)),
                               nchart->name());
}

struct Symplectization {
  ChartPtr chart;          // Q × R with the extra coordinate last
  SmoothMap projection;    // Q × R → Q
  FormField omega;         // pr*ω + dt ∧ pr*η
  int time_index = 0;
};

inline Symplectization symplectization(const CosymplecticStructure& s) {
  const ChartPtr& q = s.chart();
  std::string tname = "t";
  while (q->index_of(tname)) tname += "_";
  std::vector<std::string> coords = q->coordinates();
  coords.push_back(tname);
  std::vector<bool> periodic;
  std::vector<Interval> box;
  for (int i = 0; i < q->dimension(); ++i) {
    periodic.push_back(q->periodic(i));
    box.push_back(q->box(i));
  }
  periodic.push_back(false);
  box.push_back(Interval{});
  ChartPtr prod = make_chart(q->name() + "xR", coords, periodic, box);
  const int t = q->dimension();
  std::vector<Expr> comps;
  for (int i = 0; i < t; ++i) comps.push_back(coordinate(prod, i));
  SmoothMap pr(prod, q, comps, "pr");

  if (s.omega().is_symbolic() && s.eta().is_symbolic()) {
    DifferentialForm w = pullback_form(pr, s.omega().symbolic()) +
                         wedge(DifferentialForm::differential(prod, t), pullback_form(pr, s.eta().symbolic()));
    return Symplectization{prod, pr, FormField(w), t};
  }
  const int dim = prod->dimension();
  Eigen::VectorXd dt = Eigen::VectorXd::Zero(dim);
  dt(t) = 1.0;
  FormField w(prod, 2, [s, pr, dim, dt](const Point& p) {
    const Eigen::MatrixXd jac = pr.jacobian(p);
    const Point base = pr(p);
    return Eigen::VectorXd(pointwise::pullback(2, s.omega().at(base), jac) +
                           pointwise::wedge(dim, 1, dt, 1, pointwise::pullback(1, s.eta().at(base), jac)));
  });
  return Symplectization{prod, pr, std::move(w), t};
}

// ---------------------------------------------------------------------------
// Averaging over torus actions

/// Trapezoidal average of φ_g*α over the torus, `order` nodes per circle factor.
inline FormField average_form(const FormField& alpha, const GroupAction& action, int order) {
  require_same_chart(alpha.chart(), action.chart(), "averaging");
  if (!action.model().compact())
    throw NonCompactGroupError("action \"" + action.name() + "\" has translation parameters; averaging needs a torus");
  if (order < 1) throw Error("quadrature order must be positive");
  const int b = action.dimension();
  std::size_t nodes = 1;
  for (int v = 0; v < b; ++v) nodes *= static_cast<std::size_t>(order);
  const int n = alpha.dimension();
  const int k = alpha.degree();
  return FormField(alpha.chart(), k, [alpha, action, order, b, nodes, n, k](const Point& p) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(n, k)));
    std::vector<double> ext(static_cast<std::size_t>(b + n));
    for (int i = 0; i < n; ++i) ext[static_cast<std::size_t>(b + i)] = p[static_cast<std::size_t>(i)];
    for (std::size_t node = 0; node < nodes; ++node) {
      std::size_t rest = node;
      for (int v = 0; v < b; ++v) {
        ext[static_cast<std::size_t>(v)] = two_pi * static_cast<double>(rest % static_cast<std::size_t>(order)) / order;
        rest /= static_cast<std::size_t>(order);
      }
      const Point moved(p.chart(), action.map().apply_raw(ext));
      const Eigen::MatrixXd jac = action.map().jacobian(ext).rightCols(n);
      sum += pointwise::pullback(k, alpha.at(moved), jac);
    }
    return Eigen::VectorXd(sum / static_cast<double>(nodes));
  }, "average");
}

inline FormField average_one_form(const FormField& eta, const GroupAction& action, int order) {
  if (eta.degree() != 1) throw DegreeError("average_one_form takes a 1-form");
  return average_form(eta, action, order);
}

/// Invariance of the average at `order`, agreement with the 2·order average,
/// and closedness of the result.
inline CheckReport verify_averaging(const FormField& eta, const GroupAction& action, const Sampling& sampling,
                                    const Tolerances& tol, int order = 64) {
  CheckReport r;
  r.subject = "averaging over " + action.name();
  r.seed = sampling.seed;
  try {
    const FormField avg = average_form(eta, action, order);
    const FormField fine = average_form(eta, action, 2 * order);
    const int n = eta.dimension();
    const int k = eta.degree();
    const auto pts = detail::samples_for(eta.chart(), sampling, "averaging");
    const auto gs = action.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("averaging-g")));
    Residual inv, conv;
    for (std::size_t s = 0; s < pts.size(); ++s) {
      const Point& p = pts[s];
      const Eigen::VectorXd here = avg.at(p);
      std::vector<double> ext(gs[s]);
      ext.insert(ext.end(), p.values().begin(), p.values().end());
      const Point moved(p.chart(), action.map().apply_raw(ext));
      const Eigen::MatrixXd jac = action.map().jacobian(ext).rightCols(n);
      inv.add(linalg::max_abs(pointwise::pullback(k, avg.at(moved), jac) - here));
      conv.add(linalg::max_abs(fine.at(p) - here));
    }
    r.add(inv.upper("averaged form invariant", tol.averaging));
    r.add(conv.upper("quadrature order " + std::to_string(order) + " vs " + std::to_string(2 * order), tol.quadrature));
    if (k < n) {
      const auto few = std::vector<Point>(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(pts.size(), 16)));
      detail::closedness(r, "average", avg, few, tol);
      CheckReport input;
      detail::closedness(input, "input", eta, few, tol);
      if (!input.passed()) r.flag_unverified("input form is not closed");
    }
  } catch (const Error& e) {
    r.add_error("averaging", e.what());
  }
  return r;
}

}  // namespace cosym
