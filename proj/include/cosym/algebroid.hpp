#pragma once

// The central-extension algebroid T*M ⊕ R over a Poisson chart, evaluated on
// exact sections (df, g), and IM forms on it.
//
// Convention: the Hamiltonian field of f on the base is X_f = π(df, ·), i.e.
// X_f^i = Σ_j π^{ji} ∂_j f, and {f, g} = π(df, dg) = X_f(g). With π = ∂q∧∂p
// this gives X_q = ∂p, and ρ is a bracket homomorphism.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosym/action.hpp"
#include "cosym/cosymplectic.hpp"
#include "cosym/forms.hpp"
#include "cosym/groupoid.hpp"
#include "cosym/linalg.hpp"
#include "cosym/report.hpp"

namespace cosym {

/// Bivector stored by its strictly upper entries π^{ij}, i < j.
class PoissonBase {
 public:
  explicit PoissonBase(ChartPtr chart) : chart_(std::move(chart)) {
    const int n = chart_->dimension();
    upper_.assign(static_cast<std::size_t>(n * n), Expr());
  }

  static PoissonBase zero(ChartPtr chart) { return PoissonBase(std::move(chart)); }

  /// The standard structure π = Σ ∂q_i ∧ ∂p_i for coordinate index pairs (q_i, p_i).
  static PoissonBase symplectic(ChartPtr chart, const std::vector<std::pair<int, int>>& pairs) {
    PoissonBase out(std::move(chart));
    for (auto [q, p] : pairs) out.set(q, p, Expr(1.0));
    return out;
  }

  /// Sets π^{ij} (and implicitly π^{ji} = −π^{ij}).
  void set(int i, int j, const Expr& value) {
    if (i == j) throw Error("bivector diagonal is zero by antisymmetry");
    if (max_variable_index(value) >= dimension()) throw ChartMismatchError("bivector entry references a foreign coordinate");
    if (i < j) upper_[slot(i, j)] = value;
    else upper_[slot(j, i)] = -value;
  }

  const ChartPtr& chart() const noexcept { return chart_; }
  int dimension() const noexcept { return chart_->dimension(); }

  Expr entry(int i, int j) const {
    if (i == j) return Expr();
    return i < j ? upper_[slot(i, j)] : -upper_[slot(j, i)];
  }

  bool is_zero() const {
    return std::all_of(upper_.begin(), upper_.end(), [](const Expr& e) { return e.is_zero(); });
  }

  VectorField hamiltonian(const Expr& f) const {
    std::vector<Expr> comps;
    for (int i = 0; i < dimension(); ++i) {
      Expr c;
      for (int j = 0; j < dimension(); ++j) c = c + entry(j, i) * differentiate(f, j);
      comps.push_back(c);
    }
    return VectorField(chart_, std::move(comps), "X_f");
  }

  Expr bracket(const Expr& f, const Expr& g) const {
    Expr out;
    for (int i = 0; i < dimension(); ++i)
      for (int j = i + 1; j < dimension(); ++j) {
        const Expr& p = upper_[slot(i, j)];
        if (p.is_zero()) continue;
        out = out + p * (differentiate(f, i) * differentiate(g, j) - differentiate(f, j) * differentiate(g, i));
      }
    return out;
  }

 private:
  std::size_t slot(int i, int j) const { return static_cast<std::size_t>(i * dimension() + j); }

  ChartPtr chart_;
  std::vector<Expr> upper_;
};

/// The section (df, g) of T*M ⊕ R.
struct ExactSection {
  Expr f;
  Expr g;
};

inline VectorField anchor(const PoissonBase& base, const ExactSection& a) { return base.hamiltonian(a.f); }

/// [(df₁, g₁), (df₂, g₂)] = (d{f₁, f₂}, X_{f₁} g₂ − X_{f₂} g₁).
inline ExactSection bracket(const PoissonBase& base, const ExactSection& a, const ExactSection& b) {
  return ExactSection{base.bracket(a.f, b.f), anchor(base, a).apply(b.g) - anchor(base, b).apply(a.g)};
}

/// A linear bundle map μ: T*M ⊕ R → T*M and ν: T*M ⊕ R → R with Expr entries:
/// μ(df, g)_i = Σ_j mu[i][j] ∂_j f + mu[i][n] g, ν(df, g) = Σ_j nu[j] ∂_j f + nu[n] g.
struct IMFormPair {
  ChartPtr base;
  std::vector<std::vector<Expr>> mu;
  std::vector<Expr> nu;

  /// μ = pr₁, ν = pr₂.
  static IMFormPair standard(const ChartPtr& chart) {
    const int n = chart->dimension();
    IMFormPair out{chart, std::vector<std::vector<Expr>>(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n + 1))),
                   std::vector<Expr>(static_cast<std::size_t>(n + 1))};
    for (int i = 0; i < n; ++i) out.mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Expr(1.0);
    out.nu[static_cast<std::size_t>(n)] = Expr(1.0);
    return out;
  }

  int dimension() const { return base->dimension(); }

  void validate() const {
    const auto n = static_cast<std::size_t>(dimension());
    if (mu.size() != n || nu.size() != n + 1) throw Error("IM form tables have the wrong shape");
    for (const auto& row : mu)
      if (row.size() != n + 1) throw Error("IM form tables have the wrong shape");
  }

  DifferentialForm mu_of(const ExactSection& a) const {
    const int n = dimension();
    std::vector<Expr> coeffs;
    for (int i = 0; i < n; ++i) {
      const auto& row = mu[static_cast<std::size_t>(i)];
      Expr c = row[static_cast<std::size_t>(n)] * a.g;
      for (int j = 0; j < n; ++j) c = c + row[static_cast<std::size_t>(j)] * differentiate(a.f, j);
      coeffs.push_back(c);
    }
    return DifferentialForm(base, 1, std::move(coeffs));
  }

  Expr nu_of(const ExactSection& a) const {
    const int n = dimension();
    Expr c = nu[static_cast<std::size_t>(n)] * a.g;
    for (int j = 0; j < n; ++j) c = c + nu[static_cast<std::size_t>(j)] * differentiate(a.f, j);
    return c;
  }
};

namespace detail {

inline double scalar_at(const DifferentialForm& zero_form, const Point& p) { return zero_form.at(p)(0); }

/// Index pairs (i, j), i < j, over a corpus; bounded so large corpora stay cheap.
inline std::vector<std::pair<std::size_t, std::size_t>> corpus_pairs(std::size_t n, std::size_t limit = 24) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n && out.size() < limit; ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace detail

/// Random polynomial sections (f, g) of degree <= `degree`.
inline std::vector<ExactSection> section_corpus(const ChartPtr& chart, std::size_t count, int degree, std::uint64_t seed) {
  const auto polys = polynomial_corpus(chart, 2 * count, degree, seed);
  std::vector<ExactSection> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(ExactSection{polys[2 * i], polys[2 * i + 1]});
  return out;
}

/// Jacobi identity for the base bracket on a function corpus.
inline CheckReport verify_poisson_base(const PoissonBase& base, const std::vector<Expr>& functions, const Sampling& sampling,
                                       const Tolerances& tol) {
  CheckReport r;
  r.subject = "poisson base";
  r.seed = sampling.seed;
  const auto pts = detail::samples_for(base.chart(), sampling, "poisson-base");
  Residual jac;
  const std::size_t m = functions.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Expr& f = functions[i];
    const Expr& g = functions[(i + 1) % m];
    const Expr& h = functions[(i + 2) % m];
    const Expr j = base.bracket(f, base.bracket(g, h)) + base.bracket(g, base.bracket(h, f)) + base.bracket(h, base.bracket(f, g));
    for (const auto& p : pts) jac.add(std::abs(eval(j, p.values())));
  }
  r.add(jac.upper("jacobi", tol.jacobi));
  return r;
}

/// Antisymmetry, Jacobi, anchor homomorphism and anchor Leibniz rule on a corpus.
inline CheckReport verify_central_extension(const PoissonBase& base, const std::vector<ExactSection>& corpus,
                                            const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "central extension";
  r.seed = sampling.seed;
  const auto pts = detail::samples_for(base.chart(), sampling, "central-extension");
  const int n = base.dimension();
  Residual anti, jac, hom, leib;
  const std::size_t m = corpus.size();
  for (auto [i, j] : detail::corpus_pairs(m)) {
    const ExactSection& a = corpus[i];
    const ExactSection& b = corpus[j];
    const ExactSection& c = corpus[(j + 1) % m];
    const ExactSection ab = bracket(base, a, b);
    const ExactSection ba = bracket(base, b, a);
    const ExactSection j1 = bracket(base, bracket(base, a, b), c);
    const ExactSection j2 = bracket(base, bracket(base, b, c), a);
    const ExactSection j3 = bracket(base, bracket(base, c, a), b);
    const VectorField rho_ab = anchor(base, ab);
    const VectorField comm = lie_bracket(anchor(base, a), anchor(base, b));
    const VectorField rho_a = anchor(base, a);
    const Expr lhs = rho_a.apply(b.f * c.g);
    const Expr rhs = rho_a.apply(b.f) * c.g + b.f * rho_a.apply(c.g);
    // Jacobi is checked on the differential of the first component.
    const auto d_sum = gradient(j1.f + j2.f + j3.f, n);
    for (const auto& p : pts) {
      const auto x = p.values();
      anti.add(std::max(std::abs(eval(ab.f, x) + eval(ba.f, x)), std::abs(eval(ab.g, x) + eval(ba.g, x))));
      jac.add(std::max(linalg::max_abs(gradient_at(d_sum, x)), std::abs(eval(j1.g + j2.g + j3.g, x))));
      hom.add(linalg::max_abs(rho_ab.at(x) - comm.at(x)));
      leib.add(std::abs(eval(lhs, x) - eval(rhs, x)));
    }
  }
  r.add(anti.upper("bracket antisymmetric", tol.solve));
  r.add(jac.upper("bracket jacobi", tol.jacobi));
  r.add(hom.upper("anchor preserves brackets", tol.tol));
  r.add(leib.upper("anchor leibniz", tol.solve));
  return r;
}

/// ι_{ρa}μ(b) + ι_{ρb}μ(a) = 0 and μ([a,b]) − L_{ρa}μ(b) + ι_{ρb}dμ(a) = 0.
inline CheckReport verify_im_2form(const PoissonBase& base, const IMFormPair& im, const std::vector<ExactSection>& corpus,
                                   const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "IM 2-form";
  r.seed = sampling.seed;
  im.validate();
  require_same_chart(im.base, base.chart(), "IM 2-form");
  const auto pts = detail::samples_for(base.chart(), sampling, "im-2form");
  const int n = base.dimension();
  Residual skew, bckt;
  for (auto [i, j] : detail::corpus_pairs(corpus.size())) {
    const ExactSection& a = corpus[i];
    const ExactSection& b = corpus[j];
    const VectorField ra = anchor(base, a);
    const VectorField rb = anchor(base, b);
    const DifferentialForm ma = im.mu_of(a);
    const DifferentialForm mb = im.mu_of(b);
    const DifferentialForm s = interior_product(ra, mb) + interior_product(rb, ma);
    DifferentialForm e = im.mu_of(bracket(base, a, b)) - lie_derivative(ra, mb);
    if (n > 1) e = e + interior_product(rb, exterior_derivative(ma));
    for (const auto& p : pts) {
      skew.add(std::abs(detail::scalar_at(s, p)));
      bckt.add(linalg::max_abs(e.at(p)));
    }
  }
  r.add(skew.upper("IM-skew", tol.tol));
  r.add(bckt.upper("IM-bracket", tol.tol));
  return r;
}

/// ν([a,b]) − ρ(a)ν(b) + ρ(b)ν(a) = 0.
inline CheckReport verify_im_1form(const PoissonBase& base, const IMFormPair& im, const std::vector<ExactSection>& corpus,
                                   const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "IM 1-form";
  r.seed = sampling.seed;
  im.validate();
  require_same_chart(im.base, base.chart(), "IM 1-form");
  const auto pts = detail::samples_for(base.chart(), sampling, "im-1form");
  Residual res;
  for (auto [i, j] : detail::corpus_pairs(corpus.size())) {
    const ExactSection& a = corpus[i];
    const ExactSection& b = corpus[j];
    const Expr e = im.nu_of(bracket(base, a, b)) - anchor(base, a).apply(im.nu_of(b)) + anchor(base, b).apply(im.nu_of(a));
    for (const auto& p : pts) res.add(std::abs(eval(e, p.values())));
  }
  r.add(res.upper("IM-nu", tol.tol));
  return r;
}

// ---------------------------------------------------------------------------
// IM forms induced by a cosymplectic groupoid at its units

/// At a unit x, A_x = ker ds at ε(x); μ_x(u)(X) = ω(u, dε X) and ν_x(u) = η(u).
/// The maps are returned on all of T_{ε(x)}𝒢; `kernel` spans A_x.
struct InducedIMForms {
  ChartPtr base;
  std::function<Eigen::MatrixXd(const Point&)> kernel;  // columns span A_x
  std::function<Eigen::MatrixXd(const Point&)> mu;      // dim M × dim 𝒢
  std::function<Eigen::RowVectorXd(const Point&)> nu;   // 1 × dim 𝒢
};

inline InducedIMForms induced_im_forms(const GroupoidPresentation& g, const CosymplecticStructure& s) {
  require_same_chart(s.chart(), g.arrows(), "induced IM forms");
  const int m = g.units()->dimension();
  const int dim = g.arrows()->dimension();
  InducedIMForms out;
  out.base = g.units();
  out.kernel = [g, m, dim](const Point& x) {
    const Eigen::MatrixXd a = linalg::null_space(g.source.jacobian(g.unit(x)));
    if (a.cols() != dim - m)
      throw RankError("ker ds at a unit has dimension " + std::to_string(a.cols()) + ", expected " + std::to_string(dim - m));
    return a;
  };
  out.mu = [g, s](const Point& x) {
    const Point e = g.unit(x);
    return Eigen::MatrixXd(g.unit.jacobian(x).transpose() * s.omega_matrix(e).transpose());
  };
  out.nu = [g, s](const Point& x) { return Eigen::RowVectorXd(s.eta_at(g.unit(x)).transpose()); };
  return out;
}

/// The induced pair is an isomorphism A → T*M ⊕ R at sampled units; through
/// it, (μ, ν) become (pr₁, pr₂), whose IM equations are then checked on `base`.
inline CheckReport verify_induced_im_forms(const GroupoidPresentation& g, const CosymplecticStructure& s,
                                           const PoissonBase& base, const std::vector<ExactSection>& corpus,
                                           const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "induced IM forms on " + g.name;
  r.seed = sampling.seed;
  require_same_chart(base.chart(), g.units(), "induced IM base");
  const int m = g.units()->dimension();
  try {
    const InducedIMForms im = induced_im_forms(g, s);
    Residual iso, reeb_mu, reeb_nu;
    for (const auto& x : detail::samples_for(g.units(), sampling, "induced-im")) {
      const Eigen::MatrixXd a = im.kernel(x);
      if (a.cols() != m + 1) {
        r.add_exact("algebroid rank is dim M + 1", false, "rank " + std::to_string(a.cols()));
        return r;
      }
      Eigen::MatrixXd phi(m + 1, a.cols());
      phi << im.mu(x) * a, im.nu(x) * a;
      const Eigen::VectorXd sv = linalg::singular_values(phi);
      iso.add(sv(sv.size() - 1));
      // Pairing the Reeb field at a unit: μ(ξ) = 0 since ι_ξ ω = 0, ν(ξ) = 1.
      const Eigen::VectorXd xi = s.reeb(g.unit(x));
      reeb_mu.add(linalg::max_abs(im.mu(x) * xi));
      reeb_nu.add(std::abs((im.nu(x) * xi)(0) - 1.0));
    }
    r.add(iso.lower("(mu, nu) is an isomorphism onto T*M+R", linalg::rank_tolerance));
    r.add(reeb_nu.upper("nu(xi) = 1", tol.tol));
    r.add(reeb_mu.upper("mu(xi) = 0", tol.tol));
  } catch (const Error& e) {
    r.add_error("induced IM forms", e.what());
    return r;
  }
  const IMFormPair standard = IMFormPair::standard(g.units());
  r.merge(verify_im_2form(base, standard, corpus, sampling, tol), "transported");
  r.merge(verify_im_1form(base, standard, corpus, sampling, tol), "transported");
  return r;
}

// ---------------------------------------------------------------------------
// The infinitesimal moment map a ↦ ⟨μ(a), v_M⟩

/// Morphism identity J([a,b]) − ρ(a)J(b) + ρ(b)J(a) = 0 per generator (which is
/// J([a,b]) = 0 when π = 0), and invariance J(a)∘φ_g = J(a) for invariant sections.
inline CheckReport verify_infinitesimal_moment(const PoissonBase& base, const GroupAction& action, const IMFormPair& im,
                                               const std::vector<ExactSection>& corpus, const Sampling& sampling,
                                               const Tolerances& tol) {
  CheckReport r;
  r.subject = "infinitesimal moment map";
  r.seed = sampling.seed;
  require_same_chart(action.chart(), base.chart(), "infinitesimal moment map");
  im.validate();
  auto moment = [&](const ExactSection& a, int v) {
    return interior_product(action.fundamental_vf(v), im.mu_of(a)).coefficients()[0];
  };
  const auto pts = detail::samples_for(base.chart(), sampling, "inf-moment");
  const auto gs = action.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("inf-moment-g")));
  Residual morph, equiv;
  std::size_t invariant = 0;
  for (int v = 0; v < action.dimension(); ++v) {
    for (auto [i, j] : detail::corpus_pairs(corpus.size())) {
      const ExactSection& a = corpus[i];
      const ExactSection& b = corpus[j];
      const Expr e = moment(bracket(base, a, b), v) - anchor(base, a).apply(moment(b, v)) + anchor(base, b).apply(moment(a, v));
      for (const auto& p : pts) morph.add(std::abs(eval(e, p.values())));
    }
    for (const auto& a : corpus) {
      const VectorField& vm = action.fundamental_vf(v);
      bool inv = true;
      for (const auto& p : pts) {
        if (std::abs(eval(vm.apply(a.f), p.values())) > tol.solve || std::abs(eval(vm.apply(a.g), p.values())) > tol.solve) {
          inv = false;
          break;
        }
      }
      if (!inv) continue;
      ++invariant;
      const Expr jv = moment(a, v);
      for (std::size_t s = 0; s < pts.size(); ++s)
        equiv.add(std::abs(eval(jv, action.apply(gs[s], pts[s]).values()) - eval(jv, pts[s].values())));
    }
  }
  r.add(morph.upper("bracket morphism identity", tol.tol));
  if (invariant > 0) r.add(equiv.upper("equivariance on invariant sections", tol.solve));
  else r.flag_unverified("equivariance (no invariant sections in the corpus)");
  return r;
}

}  // namespace cosym
