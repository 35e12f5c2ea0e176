#pragma once

// Moment maps and presented reductions: a level chart Z with ι: Z → Q, a
// quotient chart R with P: Z → R and a section σ: R → Z. Reduced forms are
// either supplied or solved pointwise from P*β = ι*α.

#include <optional>
#include <string>
#include <vector>

#include "cosym/action.hpp"
#include "cosym/algebroid.hpp"
#include "cosym/cosymplectic.hpp"
#include "cosym/groupoid.hpp"
#include "cosym/linalg.hpp"
#include "cosym/report.hpp"

namespace cosym {

/// J: Q → Rᵐ with sign σ: the moment condition is X_{⟨J,v⟩} = σ v_Q.
struct MomentMap {
  ChartPtr chart;
  std::vector<Expr> components;
  int sign = 1;
  std::string name = "J";

  Eigen::VectorXd at(const Point& p) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i) v(static_cast<Eigen::Index>(i)) = eval(components[i], p.values());
    return v;
  }

  /// Rows are d⟨J, e_v⟩ at p.
  Eigen::MatrixXd differential(const Point& p) const {
    const int n = chart->dimension();
    Eigen::MatrixXd d(static_cast<Eigen::Index>(components.size()), n);
    for (std::size_t i = 0; i < components.size(); ++i)
      d.row(static_cast<Eigen::Index>(i)) = gradient_at(gradient(components[i], n), p.values()).transpose();
    return d;
  }

  /// J∘F for a map into the chart of J.
  MomentMap pulled_back(const SmoothMap& f) const {
    require_same_chart(f.target(), chart, "moment map pullback");
    std::vector<Expr> comps;
    for (const auto& c : components) comps.push_back(pullback_function(f, c));
    return MomentMap{f.source(), std::move(comps), sign, name + "∘" + f.name()};
  }
};

/// One level set and its presented quotient.
struct LevelReduction {
  SmoothMap inclusion;   // Z → Q
  SmoothMap projection;  // Z → R
  SmoothMap section;     // R → Z
  std::optional<GroupAction> level_action;  // the action restricted to Z, for second fibre points

  const ChartPtr& level() const noexcept { return inclusion.source(); }
  const ChartPtr& quotient() const noexcept { return projection.target(); }
};

struct GroupoidReductionData {
  GroupoidPresentation ambient;
  GroupoidPresentation level;
  GroupoidPresentation reduced;
  GroupoidMorphism inclusion;   // level → ambient, identity on units
  GroupoidMorphism projection;  // level → reduced, covering p: M → M/G
  GroupAction base_action;      // the induced action on M
  PoissonBase base_poisson;
  PoissonBase reduced_poisson;
  IMFormPair im;
  IMFormPair im_reduced;
  std::vector<ExactSection> reduced_corpus;  // sections on M/G
};

struct LeafReductionData {
  LeafSubgroupoid leaf;
  GroupAction leaf_action;      // the action restricted to Σ
  LevelReduction level;         // Z₀ → Σ, Z₀ → R₀, R₀ → Z₀
  SmoothMap reduced_inclusion;  // L_red: R₀ → R
};

struct ReductionPresentation {
  std::string name;
  CosymplecticStructure ambient;
  GroupAction action;
  MomentMap moment;
  LevelReduction level;
  std::optional<FormField> omega_red;
  std::optional<FormField> eta_red;
  std::optional<GroupoidReductionData> groupoid;
  std::optional<LeafReductionData> leaf;
};

// ---------------------------------------------------------------------------
// Actions and moment maps

inline const VectorField& fundamental_vf(const GroupAction& a, int v) { return a.fundamental_vf(v); }

namespace detail {

/// Lie derivative of a form along a symbolic field at p.
inline Eigen::VectorXd lie_derivative_at(const VectorField& v, const FormField& a, const Point& p) {
  if (a.is_symbolic()) return lie_derivative(v, a.symbolic()).at(p);
  const int n = a.dimension();
  const int k = a.degree();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(n, k)));
  if (k < n) out += pointwise::interior(n, k + 1, v.at(p), exterior_derivative_fd(a, p));
  if (k > 0) {
    FormField contracted(a.chart(), k - 1, [v, a, n, k](const Point& x) { return pointwise::interior(n, k, v.at(x), a.at(x)); });
    out += exterior_derivative_fd(contracted, p);
  }
  return out;
}

/// φ_g*α − α at x, via the Jacobian of the action in the chart coordinates.
inline Eigen::VectorXd invariance_defect(const GroupAction& a, const FormField& alpha, std::span<const double> g, const Point& x) {
  std::vector<double> ext(g.begin(), g.end());
  ext.insert(ext.end(), x.values().begin(), x.values().end());
  const Point moved(x.chart(), a.map().apply_raw(ext));
  const Eigen::MatrixXd jac = a.map().jacobian(ext).rightCols(x.dimension());
  return pointwise::pullback(alpha.degree(), alpha.at(moved), jac) - alpha.at(x);
}

}  // namespace detail

/// The action preserves ω and η (finitely and infinitesimally) and ι_{v_Q} η = 0.
inline CheckReport verify_cosymplectic_action(const CosymplecticStructure& s, const GroupAction& a, const Sampling& sampling,
                                              const Tolerances& tol) {
  CheckReport r;
  r.subject = "cosymplectic action " + a.name();
  r.seed = sampling.seed;
  require_same_chart(a.chart(), s.chart(), "cosymplectic action");
  r.merge(verify_action_axioms(a, sampling, tol), "axioms");
  const auto xs = detail::samples_for(s.chart(), sampling, "cosym-action-x");
  const auto gs = a.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("cosym-action-g")));
  Residual w, e, lw, le, ie;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    w.add(linalg::max_abs(detail::invariance_defect(a, s.omega(), gs[i], xs[i])));
    e.add(linalg::max_abs(detail::invariance_defect(a, s.eta(), gs[i], xs[i])));
    for (const auto& v : a.fundamental_fields()) {
      lw.add(linalg::max_abs(detail::lie_derivative_at(v, s.omega(), xs[i])));
      le.add(linalg::max_abs(detail::lie_derivative_at(v, s.eta(), xs[i])));
      ie.add(std::abs(v.at(xs[i]).dot(s.eta_at(xs[i]))));
    }
  }
  r.add(w.upper("phi_g* omega = omega", tol.structure));
  r.add(e.upper("phi_g* eta = eta", tol.structure));
  r.add(lw.upper("L_v omega = 0", tol.structure));
  r.add(le.upper("L_v eta = 0", tol.structure));
  r.add(ie.upper("i_v eta = 0", tol.structure));
  return r;
}

/// X_{⟨J,v⟩} = σ v_Q, ξ⟨J,v⟩ = 0, invariance of J, and (with a groupoid) additivity.
inline CheckReport verify_moment_map(const CosymplecticStructure& s, const GroupAction& a, const MomentMap& j,
                                     const Sampling& sampling, const Tolerances& tol,
                                     const GroupoidPresentation* groupoid = nullptr) {
  CheckReport r;
  r.subject = "moment map " + j.name;
  r.seed = sampling.seed;
  require_same_chart(j.chart, s.chart(), "moment map");
  require_same_chart(a.chart(), s.chart(), "moment map action");
  if (static_cast<int>(j.components.size()) != a.dimension()) {
    r.add_exact("component count matches group dimension", false,
                std::to_string(j.components.size()) + " vs " + std::to_string(a.dimension()));
    return r;
  }
  const auto xs = detail::samples_for(s.chart(), sampling, "moment-x");
  const auto gs = a.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("moment-g")));
  Residual ham, reeb_res, inv;
  try {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Point& x = xs[i];
      const Eigen::MatrixXd dj = j.differential(x);
      const Eigen::VectorXd xi = s.reeb(x);
      for (int v = 0; v < a.dimension(); ++v) {
        const Eigen::VectorXd xv = s.hamiltonian(x, Eigen::VectorXd(dj.row(v).transpose()));
        ham.add(linalg::max_abs(xv - j.sign * a.fundamental_vf(v).at(x)));
        reeb_res.add(std::abs(dj.row(v).dot(xi)));
      }
      inv.add(linalg::max_abs(j.at(a.apply(gs[i], x)) - j.at(x)));
    }
    r.add(ham.upper("X_<J,v> = sign * v_Q", tol.solve));
    r.add(reeb_res.upper("xi<J,v> = 0", tol.solve));
    r.add(inv.upper("J invariant (abelian equivariance)", tol.solve));
  } catch (const Error& e) {
    r.add_error("moment map solve", e.what());
  }
  if (groupoid) r.merge(verify_additive(*groupoid, j.components, sampling, tol, j.name), "additive");
  return r;
}

/// Regularity of 0 along a presented level set, plus a freeness proxy.
inline CheckReport verify_regular_value(const MomentMap& j, const GroupAction& a, const SmoothMap& inclusion,
                                        const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "regular value of " + j.name;
  r.seed = sampling.seed;
  require_same_chart(inclusion.target(), j.chart, "level inclusion");
  const int m = a.dimension();
  const int dz = inclusion.source()->dimension();
  const int dq = j.chart->dimension();
  r.add_exact("dim Z = dim Q - m", dz == dq - m, std::to_string(dz) + " vs " + std::to_string(dq) + "-" + std::to_string(m));
  Residual level, rank_j, rank_i, contain, free;
  for (const auto& z : detail::samples_for(inclusion.source(), sampling, "regular-z")) {
    const Point x = inclusion(z);
    const Eigen::MatrixXd dj = j.differential(x);
    const Eigen::MatrixXd di = inclusion.jacobian(z);
    level.add(linalg::max_abs(j.at(x)));
    rank_j.add(static_cast<double>(m - linalg::rank(dj)));
    rank_i.add(static_cast<double>(dz - linalg::rank(di)));
    contain.add(linalg::max_abs(dj * di));
    const Eigen::VectorXd sv = linalg::singular_values(a.generator_matrix(x));
    free.add(sv.size() == 0 ? 0.0 : sv(sv.size() - 1));
  }
  r.add(level.upper("J o iota = 0", tol.structure));
  r.add(rank_j.upper("dJ has full rank", 0.0));
  r.add(rank_i.upper("iota is an immersion", 0.0));
  r.add(contain.upper("image of d iota in ker dJ", tol.structure));
  r.add(free.lower("action free (generators independent)", tol.freeness));
  r.flag_unverified("properness of the action");
  return r;
}

// ---------------------------------------------------------------------------
// Reduced forms

/// The reduced form β on R with P*β = α at σ(r), solved by least squares.
inline FormField reduce_form(const FormField& on_level, const LevelReduction& lvl) {
  require_same_chart(on_level.chart(), lvl.level(), "reduced form");
  const int k = on_level.degree();
  const auto unknowns = static_cast<int>(binomial(lvl.quotient()->dimension(), k));
  return FormField(lvl.quotient(), k, [on_level, lvl, k, unknowns](const Point& r) {
    const Point z = lvl.section(r);
    const Eigen::MatrixXd a = pointwise::pullback_matrix(k, lvl.projection.jacobian(z));
    const linalg::LeastSquares ls = linalg::least_squares(a, on_level.at(z));
    if (ls.rank < unknowns) throw RankError("projection lacks full rank; reduced form is underdetermined");
    return ls.solution;
  }, "reduced");
}

/// Checks around one reduced form: the section is a section, P is invariant
/// and a submersion, P*β reproduces α at σ(r), and β is unchanged when solved
/// at a second fibre point (basicness).
inline CheckReport verify_reduced_form(const FormField& on_level, const LevelReduction& lvl, const std::string& label,
                                       const Sampling& sampling, const Tolerances& tol,
                                       const std::optional<FormField>& supplied = std::nullopt) {
  CheckReport r;
  r.subject = "reduced " + label;
  r.seed = sampling.seed;
  const int k = on_level.degree();
  const int dr = lvl.quotient()->dimension();
  const FormField reduced = supplied ? *supplied : reduce_form(on_level, lvl);
  const auto rs = detail::samples_for(lvl.quotient(), sampling, "reduced-r-" + label);
  const auto gs = lvl.level_action
                      ? lvl.level_action->sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("reduced-g-" + label)))
                      : std::vector<std::vector<double>>{};
  Residual sec, sub, fit, basic, invariant;
  try {
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const Point& rp = rs[i];
      const Point z = lvl.section(rp);
      sec.add(point_distance(lvl.projection(z), rp));
      const Eigen::MatrixXd dp = lvl.projection.jacobian(z);
      sub.add(static_cast<double>(dr - linalg::rank(dp)));
      const Eigen::VectorXd beta = reduced.at(rp);
      fit.add(linalg::max_abs(pointwise::pullback(k, beta, dp) - on_level.at(z)));
      if (lvl.level_action) {
        const Point z2 = lvl.level_action->apply(gs[i], z);
        invariant.add(point_distance(lvl.projection(z2), rp));
        const Eigen::MatrixXd a2 = pointwise::pullback_matrix(k, lvl.projection.jacobian(z2));
        const linalg::LeastSquares ls = linalg::least_squares(a2, on_level.at(z2));
        basic.add(std::max(linalg::max_abs(ls.solution - beta), ls.residual));
      }
    }
  } catch (const Error& e) {
    r.add_error(label + " solve", e.what());
    return r;
  }
  r.add(sec.upper("section of the projection", tol.structure));
  r.add(sub.upper("projection is a submersion", 0.0));
  r.add(fit.upper("P*" + label + "_red = iota*" + label, tol.tol, supplied ? "supplied reduced form" : "solved reduced form"));
  if (lvl.level_action) {
    r.add(invariant.upper("projection invariant along orbits", tol.structure));
    r.add(basic.upper(label + " basic (second fibre point)", tol.tol));
  } else {
    r.flag_unverified("basicness of " + label + " (no action on the level chart)");
  }
  return r;
}

struct ReducedForms {
  FormField omega;
  FormField eta;
};

inline FormField level_form(const SmoothMap& inclusion, const FormField& ambient) { return pullback_field(inclusion, ambient); }

/// The reduced pair: supplied forms when present, solved ones otherwise.
inline ReducedForms reduced_forms(const ReductionPresentation& red) {
  const FormField w = red.omega_red ? *red.omega_red : reduce_form(level_form(red.level.inclusion, red.ambient.omega()), red.level);
  const FormField e = red.eta_red ? *red.eta_red : reduce_form(level_form(red.level.inclusion, red.ambient.eta()), red.level);
  return ReducedForms{w, e};
}

/// Solves (ω_red, η_red) and certifies basicness at samples; raises
/// BasicnessError when a second fibre point disagrees.
inline ReducedForms solve_reduced_forms(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  ReducedForms out{reduce_form(level_form(red.level.inclusion, red.ambient.omega()), red.level),
                   reduce_form(level_form(red.level.inclusion, red.ambient.eta()), red.level)};
  for (const auto& [label, form] : {std::pair<std::string, const FormField*>{"omega", &red.ambient.omega()},
                                    std::pair<std::string, const FormField*>{"eta", &red.ambient.eta()}}) {
    const CheckReport rep = verify_reduced_form(level_form(red.level.inclusion, *form), red.level, label, sampling, tol);
    if (const CheckEntry* e = rep.find(label + " basic (second fibre point)"); e && !e->passed)
      throw BasicnessError(label + " is not basic: fibre points disagree by " + std::to_string(e->max));
    if (!rep.passed()) throw RankError("reduced " + label + " could not be solved: " + rep.failing().front());
  }
  return out;
}

/// Both reduced forms, checked against ι*ω and ι*η.
inline CheckReport verify_reduced_forms(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "reduced forms " + red.name;
  r.seed = sampling.seed;
  const int dz = red.level.level()->dimension();
  const int dr = red.level.quotient()->dimension();
  r.add_exact("dim R = dim Z - m", dr == dz - red.action.dimension(), std::to_string(dr) + " vs " + std::to_string(dz) + "-" +
                                                                         std::to_string(red.action.dimension()));
  r.merge(verify_reduced_form(level_form(red.level.inclusion, red.ambient.omega()), red.level, "omega", sampling, tol,
                              red.omega_red));
  r.merge(verify_reduced_form(level_form(red.level.inclusion, red.ambient.eta()), red.level, "eta", sampling, tol,
                              red.eta_red));
  return r;
}

// ---------------------------------------------------------------------------
// Groupoid reduction

/// Z is a wide subgroupoid contained in J⁻¹(0): J vanishes on units, products
/// and inverses of level arrows, and the level groupoid maps into 𝒢 over the identity.
inline CheckReport verify_wide_subgroupoid(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "wide subgroupoid";
  r.seed = sampling.seed;
  const auto& gd = *red.groupoid;
  const MomentMap& j = red.moment;
  r.merge(verify_groupoid(gd.level, sampling, tol), "level groupoid");
  r.merge(verify_groupoid_morphism(gd.inclusion, gd.level, gd.ambient, sampling, tol), "inclusion");
  r.add_exact("level arrows are the level chart", same_chart(gd.level.arrows(), red.level.level()));
  r.add_exact("same units", same_chart(gd.level.units(), gd.ambient.units()));
  Residual units, wide, prod, inv;
  for (const auto& x : detail::samples_for(gd.ambient.units(), sampling, "wide-units")) {
    units.add(linalg::max_abs(j.at(gd.ambient.unit(x))));
    wide.add(point_distance(gd.inclusion.base(x), x));
  }
  if (gd.inclusion.pairs) {
    for (const auto& c : detail::samples_for(gd.level.pairs(), sampling, "wide-pairs"))
      prod.add(linalg::max_abs(j.at(gd.ambient.multiply((*gd.inclusion.pairs)(c)))));
    r.add(prod.upper("J vanishes on products", tol.structure));
  }
  for (const auto& z : detail::samples_for(red.level.level(), sampling, "wide-inverse"))
    inv.add(linalg::max_abs(j.at(gd.ambient.inverse(red.level.inclusion(z)))));
  r.add(units.upper("J vanishes on units", tol.structure));
  r.add(wide.upper("identity on units", tol.structure));
  r.add(inv.upper("J vanishes on inverses", tol.structure));
  return r;
}

namespace detail {

inline void stage(CheckReport& out, const std::string& name, const std::function<CheckReport()>& run) {
  try {
    out.merge(run(), name);
  } catch (const Error& e) {
    out.add_error(name, e.what());
  }
}

}  // namespace detail

/// The full groupoid reduction pipeline; entry names are prefixed by stage.
inline CheckReport verify_groupoid_reduction(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "groupoid reduction " + red.name;
  r.seed = sampling.seed;
  if (!red.groupoid) {
    r.add_exact("groupoid data present", false);
    return r;
  }
  const auto& gd = *red.groupoid;
  const int m = red.action.dimension();
  detail::stage(r, "ambient", [&] { return verify_cosymplectic_groupoid(gd.ambient, red.ambient, sampling, tol); });
  detail::stage(r, "action", [&] { return verify_cosymplectic_action(red.ambient, red.action, sampling, tol); });
  detail::stage(r, "moment_map", [&] { return verify_moment_map(red.ambient, red.action, red.moment, sampling, tol, &gd.ambient); });
  detail::stage(r, "regular_value", [&] { return verify_regular_value(red.moment, red.action, red.level.inclusion, sampling, tol); });
  detail::stage(r, "wide_subgroupoid", [&] { return verify_wide_subgroupoid(red, sampling, tol); });
  detail::stage(r, "reduced_forms", [&] { return verify_reduced_forms(red, sampling, tol); });
  std::optional<ReducedForms> forms;
  try {
    forms = reduced_forms(red);
  } catch (const Error& e) {
    r.add_error("reduced_forms", e.what());
  }
  if (forms) {
    const CosymplecticStructure reduced(forms->omega, forms->eta, gd.reduced.name);
    detail::stage(r, "reduced_cosymplectic",
                  [&] { return verify_cosymplectic(reduced, sampling, tol, gd.reduced.units()->dimension()); });
    detail::stage(r, "reduced_groupoid", [&] { return verify_groupoid(gd.reduced, sampling, tol); });
    detail::stage(r, "reduced_multiplicative", [&] {
      CheckReport c = verify_multiplicative(gd.reduced, forms->omega, sampling, tol, "omega_red");
      c.merge(verify_multiplicative(gd.reduced, forms->eta, sampling, tol, "eta_red"));
      return c;
    });
  }
  detail::stage(r, "projection_morphism", [&] { return verify_groupoid_morphism(gd.projection, gd.level, gd.reduced, sampling, tol); });
  CheckReport dims;
  const int dg = gd.ambient.arrows()->dimension();
  const int dm = gd.ambient.units()->dimension();
  const int dgr = gd.reduced.arrows()->dimension();
  const int dmr = gd.reduced.units()->dimension();
  dims.add_exact("dim G_red = dim G - 2m", dgr == dg - 2 * m, std::to_string(dgr) + " vs " + std::to_string(dg - 2 * m));
  dims.add_exact("dim M/G = dim M - m", dmr == dm - m, std::to_string(dmr) + " vs " + std::to_string(dm - m));
  dims.add_exact("dim G_red = 2 dim(M/G) + 1", dgr == 2 * dmr + 1, std::to_string(dgr) + " vs " + std::to_string(2 * dmr + 1));
  r.merge(dims, "dimensions");
  r.flag_unverified("properness of the action");
  r.flag_unverified("source simple-connectedness");
  return r;
}

// ---------------------------------------------------------------------------
// Infinitesimal data

/// p*(μ_red(a)) = μ(p*a) and p*(ν_red(a)) = ν(p*a) for sections a on M/G,
/// and the IM equations for (μ_red, ν_red) on the reduced Poisson base.
inline CheckReport verify_reduced_im_forms(const GroupoidReductionData& gd, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "reduced IM forms";
  r.seed = sampling.seed;
  const SmoothMap& p = gd.projection.base;
  Residual mu_res, nu_res;
  const auto xs = detail::samples_for(p.source(), sampling, "reduced-im");
  for (const auto& a : gd.reduced_corpus) {
    const ExactSection pulled{pullback_function(p, a.f), pullback_function(p, a.g)};
    const DifferentialForm lhs = pullback_form(p, gd.im_reduced.mu_of(a));
    const DifferentialForm rhs = gd.im.mu_of(pulled);
    const Expr nl = pullback_function(p, gd.im_reduced.nu_of(a));
    const Expr nr = gd.im.nu_of(pulled);
    for (const auto& x : xs) {
      mu_res.add(linalg::max_abs(lhs.at(x) - rhs.at(x)));
      nu_res.add(std::abs(eval(nl, x.values()) - eval(nr, x.values())));
    }
  }
  r.add(mu_res.upper("p*mu_red(a) = mu(p*a)", tol.tol));
  r.add(nu_res.upper("p*nu_red(a) = nu(p*a)", tol.tol));
  r.merge(verify_im_2form(gd.reduced_poisson, gd.im_reduced, gd.reduced_corpus, sampling, tol), "reduced");
  r.merge(verify_im_1form(gd.reduced_poisson, gd.im_reduced, gd.reduced_corpus, sampling, tol), "reduced");
  return r;
}

/// True when v_M(f) = v_M(g) = 0 at the samples, i.e. the section descends to M/G.
inline bool section_is_basic(const GroupAction& base_action, const ExactSection& a, const Sampling& sampling, double tol = 1e-10) {
  for (const auto& x : detail::samples_for(base_action.chart(), sampling, "basic-section"))
    for (const auto& v : base_action.fundamental_fields())
      if (std::abs(eval(v.apply(a.f), x.values())) > tol || std::abs(eval(v.apply(a.g), x.values())) > tol) return false;
  return true;
}

/// The infinitesimal reduction square at sampled units x:
///   A₀ = {u ∈ A_x : μ(u)(v_M) = 0}, μ_red(ū) solves dp^T β = μ(u), ν_red(ū) = ν(u);
/// against the IM forms induced by (𝒢_red, ω_red, η_red) on dP(dι⁻¹ u).
inline CheckReport verify_reduction_square(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "reduction square " + red.name;
  r.seed = sampling.seed;
  if (!red.groupoid) {
    r.add_exact("groupoid data present", false);
    return r;
  }
  const auto& gd = *red.groupoid;
  const ReducedForms forms = reduced_forms(red);
  const CosymplecticStructure reduced(forms.omega, forms.eta, gd.reduced.name);
  const InducedIMForms ambient = induced_im_forms(gd.ambient, red.ambient);
  const int m = red.action.dimension();
  Residual a0_dim, tangent, lands, unit_match, descends, mu_res, nu_res;
  for (const auto& x : detail::samples_for(gd.ambient.units(), sampling, "square-units")) {
    const Eigen::MatrixXd a = ambient.kernel(x);
    const Eigen::MatrixXd mu = ambient.mu(x);
    const Eigen::RowVectorXd nu = ambient.nu(x);
    const Eigen::MatrixXd v = gd.base_action.generator_matrix(x);
    const Eigen::MatrixXd c = linalg::null_space(v.transpose() * mu * a);
    const Eigen::MatrixXd a0 = a * c;
    a0_dim.add(std::abs(static_cast<double>(a0.cols() - (a.cols() - m))));

    const Point xr = gd.projection.base(x);
    const Eigen::MatrixXd dp = gd.projection.base.jacobian(x);
    const Point z = gd.level.unit(x);
    const Eigen::MatrixXd di = red.level.inclusion.jacobian(z);
    const Eigen::MatrixXd dP = red.level.projection.jacobian(z);
    const Point rz = red.level.projection(z);
    unit_match.add(std::max(point_distance(red.level.inclusion(z), gd.ambient.unit(x)),
                            point_distance(rz, gd.reduced.unit(xr))));
    const Eigen::MatrixXd ds_red = gd.reduced.source.jacobian(rz);
    const Eigen::MatrixXd de_red = gd.reduced.unit.jacobian(xr);
    const Eigen::MatrixXd w_red = reduced.omega_matrix(rz);
    const Eigen::VectorXd e_red = reduced.eta_at(rz);
    for (Eigen::Index col = 0; col < a0.cols(); ++col) {
      const Eigen::VectorXd u = a0.col(col);
      const linalg::LeastSquares beta = linalg::least_squares(dp.transpose(), mu * u);
      descends.add(beta.residual);
      const double nu_inf = (nu * u)(0);
      const linalg::LeastSquares lift = linalg::least_squares(di, u);
      tangent.add(lift.residual);
      const Eigen::VectorXd y = dP * lift.solution;
      lands.add(linalg::max_abs(ds_red * y));
      const Eigen::VectorXd mu_grp = de_red.transpose() * w_red.transpose() * y;
      mu_res.add(linalg::max_abs(mu_grp - beta.solution));
      nu_res.add(std::abs(e_red.dot(y) - nu_inf));
    }
  }
  r.add(a0_dim.upper("dim A0 = dim A - m", 0.0));
  r.add(unit_match.upper("units correspond", tol.structure));
  r.add(descends.upper("mu(A0) is basic", tol.tol));
  r.add(tangent.upper("A0 tangent to the level set", tol.tol));
  r.add(lands.upper("dP(A0) in reduced algebroid", tol.tol));
  r.add(mu_res.upper("induced mu_red = reduced mu", tol.tol));
  r.add(nu_res.upper("induced nu_red = reduced nu", tol.tol));
  return r;
}

// ---------------------------------------------------------------------------
// Leaf reduction

/// Action preserves Σ, J∘L is a symplectic moment map on (Σ, L*ω), and the
/// reduced leaf form (L*ω)_red agrees with L_red*ω_red.
inline CheckReport verify_leaf_reduction(const ReductionPresentation& red, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "leaf reduction " + red.name;
  r.seed = sampling.seed;
  if (!red.leaf) {
    r.add_exact("leaf data present", false);
    return r;
  }
  const auto& ld = *red.leaf;
  const SmoothMap& l = ld.leaf.inclusion.arrows;
  const FormField leaf_omega = pullback_field(l, red.ambient.omega());
  if (red.groupoid)
    detail::stage(r, "leaf_subgroupoid", [&] { return verify_leaf_subgroupoid(red.groupoid->ambient, red.ambient, ld.leaf, sampling, tol); });
  detail::stage(r, "leaf_action", [&] { return verify_intertwines(l, ld.leaf_action, red.action, sampling, tol); });
  const MomentMap j0 = red.moment.pulled_back(l);
  detail::stage(r, "leaf_moment", [&] {
    CheckReport c;
    c.subject = "symplectic moment map on the leaf";
    const int n = l.source()->dimension();
    Residual res;
    for (const auto& x : detail::samples_for(l.source(), sampling, "leaf-moment")) {
      const Eigen::VectorXd w = leaf_omega.at(x);
      const Eigen::MatrixXd dj = j0.differential(x);
      for (int v = 0; v < ld.leaf_action.dimension(); ++v)
        res.add(linalg::max_abs(pointwise::interior(n, 2, ld.leaf_action.fundamental_vf(v).at(x), w) -
                                j0.sign * Eigen::VectorXd(dj.row(v).transpose())));
    }
    c.add(res.upper("i_v L*omega = sign * d<J0,v>", tol.solve));
    return c;
  });
  detail::stage(r, "leaf_level", [&] { return verify_regular_value(j0, ld.leaf_action, ld.level.inclusion, sampling, tol); });
  const FormField leaf_level_omega = level_form(ld.level.inclusion, leaf_omega);
  detail::stage(r, "leaf_reduced_form", [&] { return verify_reduced_form(leaf_level_omega, ld.level, "leaf_omega", sampling, tol); });
  detail::stage(r, "leaf_identity", [&] {
    CheckReport c;
    c.subject = "reduced leaf identity";
    const ReducedForms forms = reduced_forms(red);
    const FormField leaf_red = reduce_form(leaf_level_omega, ld.level);
    Residual w, e;
    for (const auto& x : detail::samples_for(ld.level.quotient(), sampling, "leaf-identity")) {
      w.add(linalg::max_abs(pullback_at(ld.reduced_inclusion, forms.omega, x) - leaf_red.at(x)));
      e.add(linalg::max_abs(pullback_at(ld.reduced_inclusion, forms.eta, x)));
    }
    c.add(w.upper("L_red* omega_red = (L* omega)_red", tol.tol));
    c.add(e.upper("L_red* eta_red = 0", tol.tol));
    return c;
  });
  return r;
}

// ---------------------------------------------------------------------------
// Symplectization

/// On Q × R with ω̃ = pr*ω + dt∧pr*η and the trivially lifted action,
/// ι_ṽ ω̃ = σ d⟨J̃, v⟩ and ∂_t J̃ = 0. `lifted` overrides J̃ = J∘pr.
inline CheckReport verify_symplectization_correspondence(const CosymplecticStructure& s, const GroupAction& a,
                                                         const MomentMap& j, const Sampling& sampling, const Tolerances& tol,
                                                         const std::optional<std::vector<Expr>>& lifted = std::nullopt) {
  CheckReport r;
  r.subject = "symplectization correspondence";
  r.seed = sampling.seed;
  const Symplectization sp = symplectization(s);
  r.merge(verify_symplectic(sp.omega, sampling, tol, "omega_tilde"), "symplectization");
  std::vector<Expr> jt;
  if (lifted) jt = *lifted;
  else
    for (const auto& c : j.components) jt.push_back(pullback_function(sp.projection, c));
  if (static_cast<int>(jt.size()) != a.dimension()) {
    r.add_exact("lift has one component per generator", false);
    return r;
  }
  const int n = sp.chart->dimension();
  Residual lift, dt, reeb_pair;
  try {
    for (const auto& x : detail::samples_for(sp.chart, sampling, "symplectization")) {
      const Point q = sp.projection(x);
      const Eigen::VectorXd w = sp.omega.at(x);
      Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
      xi.head(n - 1) = s.reeb(q);
      for (int v = 0; v < a.dimension(); ++v) {
        Eigen::VectorXd vt = Eigen::VectorXd::Zero(n);
        vt.head(n - 1) = a.fundamental_vf(v).at(q);
        const Eigen::VectorXd iv = pointwise::interior(n, 2, vt, w);
        const Eigen::VectorXd dj = gradient_at(gradient(jt[static_cast<std::size_t>(v)], n), x.values());
        lift.add(linalg::max_abs(iv - j.sign * dj));
        dt.add(std::abs(dj(sp.time_index)));
        reeb_pair.add(std::abs(iv.dot(xi)));
      }
    }
  } catch (const Error& e) {
    r.add_error("symplectization", e.what());
    return r;
  }
  r.add(lift.upper("i_v omega_tilde = sign * d<J_tilde,v>", tol.solve));
  r.add(dt.upper("d_t J_tilde = 0", tol.closed));
  r.add(reeb_pair.upper("omega_tilde(v, xi) = 0", tol.solve));
  return r;
}

// ---------------------------------------------------------------------------
// Quotients without a moment map

struct PoissonQuotient {
  GroupoidPresentation groupoid;
  GroupAction action;        // on the arrows
  GroupAction base_action;   // on the units
  SmoothMap projection;      // arrows → 𝒢/G
  SmoothMap base_projection; // units → M/G
};

/// Presents 𝒢/G ⇒ M/G and tests the dimension count of a cosymplectic groupoid.
inline CheckReport verify_poisson_quotient(const PoissonQuotient& pq, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "full quotient of " + pq.groupoid.name;
  r.seed = sampling.seed;
  const int m = pq.action.dimension();
  const int dq = pq.projection.target()->dimension();
  const int dmq = pq.base_projection.target()->dimension();
  r.merge(verify_action_axioms(pq.action, sampling, tol), "action");
  auto invariance = [&](const SmoothMap& p, const GroupAction& a, const std::string& label) {
    Residual inv, sub;
    const auto xs = detail::samples_for(p.source(), sampling, "quotient-" + label);
    const auto gs = a.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("quotient-g-" + label)));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      inv.add(point_distance(p(a.apply(gs[i], xs[i])), p(xs[i])));
      sub.add(static_cast<double>(p.target()->dimension() - linalg::rank(p.jacobian(xs[i]))));
    }
    r.add(inv.upper(label + " projection invariant", tol.structure));
    r.add(sub.upper(label + " projection is a submersion", 0.0));
  };
  invariance(pq.projection, pq.action, "arrow");
  invariance(pq.base_projection, pq.base_action, "unit");
  r.add_exact("dim(G/G) = dim G - m", dq == pq.groupoid.arrows()->dimension() - m);
  r.add_exact("dim(M/G) = dim M - m", dmq == pq.groupoid.units()->dimension() - m);
  r.add_exact("dim(G/G) = 2 dim(M/G) + 1", dq == 2 * dmq + 1,
              std::to_string(dq) + " vs " + std::to_string(2 * dmq + 1) + ": not a cosymplectic groupoid when they differ");
  return r;
}

}  // namespace cosym
