#pragma once

// Lie groupoid presentations: structure maps between single charts, an explicit
// chart of composable pairs, and optionally a chart of composable triples.

#include <optional>
#include <string>
#include <vector>

#include "cosym/cosymplectic.hpp"
#include "cosym/forms.hpp"
#include "cosym/linalg.hpp"
#include "cosym/report.hpp"
#include "cosym/smooth_map.hpp"

namespace cosym {

/// Maps T → C giving, for a composable triple (g, h, k), the pairs (g, h),
/// (h, k), (gh, k) and (g, hk).
struct TripleComposition {
  SmoothMap ab;
  SmoothMap bc;
  SmoothMap ab_c;
  SmoothMap a_bc;
};

struct GroupoidPresentation {
  std::string name;
  SmoothMap source;    // arrows → units
  SmoothMap target;    // arrows → units
  SmoothMap unit;      // units → arrows
  SmoothMap inverse;   // arrows → arrows
  SmoothMap first;     // pairs → arrows, the left factor g of (g, h)
  SmoothMap second;    // pairs → arrows, the right factor h
  SmoothMap multiply;  // pairs → arrows, the product gh
  std::optional<TripleComposition> triple;

  const ChartPtr& arrows() const noexcept { return source.source(); }
  const ChartPtr& units() const noexcept { return source.target(); }
  const ChartPtr& pairs() const noexcept { return first.source(); }

  /// Chart bookkeeping for all structure maps.
  void validate() const {
    const std::string ctx = "groupoid \"" + name + "\"";
    require_same_chart(target.source(), arrows(), ctx + " target");
    require_same_chart(target.target(), units(), ctx + " target");
    require_same_chart(unit.source(), units(), ctx + " unit");
    require_same_chart(unit.target(), arrows(), ctx + " unit");
    require_same_chart(inverse.source(), arrows(), ctx + " inverse");
    require_same_chart(inverse.target(), arrows(), ctx + " inverse");
    for (const SmoothMap* m : {&first, &second, &multiply}) {
      require_same_chart(m->source(), pairs(), ctx + " pair map " + m->name());
      require_same_chart(m->target(), arrows(), ctx + " pair map " + m->name());
    }
    if (triple) {
      const ChartPtr& t = triple->ab.source();
      for (const SmoothMap* m : {&triple->ab, &triple->bc, &triple->ab_c, &triple->a_bc}) {
        require_same_chart(m->source(), t, ctx + " triple map " + m->name());
        require_same_chart(m->target(), pairs(), ctx + " triple map " + m->name());
      }
    }
  }
};

/// A map of groupoids: arrows, units, and (when available) composable pairs.
struct GroupoidMorphism {
  std::string name;
  SmoothMap arrows;
  SmoothMap base;
  std::optional<SmoothMap> pairs;
};

namespace detail {

inline double rank_deficit(const Eigen::MatrixXd& m, int expected) {
  return static_cast<double>(std::max(0, expected - linalg::rank(m)));
}

}  // namespace detail

/// Structure-map axioms at sampled units, arrows and composable pairs.
inline CheckReport verify_groupoid(const GroupoidPresentation& g, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "groupoid " + g.name;
  r.seed = sampling.seed;
  try {
    g.validate();
  } catch (const Error& e) {
    r.add_error("charts", e.what());
    return r;
  }
  const int m = g.units()->dimension();
  Residual se, te, ie;
  for (const auto& x : detail::samples_for(g.units(), sampling, "groupoid-units")) {
    const Point u = g.unit(x);
    se.add(point_distance(g.source(u), x));
    te.add(point_distance(g.target(u), x));
    ie.add(point_distance(g.inverse(u), u));
  }
  r.add(se.upper("source of unit is identity", tol.structure));
  r.add(te.upper("target of unit is identity", tol.structure));
  r.add(ie.upper("units are self-inverse", tol.structure));

  Residual ii, si, ti, ssub, tsub;
  for (const auto& a : detail::samples_for(g.arrows(), sampling, "groupoid-arrows")) {
    const Point inv = g.inverse(a);
    ii.add(point_distance(g.inverse(inv), a));
    si.add(point_distance(g.source(inv), g.target(a)));
    ti.add(point_distance(g.target(inv), g.source(a)));
    ssub.add(detail::rank_deficit(g.source.jacobian(a), m));
    tsub.add(detail::rank_deficit(g.target.jacobian(a), m));
  }
  r.add(ii.upper("inverse is an involution", tol.structure));
  r.add(si.upper("source of inverse is target", tol.structure));
  r.add(ti.upper("target of inverse is source", tol.structure));
  r.add(ssub.upper("source is a submersion", 0.0));
  r.add(tsub.upper("target is a submersion", 0.0));

  Residual comp, sm, tm;
  for (const auto& c : detail::samples_for(g.pairs(), sampling, "groupoid-pairs")) {
    const Point a = g.first(c);
    const Point b = g.second(c);
    const Point ab = g.multiply(c);
    comp.add(point_distance(g.source(a), g.target(b)));
    sm.add(point_distance(g.source(ab), g.source(b)));
    tm.add(point_distance(g.target(ab), g.target(a)));
  }
  r.add(comp.upper("pairs are composable", tol.structure));
  r.add(sm.upper("source of product", tol.structure));
  r.add(tm.upper("target of product", tol.structure));

  if (g.triple) {
    const auto& t = *g.triple;
    Residual cons, assoc;
    for (const auto& x : detail::samples_for(t.ab.source(), sampling, "groupoid-triples")) {
      const Point ab = t.ab(x), bc = t.bc(x), ab_c = t.ab_c(x), a_bc = t.a_bc(x);
      double d = point_distance(g.second(ab), g.first(bc));
      d = std::max(d, point_distance(g.first(ab_c), g.multiply(ab)));
      d = std::max(d, point_distance(g.second(ab_c), g.second(bc)));
      d = std::max(d, point_distance(g.first(a_bc), g.first(ab)));
      d = std::max(d, point_distance(g.second(a_bc), g.multiply(bc)));
      cons.add(d);
      assoc.add(point_distance(g.multiply(ab_c), g.multiply(a_bc)));
    }
    r.add(cons.upper("triple chart consistent", tol.structure));
    r.add(assoc.upper("associativity", tol.structure));
  } else {
    r.flag_unverified("associativity (no triple chart supplied)");
  }
  r.flag_unverified("unit laws m(eps(t(g)), g) = g = m(g, eps(s(g))) (no pair parametrization through units)");
  return r;
}

/// m*θ − a*θ − b*θ on composable pairs.
inline CheckReport verify_multiplicative(const GroupoidPresentation& g, const FormField& theta, const Sampling& sampling,
                                         const Tolerances& tol, const std::string& label = "form") {
  CheckReport r;
  r.subject = "multiplicative " + label + " on " + g.name;
  r.seed = sampling.seed;
  require_same_chart(theta.chart(), g.arrows(), "multiplicative form");
  Residual res;
  for (const auto& c : detail::samples_for(g.pairs(), sampling, "multiplicative-" + label)) {
    const Eigen::VectorXd lhs = pullback_at(g.multiply, theta, c);
    const Eigen::VectorXd rhs = pullback_at(g.first, theta, c) + pullback_at(g.second, theta, c);
    res.add(linalg::max_abs(lhs - rhs));
  }
  r.add(res.upper(label + " multiplicative", tol.tol));
  return r;
}

/// ε*θ at sampled units.
inline CheckEntry units_pullback_entry(const GroupoidPresentation& g, const FormField& theta, const Sampling& sampling,
                                       double threshold, const std::string& label) {
  Residual res;
  for (const auto& x : detail::samples_for(g.units(), sampling, "units-pullback-" + label))
    res.add(linalg::max_abs(pullback_at(g.unit, theta, x)));
  return res.upper("eps*" + label + " = 0", threshold);
}

/// Cosymplectic structure, multiplicativity of ω and η, and dim 𝒢 = 2 dim M + 1.
inline CheckReport verify_cosymplectic_groupoid(const GroupoidPresentation& g, const CosymplecticStructure& s,
                                                const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "cosymplectic groupoid " + g.name;
  r.seed = sampling.seed;
  require_same_chart(s.chart(), g.arrows(), "cosymplectic groupoid");
  r.merge(verify_cosymplectic(s, sampling, tol, g.units()->dimension()), "cosymplectic");
  r.merge(verify_multiplicative(g, s.omega(), sampling, tol, "omega"), "multiplicative");
  r.merge(verify_multiplicative(g, s.eta(), sampling, tol, "eta"), "multiplicative");
  r.add(units_pullback_entry(g, s.omega(), sampling, tol.tol, "omega"));
  r.add(units_pullback_entry(g, s.eta(), sampling, tol.tol, "eta"));
  r.flag_unverified("connectedness of the arrow space");
  return r;
}

/// Every structure-map square of F: G → H, at samples.
inline CheckReport verify_groupoid_morphism(const GroupoidMorphism& f, const GroupoidPresentation& g,
                                            const GroupoidPresentation& h, const Sampling& sampling,
                                            const Tolerances& tol) {
  CheckReport r;
  r.subject = "morphism " + f.name;
  r.seed = sampling.seed;
  try {
    require_same_chart(f.arrows.source(), g.arrows(), f.name + " arrows");
    require_same_chart(f.arrows.target(), h.arrows(), f.name + " arrows");
    require_same_chart(f.base.source(), g.units(), f.name + " base");
    require_same_chart(f.base.target(), h.units(), f.name + " base");
    if (f.pairs) {
      require_same_chart(f.pairs->source(), g.pairs(), f.name + " pairs");
      require_same_chart(f.pairs->target(), h.pairs(), f.name + " pairs");
    }
  } catch (const Error& e) {
    r.add_error("charts", e.what());
    return r;
  }
  Residual s, t, inv;
  for (const auto& a : detail::samples_for(g.arrows(), sampling, "morphism-arrows-" + f.name)) {
    const Point fa = f.arrows(a);
    s.add(point_distance(h.source(fa), f.base(g.source(a))));
    t.add(point_distance(h.target(fa), f.base(g.target(a))));
    inv.add(point_distance(h.inverse(fa), f.arrows(g.inverse(a))));
  }
  r.add(s.upper("source square", tol.structure));
  r.add(t.upper("target square", tol.structure));
  r.add(inv.upper("inverse square", tol.structure));
  Residual u;
  for (const auto& x : detail::samples_for(g.units(), sampling, "morphism-units-" + f.name))
    u.add(point_distance(f.arrows(g.unit(x)), h.unit(f.base(x))));
  r.add(u.upper("unit square", tol.structure));
  if (f.pairs) {
    Residual pa, mul;
    for (const auto& c : detail::samples_for(g.pairs(), sampling, "morphism-pairs-" + f.name)) {
      const Point fc = (*f.pairs)(c);
      pa.add(std::max(point_distance(h.first(fc), f.arrows(g.first(c))), point_distance(h.second(fc), f.arrows(g.second(c)))));
      mul.add(point_distance(h.multiply(fc), f.arrows(g.multiply(c))));
    }
    r.add(pa.upper("pair map covers factors", tol.structure));
    r.add(mul.upper("multiplication square", tol.structure));
  } else {
    r.flag_unverified("multiplication square of " + f.name + " (no pair map supplied)");
  }
  return r;
}

/// F(gh) = F(g) + F(h), F(ε(x)) = 0 and F(g⁻¹) = −F(g) for F into an abelian group Rᵐ.
inline CheckReport verify_additive(const GroupoidPresentation& g, const std::vector<Expr>& components,
                                   const Sampling& sampling, const Tolerances& tol, const std::string& label = "J") {
  CheckReport r;
  r.subject = "additive " + label + " on " + g.name;
  r.seed = sampling.seed;
  for (const auto& c : components)
    if (max_variable_index(c) >= g.arrows()->dimension()) throw ChartMismatchError(label + " is not a function on the arrows");
  auto value = [&](const Point& p) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i) v(static_cast<Eigen::Index>(i)) = eval(components[i], p.values());
    return v;
  };
  Residual add, unit, inv;
  for (const auto& c : detail::samples_for(g.pairs(), sampling, "additive-pairs"))
    add.add(linalg::max_abs(value(g.multiply(c)) - value(g.first(c)) - value(g.second(c))));
  for (const auto& x : detail::samples_for(g.units(), sampling, "additive-units")) unit.add(linalg::max_abs(value(g.unit(x))));
  for (const auto& a : detail::samples_for(g.arrows(), sampling, "additive-arrows"))
    inv.add(linalg::max_abs(value(g.inverse(a)) + value(a)));
  r.add(add.upper(label + " additive on products", tol.structure));
  r.add(unit.upper(label + " vanishes on units", tol.structure));
  r.add(inv.upper(label + " odd under inverse", tol.structure));
  return r;
}

/// A subgroupoid Σ ⇒ M carried into 𝒢 by a morphism L with identity on units.
struct LeafSubgroupoid {
  GroupoidPresentation groupoid;
  GroupoidMorphism inclusion;
};

inline FormField pullback_field(const SmoothMap& map, const FormField& a) {
  if (a.is_symbolic()) return FormField(pullback_form(map, a.symbolic()));
  return FormField(map.source(), a.degree(), [map, a](const Point& p) { return pullback_at(map, a, p); },
                   "pullback along " + map.name());
}

/// L*η = 0, (Σ, L*ω) symplectic, Σ a groupoid, and L a groupoid morphism over the identity.
inline CheckReport verify_leaf_subgroupoid(const GroupoidPresentation& g, const CosymplecticStructure& s,
                                           const LeafSubgroupoid& leaf, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "leaf subgroupoid " + leaf.groupoid.name;
  r.seed = sampling.seed;
  const SmoothMap& l = leaf.inclusion.arrows;
  require_same_chart(l.target(), s.chart(), "leaf inclusion");
  Residual eta;
  for (const auto& p : detail::samples_for(l.source(), sampling, "leaf-eta")) eta.add(linalg::max_abs(pullback_at(l, s.eta(), p)));
  r.add(eta.upper("L*eta = 0", tol.closed));
  r.merge(verify_symplectic(pullback_field(l, s.omega()), sampling, tol, "L*omega"), "leaf");
  r.merge(verify_groupoid(leaf.groupoid, sampling, tol), "leaf groupoid");
  r.merge(verify_groupoid_morphism(leaf.inclusion, leaf.groupoid, g, sampling, tol), "inclusion");
  r.merge(verify_multiplicative(leaf.groupoid, pullback_field(l, s.omega()), sampling, tol, "L*omega"), "leaf");
  return r;
}

}  // namespace cosym
