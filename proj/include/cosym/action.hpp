#pragma once

// Actions of abelian groups R^a x T^b on a chart.
//
// The action is one SmoothMap on an extended chart whose first coordinates
// are the group parameters (translations, then periodic rotations) followed by
// the chart's own coordinates. Group composition is parameter addition.

#include <string>
#include <vector>

#include "cosym/chart.hpp"
#include "cosym/report.hpp"
#include "cosym/smooth_map.hpp"

namespace cosym {

struct GroupModel {
  int translations = 0;
  int rotations = 0;

  int dimension() const noexcept { return translations + rotations; }
  bool compact() const noexcept { return translations == 0; }
};

class GroupAction {
 public:
  /// `components` are expressions on the extended chart (parameters first).
  GroupAction(GroupModel model, ChartPtr chart, std::vector<std::string> parameters, std::vector<Expr> components,
              std::string name = {})
      : model_(model), chart_(std::move(chart)), name_(std::move(name)) {
    if (model_.translations < 0 || model_.rotations < 0 || model_.dimension() < 1)
      throw Error("action \"" + name_ + "\": group dimension must be at least 1");
    extended_ = extend(model_, chart_, parameters, name_);
    map_ = std::make_shared<SmoothMap>(extended_, chart_, std::move(components), name_);
    for (int v = 0; v < model_.dimension(); ++v) fundamental_.push_back(derive_fundamental(v));
  }

  static GroupAction parse(GroupModel model, ChartPtr chart, std::vector<std::string> parameters,
                           const std::vector<std::string>& components, std::string name = {}) {
    const ChartPtr ext = extend(model, chart, parameters, name);
    std::vector<Expr> exprs;
    for (const auto& c : components) exprs.push_back(parse_expr(c, *ext));
    return GroupAction(model, std::move(chart), std::move(parameters), std::move(exprs), std::move(name));
  }

  const GroupModel& model() const noexcept { return model_; }
  int dimension() const noexcept { return model_.dimension(); }
  const ChartPtr& chart() const noexcept { return chart_; }
  const ChartPtr& extended_chart() const noexcept { return extended_; }
  const SmoothMap& map() const noexcept { return *map_; }
  const std::string& name() const noexcept { return name_; }
  const std::string& parameter(int v) const { return extended_->coordinate(v); }

  /// φ_g as a map of the chart to itself.
  SmoothMap at(std::span<const double> g) const {
    check_group_element(g);
    std::vector<Expr> repl;
    for (int v = 0; v < dimension(); ++v) repl.emplace_back(g[static_cast<std::size_t>(v)]);
    for (int i = 0; i < chart_->dimension(); ++i) repl.push_back(coordinate(chart_, i));
    std::vector<Expr> comps;
    for (const auto& c : map_->components()) comps.push_back(substitute(c, repl));
    return SmoothMap(chart_, chart_, std::move(comps), name_ + "_g");
  }

  Point apply(std::span<const double> g, const Point& x) const {
    check_group_element(g);
    require_same_chart(x.chart(), chart_, "action \"" + name_ + "\"");
    std::vector<double> ext(g.begin(), g.end());
    ext.insert(ext.end(), x.values().begin(), x.values().end());
    return Point(chart_, map_->apply_raw(ext));
  }

  /// The fundamental field of generator v: ∂α/∂g_v at g = 0.
  const VectorField& fundamental_vf(int v) const { return fundamental_.at(static_cast<std::size_t>(v)); }
  const std::vector<VectorField>& fundamental_fields() const noexcept { return fundamental_; }

  /// Columns are v_Q for each generator at p.
  Eigen::MatrixXd generator_matrix(const Point& p) const {
    Eigen::MatrixXd v(chart_->dimension(), dimension());
    for (int j = 0; j < dimension(); ++j) v.col(j) = fundamental_[static_cast<std::size_t>(j)].at(p);
    return v;
  }

  /// Uniform group elements: translations in [-1, 1], rotations in [0, 2π).
  std::vector<std::vector<double>> sample_group(std::size_t count, std::uint64_t seed) const {
    std::vector<std::vector<double>> out;
    const auto pts = sample_points(parameter_chart(), count, seed);
    for (const auto& p : pts) out.emplace_back(p.values().begin(), p.values().end());
    return out;
  }

  ChartPtr parameter_chart() const {
    std::vector<std::string> names;
    std::vector<bool> periodic;
    for (int v = 0; v < dimension(); ++v) {
      names.push_back(extended_->coordinate(v));
      periodic.push_back(extended_->periodic(v));
    }
    return make_chart(name_ + "_group", names, periodic);
  }

 private:
  static ChartPtr extend(const GroupModel& model, const ChartPtr& chart, const std::vector<std::string>& parameters,
                         const std::string& name) {
    if (static_cast<int>(parameters.size()) != model.dimension())
      throw Error("action \"" + name + "\": expected " + std::to_string(model.dimension()) + " group parameters");
    std::vector<std::string> names = parameters;
    std::vector<bool> periodic;
    std::vector<Interval> box;
    for (int v = 0; v < model.dimension(); ++v) {
      periodic.push_back(v >= model.translations);
      box.push_back(Interval{});
    }
    for (int i = 0; i < chart->dimension(); ++i) {
      names.push_back(chart->coordinate(i));
      periodic.push_back(chart->periodic(i));
      box.push_back(chart->box(i));
    }
    return make_chart(chart->name() + "_" + name + "_ext", names, periodic, box);
  }

  VectorField derive_fundamental(int v) const {
    std::vector<Expr> repl;
    for (int u = 0; u < dimension(); ++u) repl.emplace_back(0.0);
    for (int i = 0; i < chart_->dimension(); ++i) repl.push_back(coordinate(chart_, i));
    std::vector<Expr> comps;
    for (int i = 0; i < chart_->dimension(); ++i) comps.push_back(substitute(map_->partial(i, v), repl));
    return VectorField(chart_, std::move(comps), "v" + std::to_string(v + 1));
  }

  void check_group_element(std::span<const double> g) const {
    if (static_cast<int>(g.size()) != dimension())
      throw Error("action \"" + name_ + "\": group element needs " + std::to_string(dimension()) + " parameters");
  }

  GroupModel model_;
  ChartPtr chart_;
  std::string name_;
  ChartPtr extended_;
  std::shared_ptr<const SmoothMap> map_;
  std::vector<VectorField> fundamental_;
};

/// α(0, x) = x and α(g, α(h, x)) = α(g + h, x) at sampled g, h, x.
inline CheckReport verify_action_axioms(const GroupAction& a, const Sampling& sampling, const Tolerances& tol) {
  CheckReport r;
  r.subject = "action " + a.name();
  r.seed = sampling.seed;
  const auto xs = sample_points(a.chart(), sampling.samples, derive_seed(sampling.seed, stream_id("action-x")));
  const auto gs = a.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("action-g")));
  const auto hs = a.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("action-h")));
  const std::vector<double> identity(static_cast<std::size_t>(a.dimension()), 0.0);
  Residual unit, comp;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    unit.add(point_distance(a.apply(identity, xs[s]), xs[s]));
    std::vector<double> gh(gs[s]);
    for (std::size_t v = 0; v < gh.size(); ++v) gh[v] += hs[s][v];
    comp.add(point_distance(a.apply(gs[s], a.apply(hs[s], xs[s])), a.apply(gh, xs[s])));
  }
  r.add(unit.upper("identity acts trivially", tol.structure));
  r.add(comp.upper("composition is additive", tol.structure));
  return r;
}

/// F∘φ^src_g = φ^dst_g∘F at samples: F maps orbits to orbits.
inline CheckReport verify_intertwines(const SmoothMap& f, const GroupAction& src, const GroupAction& dst,
                                      const Sampling& sampling, const Tolerances& tol) {
  require_same_chart(f.source(), src.chart(), "intertwining map source");
  require_same_chart(f.target(), dst.chart(), "intertwining map target");
  if (src.dimension() != dst.dimension()) throw Error("intertwined actions have different group dimensions");
  CheckReport r;
  r.subject = f.name() + " intertwines " + src.name() + " and " + dst.name();
  r.seed = sampling.seed;
  const auto xs = sample_points(f.source(), sampling.samples, derive_seed(sampling.seed, stream_id("intertwine-x")));
  const auto gs = src.sample_group(sampling.samples, derive_seed(sampling.seed, stream_id("intertwine-g")));
  Residual res;
  for (std::size_t s = 0; s < xs.size(); ++s) res.add(point_distance(f(src.apply(gs[s], xs[s])), dst.apply(gs[s], f(xs[s]))));
  r.add(res.upper("equivariant", tol.structure));
  return r;
}

}  // namespace cosym
