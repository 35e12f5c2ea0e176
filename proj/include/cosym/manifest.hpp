#pragma once

// JSON manifests: named charts, maps, forms, groupoids, actions, moment maps
// and reductions, followed by a list of check directives. Every expression is
// parsed against the chart it is declared on; every reference must resolve.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosym/reduction.hpp"

namespace cosym {

inline constexpr int kManifestSchemaVersion = 1;

struct CheckDirective {
  std::string kind;
  std::string name;
  bool expect_pass = true;
  nlohmann::json args;  // the directive object itself
};

struct FunctionSet {
  ChartPtr chart;
  std::vector<Expr> exprs;
};

struct SectionSet {
  ChartPtr chart;
  std::vector<ExactSection> sections;
};

struct Manifest {
  std::string name;
  std::map<std::string, ChartPtr> charts;
  std::map<std::string, SmoothMap> maps;
  std::map<std::string, DifferentialForm> forms;
  std::map<std::string, VectorField> fields;
  std::map<std::string, FunctionSet> functions;
  std::map<std::string, CosymplecticStructure> structures;
  std::map<std::string, GroupoidPresentation> groupoids;
  std::map<std::string, GroupoidMorphism> morphisms;
  std::map<std::string, GroupAction> actions;
  std::map<std::string, MomentMap> moment_maps;
  std::map<std::string, PoissonBase> poisson;
  std::map<std::string, IMFormPair> im_forms;
  std::map<std::string, SectionSet> sections;
  std::map<std::string, ReductionPresentation> reductions;
  std::map<std::string, PoissonQuotient> quotients;
  std::vector<CheckDirective> checks;
};

namespace detail {

class ManifestReader {
 public:
  explicit ManifestReader(const nlohmann::json& root) : root_(root) {}

  Manifest read() {
    if (!root_.is_object()) fail("", "manifest must be a JSON object");
    if (root_.contains("schema_version")) {
      const auto& v = root_.at("schema_version");
      if (!v.is_number_integer() || v.get<int>() != kManifestSchemaVersion)
        fail("schema_version", "unsupported schema version " + v.dump());
    }
    m_.name = root_.value("name", std::string("manifest"));
    section("charts", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { chart(n, j, at); });
    section("maps", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { map(n, j, at); });
    section("forms", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { form(n, j, at); });
    section("fields", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { field(n, j, at); });
    section("functions", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { functions(n, j, at); });
    section("structures", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { structure(n, j, at); });
    section("groupoids", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { groupoid(n, j, at); });
    section("morphisms", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { morphism(n, j, at); });
    section("actions", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { action(n, j, at); });
    section("moment_maps", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { moment(n, j, at); });
    section("poisson", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { poisson(n, j, at); });
    section("im_forms", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { im_forms(n, j, at); });
    section("sections", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { sections(n, j, at); });
    section("reductions", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { reduction(n, j, at); });
    section("quotients", [&](const std::string& n, const nlohmann::json& j, const std::string& at) { quotient(n, j, at); });
    if (root_.contains("checks")) {
      const auto& cs = root_.at("checks");
      if (!cs.is_array()) fail("checks", "expected an array");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string at = "checks[" + std::to_string(i) + "]";
        const auto& c = cs[i];
        if (!c.is_object()) fail(at, "expected an object");
        CheckDirective d;
        d.kind = str(c, "kind", at);
        d.name = c.value("name", d.kind);
        const std::string expect = c.value("expect", std::string("pass"));
        if (expect != "pass" && expect != "fail") fail(at + ".expect", "must be \"pass\" or \"fail\"");
        d.expect_pass = expect == "pass";
        d.args = c;
        m_.checks.push_back(std::move(d));
      }
    }
    return std::move(m_);
  }

 private:
  [[noreturn]] static void fail(const std::string& at, const std::string& what) {
    throw ManifestError(at.empty() ? what : at + ": " + what);
  }

  template <typename F>
  void section(const char* key, F&& each) {
    if (!root_.contains(key)) return;
    const auto& s = root_.at(key);
    if (!s.is_object()) fail(key, "expected an object keyed by name");
    for (const auto& [name, body] : s.items()) {
      const std::string at = std::string(key) + "." + name;
      if (!body.is_object()) fail(at, "expected an object");
      try {
        each(name, body, at);
      } catch (const ManifestError&) {
        throw;
      } catch (const nlohmann::json::exception& e) {
        fail(at, e.what());
      } catch (const Error& e) {
        fail(at, e.what());
      }
    }
  }

  static const nlohmann::json& field_of(const nlohmann::json& j, const char* key, const std::string& at) {
    if (!j.contains(key)) fail(at, std::string("missing field \"") + key + "\"");
    return j.at(key);
  }

  static std::string str(const nlohmann::json& j, const char* key, const std::string& at) {
    const auto& v = field_of(j, key, at);
    if (!v.is_string()) fail(at + "." + key, "expected a string");
    return v.get<std::string>();
  }

  static std::vector<std::string> strings(const nlohmann::json& j, const char* key, const std::string& at) {
    const auto& v = field_of(j, key, at);
    if (!v.is_array()) fail(at + "." + key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(at + "." + key, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  template <typename T>
  static const T& ref(const std::map<std::string, T>& table, const std::string& name, const std::string& kind,
                      const std::string& at) {
    const auto it = table.find(name);
    if (it == table.end()) fail(at, "unresolved " + kind + " reference \"" + name + "\"");
    return it->second;
  }

  template <typename T>
  const T& ref(const std::map<std::string, T>& table, const nlohmann::json& j, const char* key, const std::string& kind,
               const std::string& at) const {
    return ref(table, str(j, key, at), kind, at + "." + key);
  }

  static std::vector<Expr> exprs(const std::vector<std::string>& texts, const Chart& chart, const std::string& at) {
    std::vector<Expr> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      try {
        out.push_back(parse_expr(texts[i], chart));
      } catch (const Error& e) {
        fail(at + "[" + std::to_string(i) + "]", e.what());
      }
    }
    return out;
  }

  void chart(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const auto coords = strings(j, "coords", at);
    std::vector<bool> periodic(coords.size(), false);
    std::vector<Interval> box(coords.size());
    auto index = [&](const std::string& c, const std::string& where) {
      for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] == c) return i;
      fail(where, "unknown coordinate \"" + c + "\"");
    };
    if (j.contains("periodic"))
      for (const auto& c : strings(j, "periodic", at)) periodic[index(c, at + ".periodic")] = true;
    if (j.contains("box")) {
      for (const auto& [c, range] : j.at("box").items()) {
        if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
          fail(at + ".box." + c, "expected [lower, upper]");
        box[index(c, at + ".box")] = Interval{range[0].get<double>(), range[1].get<double>()};
      }
    }
    m_.charts.emplace(name, make_chart(name, coords, periodic, box));
  }

  void map(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& from = ref(m_.charts, j, "from", "chart", at);
    const ChartPtr& to = ref(m_.charts, j, "to", "chart", at);
    m_.maps.emplace(name, SmoothMap(from, to, exprs(strings(j, "components", at), *from, at + ".components"), name));
  }

  DifferentialForm parse_terms(const ChartPtr& chart, int degree, const nlohmann::json& terms, const std::string& at) {
    DifferentialForm out(chart, degree);
    if (!terms.is_object()) fail(at, "expected an object of multi-index terms");
    for (const auto& [key, value] : terms.items()) {
      if (!value.is_string()) fail(at + "." + key, "expected an expression string");
      std::vector<int> idx;
      try {
        idx = parse_multi_index(key, *chart);
        if (static_cast<int>(idx.size()) != degree)
          throw DegreeError("term \"" + key + "\" does not have degree " + std::to_string(degree));
        out.add_term(idx, parse_expr(value.get<std::string>(), *chart));
      } catch (const Error& e) {
        fail(at + "." + key, e.what());
      }
    }
    return out;
  }

  void form(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    const auto& deg = field_of(j, "degree", at);
    if (!deg.is_number_integer()) fail(at + ".degree", "expected an integer");
    const int k = deg.get<int>();
    if (k < 0 || k > c->dimension()) fail(at + ".degree", "degree out of range for chart " + c->name());
    m_.forms.emplace(name, parse_terms(c, k, j.value("terms", nlohmann::json::object()), at + ".terms"));
  }

  void field(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    m_.fields.emplace(name, VectorField(c, exprs(strings(j, "components", at), *c, at + ".components"), name));
  }

  static std::uint64_t seed_of(const nlohmann::json& r) { return r.value("seed", std::uint64_t{1}); }

  void functions(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    FunctionSet set{c, {}};
    if (j.contains("exprs")) set.exprs = exprs(strings(j, "exprs", at), *c, at + ".exprs");
    if (j.contains("random")) {
      const auto& r = j.at("random");
      const auto more = polynomial_corpus(c, r.value("count", std::size_t{8}), r.value("degree", 2), seed_of(r));
      set.exprs.insert(set.exprs.end(), more.begin(), more.end());
    }
    m_.functions.emplace(name, std::move(set));
  }

  void structure(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const DifferentialForm& w = ref(m_.forms, j, "omega", "form", at);
    const DifferentialForm& e = ref(m_.forms, j, "eta", "form", at);
    if (w.degree() != 2 || e.degree() != 1) fail(at, "omega must be a 2-form and eta a 1-form");
    require_same_chart(w.chart(), e.chart(), at);
    m_.structures.emplace(name, CosymplecticStructure(w, e, name));
  }

  void groupoid(const std::string& name, const nlohmann::json& j, const std::string& at) {
    auto mp = [&](const char* key) -> const SmoothMap& { return ref(m_.maps, j, key, "map", at); };
    GroupoidPresentation g{name, mp("source"), mp("target"), mp("unit"), mp("inverse"),
                           mp("first"), mp("second"), mp("multiply"), std::nullopt};
    if (j.contains("triple")) {
      const auto& t = j.at("triple");
      const std::string tat = at + ".triple";
      g.triple = TripleComposition{ref(m_.maps, t, "ab", "map", tat), ref(m_.maps, t, "bc", "map", tat),
                                   ref(m_.maps, t, "ab_c", "map", tat), ref(m_.maps, t, "a_bc", "map", tat)};
    }
    g.validate();
    m_.groupoids.emplace(name, std::move(g));
  }

  void morphism(const std::string& name, const nlohmann::json& j, const std::string& at) {
    GroupoidMorphism f{name, ref(m_.maps, j, "arrows", "map", at), ref(m_.maps, j, "base", "map", at), std::nullopt};
    if (j.contains("pairs")) f.pairs = ref(m_.maps, j, "pairs", "map", at);
    m_.morphisms.emplace(name, std::move(f));
  }

  void action(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    const auto tr = j.contains("translations") ? strings(j, "translations", at) : std::vector<std::string>{};
    const auto rot = j.contains("rotations") ? strings(j, "rotations", at) : std::vector<std::string>{};
    std::vector<std::string> params = tr;
    params.insert(params.end(), rot.begin(), rot.end());
    const auto comps = strings(j, "components", at);
    try {
      m_.actions.emplace(name, GroupAction::parse(GroupModel{static_cast<int>(tr.size()), static_cast<int>(rot.size())}, c,
                                                  params, comps, name));
    } catch (const Error& e) {
      fail(at + ".components", e.what());
    }
  }

  void moment(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    const int sign = j.value("sign", 1);
    if (sign != 1 && sign != -1) fail(at + ".sign", "must be 1 or -1");
    m_.moment_maps.emplace(name, MomentMap{c, exprs(strings(j, "components", at), *c, at + ".components"), sign, name});
  }

  void poisson(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    PoissonBase pi = PoissonBase::zero(c);
    if (j.contains("bivector")) {
      for (const auto& [key, value] : j.at("bivector").items()) {
        const std::string where = at + ".bivector." + key;
        const auto caret = key.find('^');
        if (caret == std::string::npos || !value.is_string()) fail(where, "expected \"a^b\": \"expression\"");
        const auto i = c->index_of(key.substr(0, caret));
        const auto k = c->index_of(key.substr(caret + 1));
        if (!i || !k) fail(where, "unknown coordinate in \"" + key + "\"");
        try {
          pi.set(*i, *k, parse_expr(value.get<std::string>(), *c));
        } catch (const Error& e) {
          fail(where, e.what());
        }
      }
    }
    m_.poisson.emplace(name, std::move(pi));
  }

  void im_forms(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "base", "chart", at);
    IMFormPair im = IMFormPair::standard(c);
    if (j.contains("mu")) {
      const auto& rows = j.at("mu");
      if (!rows.is_array() || static_cast<int>(rows.size()) != c->dimension()) fail(at + ".mu", "expected one row per base coordinate");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> texts;
        for (const auto& e : rows[i]) texts.push_back(e.get<std::string>());
        im.mu[i] = exprs(texts, *c, at + ".mu[" + std::to_string(i) + "]");
      }
    }
    if (j.contains("nu")) im.nu = exprs(strings(j, "nu", at), *c, at + ".nu");
    im.validate();
    m_.im_forms.emplace(name, std::move(im));
  }

  void sections(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const ChartPtr& c = ref(m_.charts, j, "chart", "chart", at);
    SectionSet set{c, {}};
    if (j.contains("pairs")) {
      const auto& ps = j.at("pairs");
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!ps[i].is_array() || ps[i].size() != 2) fail(at + ".pairs[" + std::to_string(i) + "]", "expected [f, g]");
        const auto e = exprs({ps[i][0].get<std::string>(), ps[i][1].get<std::string>()}, *c, at + ".pairs[" + std::to_string(i) + "]");
        set.sections.push_back(ExactSection{e[0], e[1]});
      }
    }
    if (j.contains("random")) {
      const auto& r = j.at("random");
      const auto more = section_corpus(c, r.value("count", std::size_t{20}), r.value("degree", 3), seed_of(r));
      set.sections.insert(set.sections.end(), more.begin(), more.end());
    }
    m_.sections.emplace(name, std::move(set));
  }

  LevelReduction level(const nlohmann::json& j, const char* inc, const char* proj, const char* sec, const char* act,
                       const std::string& at) {
    LevelReduction l{ref(m_.maps, j, inc, "map", at), ref(m_.maps, j, proj, "map", at), ref(m_.maps, j, sec, "map", at),
                     std::nullopt};
    if (j.contains(act)) l.level_action = ref(m_.actions, j, act, "action", at);
    require_same_chart(l.projection.source(), l.level(), at + " projection");
    require_same_chart(l.section.source(), l.quotient(), at + " section");
    require_same_chart(l.section.target(), l.level(), at + " section");
    if (l.level_action) require_same_chart(l.level_action->chart(), l.level(), at + " level action");
    return l;
  }

  void reduction(const std::string& name, const nlohmann::json& j, const std::string& at) {
    const CosymplecticStructure& s = ref(m_.structures, j, "structure", "structure", at);
    ReductionPresentation red{name, s, ref(m_.actions, j, "action", "action", at), ref(m_.moment_maps, j, "moment_map", "moment map", at),
                              level(j, "inclusion", "projection", "section", "level_action", at),
                              std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    require_same_chart(red.level.inclusion.target(), s.chart(), at + " inclusion");
    if (j.contains("omega_red")) red.omega_red = FormField(ref(m_.forms, j, "omega_red", "form", at));
    if (j.contains("eta_red")) red.eta_red = FormField(ref(m_.forms, j, "eta_red", "form", at));
    for (const auto* f : {&red.omega_red, &red.eta_red})
      if (*f) require_same_chart((*f)->chart(), red.level.quotient(), at + " supplied reduced form");
    if (j.contains("groupoid")) {
      const auto& g = j.at("groupoid");
      const std::string gat = at + ".groupoid";
      red.groupoid = GroupoidReductionData{
          ref(m_.groupoids, g, "ambient", "groupoid", gat),       ref(m_.groupoids, g, "level", "groupoid", gat),
          ref(m_.groupoids, g, "reduced", "groupoid", gat),       ref(m_.morphisms, g, "inclusion", "morphism", gat),
          ref(m_.morphisms, g, "projection", "morphism", gat),    ref(m_.actions, g, "base_action", "action", gat),
          ref(m_.poisson, g, "base_poisson", "poisson", gat),     ref(m_.poisson, g, "reduced_poisson", "poisson", gat),
          ref(m_.im_forms, g, "im", "IM pair", gat),              ref(m_.im_forms, g, "im_reduced", "IM pair", gat),
          ref(m_.sections, g, "reduced_sections", "sections", gat).sections};
    }
    if (j.contains("leaf")) {
      const auto& l = j.at("leaf");
      const std::string lat = at + ".leaf";
      red.leaf = LeafReductionData{
          LeafSubgroupoid{ref(m_.groupoids, l, "groupoid", "groupoid", lat), ref(m_.morphisms, l, "inclusion", "morphism", lat)},
          ref(m_.actions, l, "action", "action", lat),
          level(l, "level_inclusion", "level_projection", "level_section", "level_action", lat),
          ref(m_.maps, l, "reduced_inclusion", "map", lat)};
    }
    m_.reductions.emplace(name, std::move(red));
  }

  void quotient(const std::string& name, const nlohmann::json& j, const std::string& at) {
    m_.quotients.emplace(name, PoissonQuotient{ref(m_.groupoids, j, "groupoid", "groupoid", at),
                                               ref(m_.actions, j, "action", "action", at),
                                               ref(m_.actions, j, "base_action", "action", at),
                                               ref(m_.maps, j, "projection", "map", at),
                                               ref(m_.maps, j, "base_projection", "map", at)});
  }

  const nlohmann::json& root_;
  Manifest m_;
};

}  // namespace detail

inline Manifest load_manifest(const nlohmann::json& root) { return detail::ManifestReader(root).read(); }

/// Parse errors keep nlohmann's "line L, column C" location.
inline nlohmann::json parse_manifest_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(std::string("malformed JSON: ") + e.what());
  }
}

inline nlohmann::json read_manifest_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest_text(buf.str());
}

inline Manifest load_manifest_file(const std::string& path) { return load_manifest(read_manifest_json(path)); }

}  // namespace cosym
