#pragma once

// Executes the check directives of a manifest and collects a run report.
// Unresolved references in a directive raise ManifestError before any check
// runs; errors raised by the geometry itself become failed entries.

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosym/manifest.hpp"

namespace cosym {

inline constexpr int kReportSchemaVersion = 1;

struct RunOptions {
  Sampling sampling;
  Tolerances tol;
};

struct CheckResult {
  std::string name;
  std::string kind;
  bool expect_pass = true;
  CheckReport report;

  bool matched() const { return report.passed() == expect_pass; }
  bool operator==(const CheckResult&) const = default;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string manifest;
  Sampling sampling;
  double tol = 1e-9;
  std::vector<CheckResult> checks;

  bool matched() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.matched(); });
  }
  int exit_code() const { return matched() ? 0 : 1; }
  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  j = nlohmann::json{{"name", c.name},
                     {"kind", c.kind},
                     {"expect", c.expect_pass ? "pass" : "fail"},
                     {"passed", c.report.passed()},
                     {"matched", c.matched()},
                     {"failing", c.report.failing()},
                     {"report", c.report}};
}

inline void from_json(const nlohmann::json& j, CheckResult& c) {
  c.name = j.at("name").get<std::string>();
  c.kind = j.at("kind").get<std::string>();
  c.expect_pass = j.at("expect").get<std::string>() == "pass";
  c.report = j.at("report").get<CheckReport>();
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
  j = nlohmann::json{{"schema_version", r.schema_version},
                     {"manifest", r.manifest},
                     {"seed", r.sampling.seed},
                     {"samples", r.sampling.samples},
                     {"tol", r.tol},
                     {"matched", r.matched()},
                     {"checks", r.checks}};
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
  r.schema_version = j.at("schema_version").get<int>();
  r.manifest = j.at("manifest").get<std::string>();
  r.sampling.seed = j.at("seed").get<std::uint64_t>();
  r.sampling.samples = j.at("samples").get<std::size_t>();
  r.tol = j.at("tol").get<double>();
  r.checks = j.at("checks").get<std::vector<CheckResult>>();
}

namespace detail {

/// Coefficientwise agreement of a form with a symbolic expectation.
inline CheckEntry compare_forms(const FormField& got, const DifferentialForm& want, const std::string& name,
                                const Sampling& sampling, double threshold) {
  require_same_chart(got.chart(), want.chart(), name);
  if (got.degree() != want.degree()) throw DegreeError(name + ": degree mismatch");
  Residual res;
  for (const auto& p : samples_for(got.chart(), sampling, "compare-" + name)) res.add(linalg::max_abs(got.at(p) - want.at(p)));
  return res.upper(name, threshold);
}

class DirectiveRunner {
 public:
  DirectiveRunner(const Manifest& m, const RunOptions& opt) : m_(m), opt_(opt) {}

  /// With `dry`, only resolves references.
  CheckReport run(const CheckDirective& d, bool dry) {
    dry_ = dry;
    at_ = "check \"" + d.name + "\"";
    args_ = &d.args;
    const auto it = table().find(d.kind);
    if (it == table().end()) throw ManifestError(at_ + ": unknown check kind \"" + d.kind + "\"");
    CheckReport r;
    try {
      r = it->second(*this);
    } catch (const ManifestError&) {
      throw;
    } catch (const Error& e) {
      r = CheckReport{};
      r.add_error(d.kind, e.what());
    }
    r.seed = opt_.sampling.seed;
    if (r.subject.empty()) r.subject = d.name;
    return r;
  }

 private:
  using Handler = std::function<CheckReport(DirectiveRunner&)>;

  std::string key(const char* k) const {
    if (!args_->contains(k) || !args_->at(k).is_string()) throw ManifestError(at_ + ": missing string field \"" + k + "\"");
    return args_->at(k).get<std::string>();
  }
  bool has(const char* k) const { return args_->contains(k); }

  template <typename T>
  const T& get(const std::map<std::string, T>& table, const char* k) const {
    const std::string name = key(k);
    const auto it = table.find(name);
    if (it == table.end()) throw ManifestError(at_ + "." + k + ": unresolved reference \"" + name + "\"");
    return it->second;
  }

  const Sampling& s() const { return opt_.sampling; }
  const Tolerances& t() const { return opt_.tol; }

  static const std::map<std::string, Handler>& table() {
    static const std::map<std::string, Handler> handlers = {
        {"cosymplectic", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           std::optional<int> units;
           if (r.has("unit_dimension")) units = r.args_->at("unit_dimension").get<int>();
           return r.dry_ ? CheckReport{} : verify_cosymplectic(st, r.s(), r.t(), units);
         }},
        {"flat_roundtrip", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           return r.dry_ ? CheckReport{} : verify_flat_roundtrip(st, r.s(), r.t());
         }},
        {"reeb", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const VectorField* want = r.has("expect_field") ? &r.get(r.m_.fields, "expect_field") : nullptr;
           if (r.dry_) return CheckReport{};
           CheckReport c = verify_reeb(st, r.s(), r.t());
           if (want) {
             require_same_chart(want->chart(), st.chart(), "expected Reeb field");
             Residual res;
             for (const auto& p : samples_for(st.chart(), r.s(), "reeb-expected")) res.add(linalg::max_abs(st.reeb(p) - want->at(p)));
             c.add(res.upper("xi = " + want->name(), r.t().closed));
           }
           return c;
         }},
        {"hamiltonian", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& fs = r.get(r.m_.functions, "functions");
           return r.dry_ ? CheckReport{} : verify_hamiltonian(st, fs.exprs, r.s(), r.t());
         }},
        {"poisson", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& fs = r.get(r.m_.functions, "functions");
           return r.dry_ ? CheckReport{} : verify_poisson(st, fs.exprs, r.s(), r.t());
         }},
        {"leaf_distribution", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           return r.dry_ ? CheckReport{} : verify_leaf_distribution(st, r.s(), r.t());
         }},
        {"groupoid", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           return r.dry_ ? CheckReport{} : verify_groupoid(g, r.s(), r.t());
         }},
        {"multiplicative", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           const auto& f = r.get(r.m_.forms, "form");
           return r.dry_ ? CheckReport{} : verify_multiplicative(g, f, r.s(), r.t(), r.key("form"));
         }},
        {"cosymplectic_groupoid", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           const auto& st = r.get(r.m_.structures, "structure");
           return r.dry_ ? CheckReport{} : verify_cosymplectic_groupoid(g, st, r.s(), r.t());
         }},
        {"morphism", [](DirectiveRunner& r) {
           const auto& f = r.get(r.m_.morphisms, "morphism");
           const auto& g = r.get(r.m_.groupoids, "source");
           const auto& h = r.get(r.m_.groupoids, "target");
           return r.dry_ ? CheckReport{} : verify_groupoid_morphism(f, g, h, r.s(), r.t());
         }},
        {"additive", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           const auto& j = r.get(r.m_.moment_maps, "moment_map");
           return r.dry_ ? CheckReport{} : verify_additive(g, j.components, r.s(), r.t(), j.name);
         }},
        {"leaf_subgroupoid", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& lg = r.get(r.m_.groupoids, "leaf_groupoid");
           const auto& li = r.get(r.m_.morphisms, "leaf_inclusion");
           return r.dry_ ? CheckReport{} : verify_leaf_subgroupoid(g, st, LeafSubgroupoid{lg, li}, r.s(), r.t());
         }},
        {"action", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& a = r.get(r.m_.actions, "action");
           return r.dry_ ? CheckReport{} : verify_cosymplectic_action(st, a, r.s(), r.t());
         }},
        {"moment_map", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& a = r.get(r.m_.actions, "action");
           const auto& j = r.get(r.m_.moment_maps, "moment_map");
           const GroupoidPresentation* g = r.has("groupoid") ? &r.get(r.m_.groupoids, "groupoid") : nullptr;
           return r.dry_ ? CheckReport{} : verify_moment_map(st, a, j, r.s(), r.t(), g);
         }},
        {"regular_value", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           return r.dry_ ? CheckReport{} : verify_regular_value(red.moment, red.action, red.level.inclusion, r.s(), r.t());
         }},
        {"reduced_forms", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           const DifferentialForm* w = r.has("expect_omega") ? &r.get(r.m_.forms, "expect_omega") : nullptr;
           const DifferentialForm* e = r.has("expect_eta") ? &r.get(r.m_.forms, "expect_eta") : nullptr;
           if (r.dry_) return CheckReport{};
           CheckReport c = verify_reduced_forms(red, r.s(), r.t());
           if (w || e) {
             const ReducedForms forms = reduced_forms(red);
             if (w) c.add(compare_forms(forms.omega, *w, "omega_red = " + r.key("expect_omega"), r.s(), r.t().closed));
             if (e) c.add(compare_forms(forms.eta, *e, "eta_red = " + r.key("expect_eta"), r.s(), r.t().closed));
           }
           return c;
         }},
        {"groupoid_reduction", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           return r.dry_ ? CheckReport{} : verify_groupoid_reduction(red, r.s(), r.t());
         }},
        {"leaf_reduction", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           return r.dry_ ? CheckReport{} : verify_leaf_reduction(red, r.s(), r.t());
         }},
        {"reduction_square", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           return r.dry_ ? CheckReport{} : verify_reduction_square(red, r.s(), r.t());
         }},
        {"reduced_im_forms", [](DirectiveRunner& r) {
           const auto& red = r.get(r.m_.reductions, "reduction");
           if (r.dry_) return CheckReport{};
           if (!red.groupoid) throw ManifestError(r.at_ + ": reduction has no groupoid data");
           return verify_reduced_im_forms(*red.groupoid, r.s(), r.t());
         }},
        {"symplectization", [](DirectiveRunner& r) {
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& a = r.get(r.m_.actions, "action");
           const auto& j = r.get(r.m_.moment_maps, "moment_map");
           return r.dry_ ? CheckReport{} : verify_symplectization_correspondence(st, a, j, r.s(), r.t());
         }},
        {"hypersurface", [](DirectiveRunner& r) {
           const auto& w = r.get(r.m_.forms, "omega");
           const auto& i = r.get(r.m_.maps, "inclusion");
           const auto& x = r.get(r.m_.fields, "field");
           const DifferentialForm* e = r.has("expect_eta") ? &r.get(r.m_.forms, "expect_eta") : nullptr;
           const VectorField* xi = r.has("expect_reeb") ? &r.get(r.m_.fields, "expect_reeb") : nullptr;
           if (r.dry_) return CheckReport{};
           CheckReport c;
           c.subject = "hypersurface " + i.name();
           try {
             const CosymplecticStructure st = from_symplectic_hypersurface(w, i, x, r.s(), r.t());
             c.merge(verify_cosymplectic(st, r.s(), r.t()), "hypersurface");
             if (e) c.add(compare_forms(st.eta(), *e, "hypersurface/eta = " + r.key("expect_eta"), r.s(), r.t().closed));
             if (xi) {
               Residual res;
               for (const auto& p : samples_for(st.chart(), r.s(), "hypersurface-reeb")) res.add(linalg::max_abs(st.reeb(p) - xi->at(p)));
               c.add(res.upper("hypersurface/xi = " + xi->name(), r.t().solve));
             }
           } catch (const ManifestError&) {
             throw;
           } catch (const Error& ex) {
             c.add_error("hypersurface", ex.what());
           }
           return c;
         }},
        {"im_forms", [](DirectiveRunner& r) {
           const auto& pi = r.get(r.m_.poisson, "poisson");
           const auto& im = r.get(r.m_.im_forms, "im");
           const auto& sec = r.get(r.m_.sections, "sections");
           if (r.dry_) return CheckReport{};
           CheckReport c;
           c.subject = "IM forms " + r.key("im");
           c.merge(verify_central_extension(pi, sec.sections, r.s(), r.t()), "central_extension");
           c.merge(verify_im_2form(pi, im, sec.sections, r.s(), r.t()), "im_2form");
           c.merge(verify_im_1form(pi, im, sec.sections, r.s(), r.t()), "im_1form");
           return c;
         }},
        {"induced_im_forms", [](DirectiveRunner& r) {
           const auto& g = r.get(r.m_.groupoids, "groupoid");
           const auto& st = r.get(r.m_.structures, "structure");
           const auto& pi = r.get(r.m_.poisson, "poisson");
           const auto& sec = r.get(r.m_.sections, "sections");
           return r.dry_ ? CheckReport{} : verify_induced_im_forms(g, st, pi, sec.sections, r.s(), r.t());
         }},
        {"infinitesimal_moment", [](DirectiveRunner& r) {
           const auto& pi = r.get(r.m_.poisson, "poisson");
           const auto& a = r.get(r.m_.actions, "action");
           const auto& im = r.get(r.m_.im_forms, "im");
           const auto& sec = r.get(r.m_.sections, "sections");
           return r.dry_ ? CheckReport{} : verify_infinitesimal_moment(pi, a, im, sec.sections, r.s(), r.t());
         }},
        {"averaging", [](DirectiveRunner& r) {
           const auto& f = r.get(r.m_.forms, "form");
           const auto& a = r.get(r.m_.actions, "action");
           const DifferentialForm* avg = r.has("expect_average") ? &r.get(r.m_.forms, "expect_average") : nullptr;
           const int order = r.args_->value("order", 64);
           if (r.dry_) return CheckReport{};
           CheckReport c = verify_averaging(f, a, r.s(), r.t(), order);
           if (avg) c.add(compare_forms(average_form(f, a, order), *avg, "average = " + r.key("expect_average"), r.s(), r.t().averaging));
           return c;
         }},
        {"poisson_quotient", [](DirectiveRunner& r) {
           const auto& q = r.get(r.m_.quotients, "quotient");
           return r.dry_ ? CheckReport{} : verify_poisson_quotient(q, r.s(), r.t());
         }},
    };
    return handlers;
  }

  const Manifest& m_;
  RunOptions opt_;
  bool dry_ = false;
  std::string at_;
  const nlohmann::json* args_ = nullptr;
};

}  // namespace detail

inline std::vector<std::string> check_kinds() {
  // Kept in sync with the dispatch table by the CLI tests.
  return {"cosymplectic", "flat_roundtrip", "reeb", "hamiltonian", "poisson", "leaf_distribution", "groupoid",
          "multiplicative", "cosymplectic_groupoid", "morphism", "additive", "leaf_subgroupoid", "action", "moment_map",
          "regular_value", "reduced_forms", "groupoid_reduction", "leaf_reduction", "reduction_square",
          "reduced_im_forms", "symplectization", "hypersurface", "im_forms", "induced_im_forms",
          "infinitesimal_moment", "averaging", "poisson_quotient"};
}

/// Resolves every directive first (ManifestError on a dangling reference), then runs them in order.
inline RunReport run_manifest(const Manifest& m, const RunOptions& opt) {
  detail::DirectiveRunner runner(m, opt);
  for (const auto& d : m.checks) runner.run(d, true);
  RunReport out;
  out.manifest = m.name;
  out.sampling = opt.sampling;
  out.tol = opt.tol.tol;
  for (const auto& d : m.checks) out.checks.push_back(CheckResult{d.name, d.kind, d.expect_pass, runner.run(d, false)});
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace detail

/// Human-readable summary: one line per check, failing entries underneath.
inline std::string summarize(const RunReport& r) {
  std::string out = r.manifest + " (seed " + std::to_string(r.sampling.seed) + ", " + std::to_string(r.sampling.samples) +
                    " samples, tol " + detail::format_double(r.tol) + ")\n";
  std::size_t mismatched = 0;
  for (const auto& c : r.checks) {
    const bool ok = c.report.passed();
    if (!c.matched()) ++mismatched;
    out += std::string("  ") + (ok ? "PASS " : "FAIL ") + c.name + " [" + c.kind + ", expect " + (c.expect_pass ? "pass" : "fail") +
           (c.matched() ? "" : ", UNEXPECTED") + "]\n";
    for (const auto& e : c.report.entries) {
      if (e.passed) continue;
      out += "      " + e.name + ": ";
      if (std::isfinite(e.max) || e.bound == Bound::Lower)
        out += (e.bound == Bound::Upper ? "max " + detail::format_double(e.max) + " >= " : "min " + detail::format_double(e.min) + " <= ") +
               detail::format_double(e.threshold);
      else
        out += "error";
      if (!e.note.empty()) out += " (" + e.note + ")";
      out += "\n";
    }
    for (const auto& u : c.report.unverified) out += "      unverified: " + u + "\n";
  }
  out += mismatched == 0 ? "all " + std::to_string(r.checks.size()) + " checks matched their expectation\n"
                         : std::to_string(mismatched) + " of " + std::to_string(r.checks.size()) + " checks did not match\n";
  return out;
}

}  // namespace cosym
