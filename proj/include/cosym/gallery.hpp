#pragma once

// Built-in geometries, generated as manifest JSON and run through the same
// loader as user manifests. `cotangent_s1` and `poisson_quotient_counterexample`
// take the dimensions n (base) and k (kept positions, 1 ≤ k < n).

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosym/errors.hpp"

namespace cosym {

struct GalleryEntry {
  std::string name;
  std::string description;
  bool parametrized = false;
};

/// A deliberate corruption of a built-in; `stage` must appear in a failing
/// "check/entry" name of the corrupted run.
struct Mutation {
  std::string name;
  std::string entry;
  std::string description;
  std::string stage;
};

inline std::vector<GalleryEntry> gallery() {
  return {
      {"cotangent_s1", "T*R^n x S^1 => R^n reduced by translations of q_{k+1..n}: ambient groupoid, Reeb field, moment map, "
                       "reduced groupoid T*R^k x S^1, IM forms and the reduction square", true},
      {"poisson_quotient_counterexample", "full quotient of T*R^n x S^1 by the same translations: fails the dimension count "
                                          "of a cosymplectic groupoid (expected failure)", true},
      {"hypersurface", "T*R x R inside T*R^2 with the transverse symplectic field d/dr: induced eta = ds, Reeb d/ds", false},
      {"symplectization", "moment map of T*R^2 x S^1 lifted to the symplectization", false},
      {"leaf_reduction", "leaf {theta = 0} of T*R^2 x S^1, reduced alongside the ambient groupoid", false},
      {"im_forms", "IM 2-form/1-form equations on the symplectic plane, with a corrupted mu (expected failure)", false},
      {"averaging", "averaging a closed 1-form over the circle action on the theta factor", false},
      {"product_circle_units", "T*R x S^1 over R x S^1 with S^1 => S^1 units: dimension count fails (expected failure)", false},
  };
}

inline std::vector<Mutation> mutations() {
  return {
      {"sign_flipped_multiplication", "cotangent_s1", "product (q, p - r, theta + phi)", "multiplicative"},
      {"degenerate_omega", "cotangent_s1", "omega = 0", "cosymplectic/volume form nonvanishing"},
      {"non_invariant_form", "cotangent_s1", "eta = dtheta + 2 q_n dq_n", "action/phi_g* eta = eta"},
      {"broken_moment_map", "cotangent_s1", "J = 2 p_{k+1..n}", "moment_map/X_<J,v> = sign * v_Q"},
      {"non_basic_form", "cotangent_s1", "omega + 2 q_n dq_n ^ dp_1", "reduced_forms/omega basic"},
      {"tangent_field", "hypersurface", "X = d/dq, tangent to the hypersurface", "hypersurface/hypersurface"},
  };
}

namespace gallery_detail {

using nlohmann::json;

inline std::vector<std::string> seq(const std::string& prefix, int from, int to) {
  std::vector<std::string> out;
  for (int i = from; i <= to; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

template <typename... Parts>
std::vector<std::string> cat(const Parts&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

inline std::vector<std::string> zeros(int count) { return std::vector<std::string>(static_cast<std::size_t>(count), "0"); }

inline std::vector<std::string> plus(const std::vector<std::string>& a, const std::vector<std::string>& b, const char* op = " + ") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + op + b[i]);
  return out;
}

inline std::vector<std::string> neg(const std::vector<std::string>& a) {
  std::vector<std::string> out;
  for (const auto& x : a) out.push_back("-" + x);
  return out;
}

inline json chart(const std::vector<std::string>& coords, const std::vector<std::string>& periodic = {}) {
  json c{{"coords", coords}};
  if (!periodic.empty()) c["periodic"] = periodic;
  return c;
}

inline json map(const std::string& from, const std::string& to, const std::vector<std::string>& comps) {
  return json{{"from", from}, {"to", to}, {"components", comps}};
}

inline json form(const std::string& chart, int degree, const json& terms) {
  return json{{"chart", chart}, {"degree", degree}, {"terms", terms}};
}

inline json symplectic_terms(int from, int to) {
  json t = json::object();
  for (int i = from; i <= to; ++i) t["dq" + std::to_string(i) + "^dp" + std::to_string(i)] = "1";
  return t;
}

inline json translations(const std::string& chart, const std::vector<std::string>& coords, int k, int n) {
  std::vector<std::string> comps = coords;
  for (int j = k + 1; j <= n; ++j) {
    const std::string q = "q" + std::to_string(j);
    for (auto& c : comps)
      if (c == q) c = q + " + a" + std::to_string(j);
  }
  return json{{"chart", chart}, {"translations", seq("a", k + 1, n)}, {"components", comps}};
}

inline json check(const std::string& kind, json args, const std::string& name = {}, bool expect_pass = true) {
  args["kind"] = kind;
  args["name"] = name.empty() ? kind : name;
  if (!expect_pass) args["expect"] = "fail";
  return args;
}

inline void require_dimensions(int n, int k) {
  if (n < 2 || k < 1 || k >= n) throw ManifestError("built-in needs n >= 2 and 1 <= k < n (got n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
}

/// Groupoid T*R^n x S^1 => R^n on charts M, G, C (pairs), T (triples).
inline void cotangent_groupoid(json& m, int n) {
  const auto q = seq("q", 1, n), p = seq("p", 1, n), r = seq("r", 1, n), u = seq("u", 1, n);
  m["charts"]["M"] = chart(q);
  m["charts"]["G"] = chart(cat(q, p, std::vector<std::string>{"theta"}), {"theta"});
  m["charts"]["C"] = chart(cat(q, p, r, std::vector<std::string>{"theta", "phi"}), {"theta", "phi"});
  m["charts"]["T"] = chart(cat(q, p, r, u, std::vector<std::string>{"theta", "phi", "psi"}), {"theta", "phi", "psi"});
  auto& mp = m["maps"];
  mp["s"] = map("G", "M", q);
  mp["t"] = map("G", "M", q);
  mp["eps"] = map("M", "G", cat(q, zeros(n), zeros(1)));
  mp["inv"] = map("G", "G", cat(q, neg(p), std::vector<std::string>{"-theta"}));
  mp["first"] = map("C", "G", cat(q, p, std::vector<std::string>{"theta"}));
  mp["second"] = map("C", "G", cat(q, r, std::vector<std::string>{"phi"}));
  mp["mult"] = map("C", "G", cat(q, plus(p, r), std::vector<std::string>{"theta + phi"}));
  mp["ab"] = map("T", "C", cat(q, p, r, std::vector<std::string>{"theta", "phi"}));
  mp["bc"] = map("T", "C", cat(q, r, u, std::vector<std::string>{"phi", "psi"}));
  mp["ab_c"] = map("T", "C", cat(q, plus(p, r), u, std::vector<std::string>{"theta + phi", "psi"}));
  mp["a_bc"] = map("T", "C", cat(q, p, plus(r, u), std::vector<std::string>{"theta", "phi + psi"}));
  m["groupoids"]["G"] = json{{"source", "s"}, {"target", "t"}, {"unit", "eps"}, {"inverse", "inv"},
                             {"first", "first"}, {"second", "second"}, {"multiply", "mult"},
                             {"triple", {{"ab", "ab"}, {"bc", "bc"}, {"ab_c", "ab_c"}, {"a_bc", "a_bc"}}}};
  m["forms"]["omega"] = form("G", 2, symplectic_terms(1, n));
  m["forms"]["eta"] = form("G", 1, json{{"dtheta", "1"}});
  m["structures"]["G"] = json{{"omega", "omega"}, {"eta", "eta"}};
}

/// (q, p_1..p_d[, theta]) => q with fibrewise addition, on charts `arrows`,
/// arrows+"C" (pairs, second factor r[, phi]) and arrows+"T" (triples, third
/// factor u[, psi]); maps are prefixed by the groupoid name.
inline void additive_groupoid(json& m, const std::string& name, const std::string& arrows, const std::string& units,
                              const std::vector<std::string>& q, int d, bool circle) {
  const auto p = seq("p", 1, d), r = seq("r", 1, d), u = seq("u", 1, d);
  auto angle = [&](std::vector<std::string> a) { return circle ? a : std::vector<std::string>{}; };
  const std::string c = arrows + "C", t = arrows + "T";
  m["charts"][arrows] = chart(cat(q, p, angle({"theta"})), angle({"theta"}));
  m["charts"][c] = chart(cat(q, p, r, angle({"theta", "phi"})), angle({"theta", "phi"}));
  m["charts"][t] = chart(cat(q, p, r, u, angle({"theta", "phi", "psi"})), angle({"theta", "phi", "psi"}));
  auto& mp = m["maps"];
  const std::string x = name + "_";
  mp[x + "s"] = map(arrows, units, q);
  mp[x + "t"] = map(arrows, units, q);
  mp[x + "eps"] = map(units, arrows, cat(q, zeros(d), angle({"0"})));
  mp[x + "inv"] = map(arrows, arrows, cat(q, neg(p), angle({"-theta"})));
  mp[x + "first"] = map(c, arrows, cat(q, p, angle({"theta"})));
  mp[x + "second"] = map(c, arrows, cat(q, r, angle({"phi"})));
  mp[x + "mult"] = map(c, arrows, cat(q, plus(p, r), angle({"theta + phi"})));
  mp[x + "ab"] = map(t, c, cat(q, p, r, angle({"theta", "phi"})));
  mp[x + "bc"] = map(t, c, cat(q, r, u, angle({"phi", "psi"})));
  mp[x + "ab_c"] = map(t, c, cat(q, plus(p, r), u, angle({"theta + phi", "psi"})));
  mp[x + "a_bc"] = map(t, c, cat(q, p, plus(r, u), angle({"theta", "phi + psi"})));
  m["groupoids"][name] = json{{"source", x + "s"}, {"target", x + "t"}, {"unit", x + "eps"}, {"inverse", x + "inv"},
                              {"first", x + "first"}, {"second", x + "second"}, {"multiply", x + "mult"},
                              {"triple", {{"ab", x + "ab"}, {"bc", x + "bc"}, {"ab_c", x + "ab_c"}, {"a_bc", x + "a_bc"}}}};
}

inline json cotangent_s1(int n, int k, const std::string& name) {
  require_dimensions(n, k);
  json m{{"schema_version", 1}, {"name", name}};
  cotangent_groupoid(m, n);
  const auto q = seq("q", 1, n), p = seq("p", 1, n), qk = seq("q", 1, k), pk = seq("p", 1, k), rk = seq("r", 1, k);
  const auto r = seq("r", 1, n);
  const std::vector<std::string> th{"theta"}, thph{"theta", "phi"};
  auto& mp = m["maps"];

  m["charts"]["Mred"] = chart(qk);
  m["charts"]["Z0"] = chart(cat(q, pk));
  m["charts"]["R0"] = chart(cat(qk, pk));

  m["actions"]["A"] = translations("G", cat(q, p, th), k, n);
  m["actions"]["AM"] = translations("M", q, k, n);
  m["actions"]["AZ"] = translations("Z", cat(q, pk, th), k, n);
  m["actions"]["AS"] = translations("S", cat(q, p), k, n);
  m["actions"]["AZ0"] = translations("Z0", cat(q, pk), k, n);
  m["moment_maps"]["J"] = json{{"chart", "G"}, {"components", seq("p", k + 1, n)}, {"sign", 1}};

  // Level set J = 0 and its quotient.
  mp["iota"] = map("Z", "G", cat(q, pk, zeros(n - k), th));
  mp["P"] = map("Z", "R", cat(qk, pk, th));
  mp["sigma"] = map("R", "Z", cat(qk, zeros(n - k), pk, th));
  mp["idM"] = map("M", "M", q);
  mp["pM"] = map("M", "Mred", qk);

  // Level groupoid Z => M and reduced groupoid R => M/G.
  additive_groupoid(m, "Z", "Z", "M", q, k, true);
  additive_groupoid(m, "Gred", "R", "Mred", qk, k, true);
  mp["iota_pairs"] = map("ZC", "C", cat(q, pk, zeros(n - k), rk, zeros(n - k), thph));
  mp["P_pairs"] = map("ZC", "RC", cat(qk, pk, rk, thph));
  m["morphisms"]["iotaG"] = json{{"arrows", "iota"}, {"base", "idM"}, {"pairs", "iota_pairs"}};
  m["morphisms"]["PG"] = json{{"arrows", "P"}, {"base", "pM"}, {"pairs", "P_pairs"}};

  // Leaf {theta = 0}, its level set and quotient.
  additive_groupoid(m, "Sigma", "S", "M", q, n, false);
  mp["L"] = map("S", "G", cat(q, p, zeros(1)));
  mp["L_pairs"] = map("SC", "C", cat(q, p, r, zeros(2)));
  m["morphisms"]["L"] = json{{"arrows", "L"}, {"base", "idM"}, {"pairs", "L_pairs"}};
  mp["iota0"] = map("Z0", "S", cat(q, pk, zeros(n - k)));
  mp["P0"] = map("Z0", "R0", cat(qk, pk));
  mp["sigma0"] = map("R0", "Z0", cat(qk, zeros(n - k), pk));
  mp["Lred"] = map("R0", "R", cat(qk, pk, zeros(1)));

  m["poisson"]["piM"] = json{{"chart", "M"}};
  m["poisson"]["piMred"] = json{{"chart", "Mred"}};
  m["im_forms"]["imM"] = json{{"base", "M"}};
  m["im_forms"]["imMred"] = json{{"base", "Mred"}};
  // The first pairs depend on the kept coordinates only, so they are invariant sections.
  m["sections"]["secM"] = json{{"chart", "M"},
                               {"pairs", json::array({json::array({"q1^2", "q1"}), json::array({"sin(q1)", "1 + q1^3"}),
                                                     json::array({"q1*cos(q1)", "exp(q1)"})})},
                               {"random", {{"count", 20}, {"degree", 3}, {"seed", 5}}}};
  m["sections"]["secMred"] = json{{"chart", "Mred"}, {"random", {{"count", 20}, {"degree", 3}, {"seed", 11}}}};
  m["functions"]["polys"] = json{{"chart", "G"}, {"random", {{"count", 8}, {"degree", 2}, {"seed", 3}}}};
  m["fields"]["xi"] = json{{"chart", "G"}, {"components", cat(zeros(2 * n), std::vector<std::string>{"1"})}};
  m["forms"]["omega_red_expected"] = form("R", 2, symplectic_terms(1, k));
  m["forms"]["eta_red_expected"] = form("R", 1, json{{"dtheta", "1"}});

  m["reductions"]["red"] = json{
      {"structure", "G"}, {"action", "A"}, {"moment_map", "J"}, {"inclusion", "iota"}, {"projection", "P"},
      {"section", "sigma"}, {"level_action", "AZ"},
      {"groupoid", {{"ambient", "G"}, {"level", "Z"}, {"reduced", "Gred"}, {"inclusion", "iotaG"}, {"projection", "PG"},
                    {"base_action", "AM"}, {"base_poisson", "piM"}, {"reduced_poisson", "piMred"}, {"im", "imM"},
                    {"im_reduced", "imMred"}, {"reduced_sections", "secMred"}}},
      {"leaf", {{"groupoid", "Sigma"}, {"inclusion", "L"}, {"action", "AS"}, {"level_inclusion", "iota0"},
                {"level_projection", "P0"}, {"level_section", "sigma0"}, {"level_action", "AZ0"}, {"reduced_inclusion", "Lred"}}}};

  m["checks"] = json::array({
      check("cosymplectic", {{"structure", "G"}, {"unit_dimension", n}}),
      check("reeb", {{"structure", "G"}, {"expect_field", "xi"}}),
      check("flat_roundtrip", {{"structure", "G"}}),
      check("hamiltonian", {{"structure", "G"}, {"functions", "polys"}}),
      check("poisson", {{"structure", "G"}, {"functions", "polys"}}),
      check("leaf_distribution", {{"structure", "G"}}),
      check("groupoid", {{"groupoid", "G"}}),
      check("cosymplectic_groupoid", {{"groupoid", "G"}, {"structure", "G"}}),
      check("multiplicative", {{"groupoid", "G"}, {"form", "omega"}}, "multiplicative omega"),
      check("multiplicative", {{"groupoid", "G"}, {"form", "eta"}}, "multiplicative eta"),
      check("additive", {{"groupoid", "G"}, {"moment_map", "J"}}),
      check("action", {{"structure", "G"}, {"action", "A"}}),
      check("moment_map", {{"structure", "G"}, {"action", "A"}, {"moment_map", "J"}, {"groupoid", "G"}}),
      check("regular_value", {{"reduction", "red"}}),
      check("reduced_forms", {{"reduction", "red"}, {"expect_omega", "omega_red_expected"}, {"expect_eta", "eta_red_expected"}}),
      check("groupoid_reduction", {{"reduction", "red"}}),
      check("im_forms", {{"poisson", "piM"}, {"im", "imM"}, {"sections", "secM"}}),
      check("induced_im_forms", {{"groupoid", "G"}, {"structure", "G"}, {"poisson", "piM"}, {"sections", "secM"}}),
      check("infinitesimal_moment", {{"poisson", "piM"}, {"action", "AM"}, {"im", "imM"}, {"sections", "secM"}}),
      check("reduced_im_forms", {{"reduction", "red"}}),
      check("reduction_square", {{"reduction", "red"}}),
      check("leaf_subgroupoid", {{"groupoid", "G"}, {"structure", "G"}, {"leaf_groupoid", "Sigma"}, {"leaf_inclusion", "L"}}),
      check("leaf_reduction", {{"reduction", "red"}}),
  });
  return m;
}

inline json poisson_quotient(int n, int k) {
  require_dimensions(n, k);
  json m{{"schema_version", 1}, {"name", "poisson_quotient_counterexample"}};
  cotangent_groupoid(m, n);
  const auto q = seq("q", 1, n), p = seq("p", 1, n), qk = seq("q", 1, k);
  m["charts"]["GQ"] = chart(cat(qk, p, std::vector<std::string>{"theta"}), {"theta"});
  m["charts"]["MQ"] = chart(qk);
  m["maps"]["quot"] = map("G", "GQ", cat(qk, p, std::vector<std::string>{"theta"}));
  m["maps"]["quotM"] = map("M", "MQ", qk);
  m["actions"]["A"] = translations("G", cat(q, p, std::vector<std::string>{"theta"}), k, n);
  m["actions"]["AM"] = translations("M", q, k, n);
  m["quotients"]["full"] = json{{"groupoid", "G"}, {"action", "A"}, {"base_action", "AM"}, {"projection", "quot"},
                                {"base_projection", "quotM"}};
  m["checks"] = json::array({
      check("cosymplectic_groupoid", {{"groupoid", "G"}, {"structure", "G"}}),
      check("action", {{"structure", "G"}, {"action", "A"}}),
      check("poisson_quotient", {{"quotient", "full"}}, "quotient is cosymplectic", false),
  });
  return m;
}

inline json hypersurface(bool tangent) {
  json m{{"schema_version", 1}, {"name", "hypersurface"}};
  m["charts"]["W"] = chart({"q", "r", "p", "pr"});
  m["charts"]["N"] = chart({"q", "p", "s"});
  m["charts"]["Q"] = chart({"q"});
  m["charts"]["NC"] = chart({"q", "p", "s", "p2", "s2"});
  m["forms"]["omega_W"] = form("W", 2, json{{"dq^dp", "1"}, {"dr^dpr", "1"}});
  m["maps"]["i"] = map("N", "W", {"q", "0", "p", "s"});
  m["fields"]["X"] = json{{"chart", "W"}, {"components", tangent ? std::vector<std::string>{"1", "0", "0", "0"}
                                                                 : std::vector<std::string>{"0", "1", "0", "0"}}};
  m["forms"]["ds"] = form("N", 1, json{{"ds", "1"}});
  m["fields"]["d_s"] = json{{"chart", "N"}, {"components", {"0", "0", "1"}}};
  // The hypersurface is itself the groupoid T*R x R => R.
  m["forms"]["omega_N"] = form("N", 2, json{{"dq^dp", "1"}});
  m["structures"]["N"] = json{{"omega", "omega_N"}, {"eta", "ds"}};
  auto& mp = m["maps"];
  mp["s"] = map("N", "Q", {"q"});
  mp["t"] = map("N", "Q", {"q"});
  mp["eps"] = map("Q", "N", {"q", "0", "0"});
  mp["inv"] = map("N", "N", {"q", "-p", "-s"});
  mp["first"] = map("NC", "N", {"q", "p", "s"});
  mp["second"] = map("NC", "N", {"q", "p2", "s2"});
  mp["mult"] = map("NC", "N", {"q", "p + p2", "s + s2"});
  m["groupoids"]["N"] = json{{"source", "s"}, {"target", "t"}, {"unit", "eps"}, {"inverse", "inv"},
                             {"first", "first"}, {"second", "second"}, {"multiply", "mult"}};
  m["checks"] = json::array({
      check("hypersurface", {{"omega", "omega_W"}, {"inclusion", "i"}, {"field", "X"}, {"expect_eta", "ds"}, {"expect_reeb", "d_s"}}),
      check("cosymplectic_groupoid", {{"groupoid", "N"}, {"structure", "N"}}),
  });
  return m;
}

inline json symplectization() {
  json m{{"schema_version", 1}, {"name", "symplectization"}};
  m["charts"]["Q"] = chart({"q1", "q2", "p1", "p2", "theta"}, {"theta"});
  m["forms"]["omega"] = form("Q", 2, symplectic_terms(1, 2));
  m["forms"]["eta"] = form("Q", 1, json{{"dtheta", "1"}});
  m["structures"]["Q"] = json{{"omega", "omega"}, {"eta", "eta"}};
  m["actions"]["A"] = translations("Q", {"q1", "q2", "p1", "p2", "theta"}, 1, 2);
  m["moment_maps"]["J"] = json{{"chart", "Q"}, {"components", {"p2"}}, {"sign", 1}};
  m["checks"] = json::array({
      check("cosymplectic", {{"structure", "Q"}}),
      check("moment_map", {{"structure", "Q"}, {"action", "A"}, {"moment_map", "J"}}),
      check("symplectization", {{"structure", "Q"}, {"action", "A"}, {"moment_map", "J"}}),
  });
  return m;
}

inline json leaf_reduction() {
  json m = cotangent_s1(2, 1, "leaf_reduction");
  m["checks"] = json::array({
      check("leaf_subgroupoid", {{"groupoid", "G"}, {"structure", "G"}, {"leaf_groupoid", "Sigma"}, {"leaf_inclusion", "L"}}),
      check("leaf_reduction", {{"reduction", "red"}}),
  });
  return m;
}

inline json im_forms() {
  json m{{"schema_version", 1}, {"name", "im_forms"}};
  m["charts"]["B"] = chart({"q", "p"});
  m["poisson"]["pi"] = json{{"chart", "B"}, {"bivector", {{"q^p", "1"}}}};
  m["im_forms"]["standard"] = json{{"base", "B"}};
  m["im_forms"]["corrupted"] = json{{"base", "B"}, {"mu", {{"2", "0", "0"}, {"0", "1", "0"}}}};
  m["sections"]["sec"] = json{{"chart", "B"}, {"random", {{"count", 20}, {"degree", 3}, {"seed", 7}}}};
  m["checks"] = json::array({
      check("im_forms", {{"poisson", "pi"}, {"im", "standard"}, {"sections", "sec"}}, "standard pair"),
      check("im_forms", {{"poisson", "pi"}, {"im", "corrupted"}, {"sections", "sec"}}, "corrupted pair", false),
  });
  return m;
}

inline json averaging() {
  json m{{"schema_version", 1}, {"name", "averaging"}};
  m["charts"]["Q"] = chart({"q", "p", "theta"}, {"theta"});
  m["forms"]["omega"] = form("Q", 2, json{{"dq^dp", "1"}});
  // eta = dtheta + d(q sin(theta) / 2)
  m["forms"]["eta"] = form("Q", 1, json{{"dq", "0.5*sin(theta)"}, {"dtheta", "1 + 0.5*q*cos(theta)"}});
  m["forms"]["dtheta"] = form("Q", 1, json{{"dtheta", "1"}});
  m["structures"]["Q"] = json{{"omega", "omega"}, {"eta", "eta"}};
  m["actions"]["rot"] = json{{"chart", "Q"}, {"rotations", {"phi"}}, {"components", {"q", "p", "theta + phi"}}};
  m["checks"] = json::array({
      check("cosymplectic", {{"structure", "Q"}}),
      check("averaging", {{"form", "eta"}, {"action", "rot"}, {"order", 64}, {"expect_average", "dtheta"}}),
  });
  return m;
}

inline json product_circle_units() {
  json m{{"schema_version", 1}, {"name", "product_circle_units"}};
  m["charts"]["G"] = chart({"q", "p", "theta"}, {"theta"});
  m["charts"]["M"] = chart({"q", "theta"}, {"theta"});
  m["charts"]["C"] = chart({"q", "p", "r", "theta"}, {"theta"});
  m["forms"]["omega"] = form("G", 2, json{{"dq^dp", "1"}});
  m["forms"]["eta"] = form("G", 1, json{{"dtheta", "1"}});
  m["structures"]["G"] = json{{"omega", "omega"}, {"eta", "eta"}};
  auto& mp = m["maps"];
  mp["s"] = map("G", "M", {"q", "theta"});
  mp["t"] = map("G", "M", {"q", "theta"});
  mp["eps"] = map("M", "G", {"q", "0", "theta"});
  mp["inv"] = map("G", "G", {"q", "-p", "theta"});
  mp["first"] = map("C", "G", {"q", "p", "theta"});
  mp["second"] = map("C", "G", {"q", "r", "theta"});
  mp["mult"] = map("C", "G", {"q", "p + r", "theta"});
  m["groupoids"]["G"] = json{{"source", "s"}, {"target", "t"}, {"unit", "eps"}, {"inverse", "inv"},
                             {"first", "first"}, {"second", "second"}, {"multiply", "mult"}};
  m["checks"] = json::array({
      check("groupoid", {{"groupoid", "G"}}),
      check("multiplicative", {{"groupoid", "G"}, {"form", "omega"}}, "multiplicative omega"),
      // Units S^1 => S^1 only compose (theta, theta): m*dtheta = dtheta, not 2 dtheta.
      check("multiplicative", {{"groupoid", "G"}, {"form", "eta"}}, "multiplicative eta", false),
      check("cosymplectic", {{"structure", "G"}, {"unit_dimension", 2}}, "dimension 2 dim(M) + 1", false),
  });
  return m;
}

inline void apply_mutation(json& m, const std::string& mutation, int n, int k) {
  const std::string qn = "q" + std::to_string(n);
  if (mutation == "sign_flipped_multiplication") {
    auto& c = m["maps"]["mult"]["components"];
    for (int i = 1; i <= n; ++i) c[static_cast<std::size_t>(n + i - 1)] = "p" + std::to_string(i) + " - r" + std::to_string(i);
  } else if (mutation == "degenerate_omega") {
    m["forms"]["omega"]["terms"] = json::object();
  } else if (mutation == "non_invariant_form") {
    m["forms"]["eta"]["terms"]["d" + qn] = "2*" + qn;
  } else if (mutation == "broken_moment_map") {
    auto& c = m["moment_maps"]["J"]["components"];
    for (int j = k + 1; j <= n; ++j) c[static_cast<std::size_t>(j - k - 1)] = "2*p" + std::to_string(j);
  } else if (mutation == "non_basic_form") {
    m["forms"]["omega"]["terms"]["d" + qn + "^dp1"] = "2*" + qn;
  } else if (mutation == "tangent_field") {
    m["fields"]["X"]["components"] = {"1", "0", "0", "0"};
  }
}

}  // namespace gallery_detail

/// Manifest JSON of a built-in, optionally corrupted by a named mutation.
inline nlohmann::json gallery_manifest(const std::string& name, int n = 2, int k = 1, const std::string& mutation = {}) {
  namespace g = gallery_detail;
  nlohmann::json m;
  if (name == "cotangent_s1") m = g::cotangent_s1(n, k, name);
  else if (name == "poisson_quotient_counterexample") m = g::poisson_quotient(n, k);
  else if (name == "hypersurface") m = g::hypersurface(false);
  else if (name == "symplectization") m = g::symplectization();
  else if (name == "leaf_reduction") m = g::leaf_reduction();
  else if (name == "im_forms") m = g::im_forms();
  else if (name == "averaging") m = g::averaging();
  else if (name == "product_circle_units") m = g::product_circle_units();
  else throw ManifestError("unknown built-in \"" + name + "\"");
  if (!mutation.empty()) {
    const auto all = mutations();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Mutation& x) { return x.name == mutation; });
    if (it == all.end()) throw ManifestError("unknown mutation \"" + mutation + "\"");
    if (it->entry != name) throw ManifestError("mutation \"" + mutation + "\" applies to " + it->entry + ", not " + name);
    g::apply_mutation(m, mutation, n, k);
    m["name"] = name + "+" + mutation;
  }
  return m;
}

}  // namespace cosym
