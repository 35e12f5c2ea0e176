// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cosym/cosym.hpp"

using namespace cosym;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

const CheckEntry& entry(const CheckReport& r, std::string_view name) {
  if (const CheckEntry* e = r.find(name)) return *e;
  throw Error("missing report entry \"" + std::string(name) + "\" in " + r.subject);
}

// Requires every entry of `r` to pass, then returns the named entry's max.
double require_max(Verdict& v, const CheckReport& r, std::string_view name, double bound) {
  v.require(r.passed(), r.subject + " failed" + (r.failing().empty() ? "" : " at " + r.failing().front()));
  const double m = entry(r, name).max;
  v.require(m < bound, std::string(name) + " = " + sci(m) + " >= " + sci(bound));
  return m;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string("\"") + COSYM_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Manifest builtin(const std::string& name, int n = 2, int k = 1) { return load_manifest(gallery_manifest(name, n, k)); }

// ---------------------------------------------------------------------------

Verdict reduction_example() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const Sampling s{256, 42};
  const Tolerances tol;
  const Manifest m = builtin("cotangent_s1");
  const ReductionPresentation& red = m.reductions.at("red");
  const CheckReport ambient = verify_cosymplectic_groupoid(m.groupoids.at("G"), m.structures.at("G"), s, tol);
  v.require(ambient.passed(), "ambient groupoid failed");
  const CheckReport pipeline = verify_groupoid_reduction(red, s, tol);
  v.require(pipeline.passed(), "reduction pipeline failed" + (pipeline.failing().empty() ? "" : " at " + pipeline.failing().front()));

  const ReducedForms forms = solve_reduced_forms(red, s, tol);
  const DifferentialForm& w = m.forms.at("omega_red_expected");
  const DifferentialForm& e = m.forms.at("eta_red_expected");
  double worst = 0.0;
  for (const auto& r : sample_points(red.level.quotient(), 256, s.seed)) {
    worst = std::max(worst, (forms.omega.at(r) - w.at(r)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (forms.eta.at(r) - e.at(r)).cwiseAbs().maxCoeff());
  }
  v.require(worst < 1e-12, "reduced forms off by " + sci(worst));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (v.ok) v.detail = "reduced forms within " + sci(worst) + " of dq1^dp1 and dtheta";
  return v;
}

Verdict reeb_field() {
  Verdict v;
  const Manifest m = builtin("cotangent_s1");
  const CosymplecticStructure& s = m.structures.at("G");
  Eigen::VectorXd dtheta = Eigen::VectorXd::Zero(5);
  dtheta(4) = 1.0;
  double worst = 0.0;
  for (const auto& x : sample_points(s.chart(), 256, 42)) worst = std::max(worst, (s.reeb(x) - dtheta).cwiseAbs().maxCoeff());
  v.require(worst < 1e-12, "xi - d/dtheta = " + sci(worst));
  if (v.ok) v.detail = "max component residual " + sci(worst);
  return v;
}

Verdict counterexample() {
  Verdict v;
  const int n = 2, k = 1;
  const Manifest m = builtin("poisson_quotient_counterexample", n, k);
  const PoissonQuotient& pq = m.quotients.at("full");
  const int dq = pq.projection.target()->dimension();
  const int dmq = pq.base_projection.target()->dimension();
  v.require(dq == n + k + 1, "dim(G/G) = " + std::to_string(dq));
  v.require(2 * dmq + 1 == 2 * k + 1, "dim(M/G) = " + std::to_string(dmq));
  const CheckReport r = verify_poisson_quotient(pq, Sampling{128, 42}, Tolerances{});
  v.require(!entry(r, "dim(G/G) = 2 dim(M/G) + 1").passed, "dimension test passed");
  v.require(r.failing().size() == 1, "unexpected failing entries");
  std::string out;
  const int code = run_cli("examples run poisson_quotient_counterexample --n 2 --k 1", &out);
  v.require(code == 0, "CLI exit " + std::to_string(code));
  v.require(out.find("FAIL quotient is cosymplectic") != std::string::npos, "CLI did not report the failed verdict");
  if (v.ok) v.detail = "dim(G/G) = " + std::to_string(dq) + " != " + std::to_string(2 * dmq + 1) + ", not cosymplectic, exit 0";
  return v;
}

Verdict invariant_suites() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const Sampling s{128, 42};
  const Tolerances tol;
  const Manifest m = builtin("cotangent_s1");
  const CosymplecticStructure& st = m.structures.at("G");
  const GroupoidPresentation& g = m.groupoids.at("G");
  const auto& fns = m.functions.at("polys").exprs;
  const auto c = st.chart();

  // d∘d on exact 1-forms and on f dg.
  double dd = 0.0;
  const auto pts = sample_points(c, 128, 42);
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const DifferentialForm a = DifferentialForm::exact(c, fns[i]);
    const DifferentialForm b = fns[(i + 1) % fns.size()] * a;
    const DifferentialForm dda = exterior_derivative(exterior_derivative(a));
    const DifferentialForm ddb = exterior_derivative(exterior_derivative(b));
    for (const auto& x : pts) dd = std::max({dd, dda.at(x).cwiseAbs().maxCoeff(), ddb.at(x).cwiseAbs().maxCoeff()});
  }
  v.require(dd < 1e-12, "d(d a) = " + sci(dd));

  const double flat = require_max(v, verify_flat_roundtrip(st, s, tol), "flat round trip", 1e-10);
  const CheckReport ham = verify_hamiltonian(st, fns, s, tol);
  require_max(v, ham, "i_Xf omega = df - xi(f) eta", 1e-10);
  require_max(v, ham, "i_Xf eta = 0", 1e-10);
  const double jac = require_max(v, verify_poisson(st, fns, s, tol), "jacobi", 1e-8);

  double im = 0.0;
  const PoissonBase& pi = m.poisson.at("piM");
  const IMFormPair& pair = m.im_forms.at("imM");
  const auto& sec = m.sections.at("secM").sections;
  im = std::max(im, require_max(v, verify_im_2form(pi, pair, sec, s, tol), "IM-bracket", 1e-9));
  im = std::max(im, require_max(v, verify_im_1form(pi, pair, sec, s, tol), "IM-nu", 1e-9));
  const CheckReport induced = verify_induced_im_forms(g, st, pi, sec, s, tol);
  im = std::max(im, require_max(v, induced, "transported/IM-bracket", 1e-9));
  im = std::max(im, require_max(v, induced, "transported/IM-nu", 1e-9));
  const Manifest plane = builtin("im_forms");
  const auto& psec = plane.sections.at("sec").sections;
  const PoissonBase& ppi = plane.poisson.at("pi");
  im = std::max(im, require_max(v, verify_im_2form(ppi, plane.im_forms.at("standard"), psec, s, tol), "IM-bracket", 1e-9));
  im = std::max(im, require_max(v, verify_im_1form(ppi, plane.im_forms.at("standard"), psec, s, tol), "IM-nu", 1e-9));

  double mult = require_max(v, verify_multiplicative(g, st.omega(), s, tol, "omega"), "omega multiplicative", 1e-9);
  mult = std::max(mult, require_max(v, verify_multiplicative(g, st.eta(), s, tol, "eta"), "eta multiplicative", 1e-9));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < 60.0, "took " + std::to_string(secs) + " s");
  if (v.ok)
    v.detail = "dd " + sci(dd) + ", flat " + sci(flat) + ", jacobi " + sci(jac) + ", IM " + sci(im) + ", mult " + sci(mult);
  return v;
}

Verdict reduction_square() {
  Verdict v;
  const Manifest m = builtin("cotangent_s1");
  const CheckReport r = verify_reduction_square(m.reductions.at("red"), Sampling{128, 42}, Tolerances{});
  const double mu = require_max(v, r, "induced mu_red = reduced mu", 1e-9);
  const double nu = require_max(v, r, "induced nu_red = reduced nu", 1e-9);
  if (v.ok) v.detail = "mu " + sci(mu) + ", nu " + sci(nu);
  return v;
}

Verdict leaf_identity() {
  Verdict v;
  const Manifest m = builtin("leaf_reduction");
  const CheckReport r = verify_leaf_reduction(m.reductions.at("red"), Sampling{128, 42}, Tolerances{});
  const double w = require_max(v, r, "leaf_identity/L_red* omega_red = (L* omega)_red", 1e-9);
  if (v.ok) v.detail = "coefficientwise residual " + sci(w);
  return v;
}

Verdict symplectization_lift() {
  Verdict v;
  const Manifest m = builtin("symplectization");
  const CheckReport r = verify_symplectization_correspondence(m.structures.at("Q"), m.actions.at("A"), m.moment_maps.at("J"),
                                                              Sampling{128, 42}, Tolerances{});
  const double lift = require_max(v, r, "i_v omega_tilde = sign * d<J_tilde,v>", 1e-10);
  if (v.ok) v.detail = "lift residual " + sci(lift);
  return v;
}

Verdict averaging() {
  Verdict v;
  const Manifest m = builtin("averaging");
  const FormField eta = m.structures.at("Q").eta();
  const CheckReport r = verify_averaging(eta, m.actions.at("rot"), Sampling{128, 42}, Tolerances{}, 64);
  const double inv = require_max(v, r, "averaged form invariant", 1e-8);
  const double conv = require_max(v, r, "quadrature order 64 vs 128", 1e-12);
  if (v.ok) v.detail = "invariance " + sci(inv) + ", order 64 vs 128 " + sci(conv);
  return v;
}

// Random bounded expressions in (q, p, theta): every subexpression stays in
// [-1, 1] on the sampling box so central differences stay well conditioned.
Expr random_expr(const ChartPtr& c, int depth, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lit(-1.0, 1.0);
  if (depth <= 1) {
    switch (rng() % 4) {
      case 0: return coordinate(c, 0);
      case 1: return coordinate(c, 1);
      case 2: return Expr(std::round(lit(rng) * 100.0) / 100.0) * sin(coordinate(c, 2));
      default: return cos(coordinate(c, 2));
    }
  }
  switch (rng() % 7) {
    case 0: return Expr(0.5) * (random_expr(c, depth - 1, rng) + random_expr(c, depth - 1, rng));
    case 1: return Expr(0.5) * (random_expr(c, depth - 1, rng) - random_expr(c, depth - 1, rng));
    case 2: return random_expr(c, depth - 1, rng) * random_expr(c, depth - 1, rng);
    case 3: return pow(random_expr(c, depth - 1, rng), 2 + static_cast<int>(rng() % 2));
    case 4: return sin(random_expr(c, depth - 1, rng));
    case 5: return cos(random_expr(c, depth - 1, rng));
    default: return Expr(0.3) * exp(sin(random_expr(c, depth - 1, rng)));
  }
}

Verdict differentiation_oracle() {
  Verdict v;
  const auto c = make_chart("Q", {"q", "p", "theta"}, {false, false, true});
  std::mt19937_64 rng(7);
  const auto pts = sample_points(c, 50, 42);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Expr e = random_expr(c, 5, rng);
    for (int i = 0; i < 3; ++i) {
      const Expr d = differentiate(e, i);
      for (const auto& p : pts) {
        std::vector<double> up(p.values().begin(), p.values().end()), down = up;
        up[static_cast<std::size_t>(i)] += h;
        down[static_cast<std::size_t>(i)] -= h;
        const double fd = (eval(e, up) - eval(e, down)) / (2 * h);
        const double exact = eval(d, p.values());
        worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
      }
    }
  }
  v.require(worst < 1e-6, "relative error " + sci(worst));
  if (v.ok) v.detail = "100 expressions, max relative error " + sci(worst);
  return v;
}

Verdict mutations_caught() {
  Verdict v;
  const auto report = std::filesystem::temp_directory_path() / ("cosym_acceptance_" + std::to_string(::getpid()) + ".json");
  int caught = 0;
  const auto all = mutations();
  for (const auto& mu : all) {
    const int code = run_cli("examples run " + mu.entry + " --mutate " + mu.name + " --quiet --report \"" + report.string() + "\"");
    std::ifstream in(report);
    std::stringstream text;
    text << in.rdbuf();
    bool named = false;
    try {
      const RunReport r = nlohmann::json::parse(text.str()).get<RunReport>();
      for (const auto& c : r.checks)
        for (const auto& f : c.report.failing())
          if ((c.name + "/" + f).find(mu.stage) != std::string::npos) named = true;
    } catch (const std::exception&) {
    }
    v.require(code == 1, mu.name + " exit " + std::to_string(code));
    v.require(named, mu.name + " did not fail at " + mu.stage);
    if (code == 1 && named) ++caught;
    std::filesystem::remove(report);
  }
  v.require(all.size() == 6, "expected six mutations");
  if (v.ok) v.detail = std::to_string(caught) + "/" + std::to_string(all.size()) + " caught at their named stage, exit 1";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"cotangent_s1 groupoid reduction, 256 samples", reduction_example},
      {"Reeb field is d/dtheta", reeb_field},
      {"full quotient is not cosymplectic", counterexample},
      {"invariant suites at 128 samples", invariant_suites},
      {"induced vs reduced IM forms", reduction_square},
      {"leaf reduction identity", leaf_identity},
      {"symplectization moment map lift", symplectization_lift},
      {"averaging over the circle", averaging},
      {"symbolic vs central-difference derivatives", differentiation_oracle},
      {"mutations caught", mutations_caught},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu  %-44s %7.2f s  %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs, v.detail.c_str());
    if (!v.ok) ++failed;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
