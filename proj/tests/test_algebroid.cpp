#include <catch_amalgamated.hpp>

#include <cmath>

#include "cosym/cosym.hpp"

using namespace cosym;
using Catch::Matchers::WithinAbs;

namespace {

Sampling sampling(std::size_t n = 64, std::uint64_t seed = 42) { return Sampling{n, seed}; }

const CheckEntry& entry(const CheckReport& r, std::string_view name) {
  const CheckEntry* e = r.find(name);
  if (!e) FAIL("missing entry " << name);
  return *e;
}

ChartPtr plane() { return make_chart("R2", {"q", "p"}); }

PoissonBase symplectic_plane() { return PoissonBase::symplectic(plane(), {{0, 1}}); }

// The linear structure on so(3)*: {x, y} = z and cyclic.
PoissonBase rigid_body() {
  auto c = make_chart("so3", {"x", "y", "z"});
  PoissonBase b(c);
  b.set(0, 1, coordinate(c, 2));
  b.set(1, 2, coordinate(c, 0));
  b.set(2, 0, coordinate(c, 1));
  return b;
}

ExactSection section(const ChartPtr& c, const std::string& f, const std::string& g) {
  return ExactSection{parse_expr(f, c), parse_expr(g, c)};
}

double at(const Expr& e, const Point& p) { return eval(e, p.values()); }

}  // namespace

TEST_CASE("anchor contracts the bivector", "[anchor]") {
  auto base = symplectic_plane();
  auto c = base.chart();
  VectorField xq = anchor(base, section(c, "q", "0"));
  VectorField xc = anchor(base, section(c, "3", "q"));
  VectorField xf = anchor(base, section(c, "q^2*p", "0"));
  for (const auto& p : sample_points(c, 32, 1)) {
    CHECK((xq.at(p) - Eigen::Vector2d(0, 1)).norm() == 0.0);
    CHECK(xc.at(p).norm() == 0.0);
    // X_f^i = Σ_j π^{ji} ∂_j f with π^{01} = 1: (−∂_p f, ∂_q f).
    CHECK((xf.at(p) - Eigen::Vector2d(-p[0] * p[0], 2 * p[0] * p[1])).norm() < 1e-15);
  }
  CHECK(base.entry(1, 0).is_constant(-1.0));
  CHECK_THROWS(base.set(0, 0, Expr(1.0)));
}

TEST_CASE("central extension bracket on examples", "[bracket]") {
  auto base = symplectic_plane();
  auto c = base.chart();
  IMFormPair std_pair = IMFormPair::standard(c);

  ExactSection qp = bracket(base, section(c, "q", "0"), section(c, "p", "0"));
  ExactSection aa = bracket(base, section(c, "q*p + sin(q)", "p^2"), section(c, "q*p + sin(q)", "p^2"));
  ExactSection mixed = bracket(base, section(c, "q", "1"), section(c, "p", "0"));
  for (const auto& p : sample_points(c, 16, 2)) {
    CHECK(at(qp.f, p) == 1.0);
    CHECK(std_pair.mu_of(qp).at(p).norm() == 0.0);
    CHECK(at(qp.g, p) == 0.0);
    CHECK(std::abs(at(aa.f, p)) < 1e-15);
    CHECK(std::abs(at(aa.g, p)) < 1e-15);
    CHECK(at(mixed.f, p) == 1.0);
    CHECK(at(mixed.g, p) == 0.0);
  }
}

TEST_CASE("central extension axioms on Poisson bases", "[bracket][property]") {
  for (const PoissonBase& base : {symplectic_plane(), rigid_body()}) {
    const auto corpus = section_corpus(base.chart(), 12, 2, 3);
    CheckReport r = verify_central_extension(base, corpus, sampling(), Tolerances{});
    INFO(base.chart()->name());
    CHECK(r.passed());
    CHECK(entry(r, "bracket jacobi").max < 1e-8);
    CHECK(entry(r, "anchor preserves brackets").max < 1e-9);
    CHECK(entry(r, "anchor leibniz").max < 1e-10);
    std::vector<Expr> fs;
    for (const auto& s : corpus) fs.push_back(s.f);
    CHECK(verify_poisson_base(base, fs, sampling(), Tolerances{}).passed());
  }

  // An independent anchor-bracket check against symbolic commutators.
  auto base = rigid_body();
  const auto corpus = section_corpus(base.chart(), 6, 3, 4);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      VectorField lhs = anchor(base, bracket(base, corpus[i], corpus[j]));
      VectorField rhs = lie_bracket(anchor(base, corpus[i]), anchor(base, corpus[j]));
      for (const auto& p : sample_points(base.chart(), 16, 5)) CHECK((lhs.at(p) - rhs.at(p)).norm() < 1e-9);
    }

  // π = ∂x∧∂y + y ∂y∧∂z fails Jacobi: as a vector field v = (y, 0, 1),
  // v · curl v = −1.
  auto c = make_chart("R3", {"x", "y", "z"});
  PoissonBase broken(c);
  broken.set(0, 1, Expr(1.0));
  broken.set(1, 2, coordinate(c, 1));
  std::vector<Expr> coords{coordinate(c, 0), coordinate(c, 1), coordinate(c, 2)};
  CHECK_FALSE(verify_poisson_base(broken, coords, sampling(), Tolerances{}).passed());
}

TEST_CASE("the projections of T*M + R are IM forms", "[im]") {
  for (const PoissonBase& base : {symplectic_plane(), rigid_body()}) {
    const auto corpus = section_corpus(base.chart(), 20, 3, 6);
    IMFormPair pr = IMFormPair::standard(base.chart());
    CheckReport two = verify_im_2form(base, pr, corpus, sampling(), Tolerances{});
    CheckReport one = verify_im_1form(base, pr, corpus, sampling(), Tolerances{});
    INFO(base.chart()->name());
    CHECK(two.passed());
    CHECK(one.passed());
    CHECK(entry(two, "IM-skew").max < 1e-9);
    CHECK(entry(two, "IM-bracket").max < 1e-9);
    CHECK(entry(one, "IM-nu").max < 1e-9);
    CHECK(entry(one, "IM-nu").samples == 24 * 64);

    IMFormPair zero = pr;
    for (auto& e : zero.nu) e = Expr();
    CHECK(verify_im_1form(base, zero, corpus, sampling(), Tolerances{}).passed());
  }
}

TEST_CASE("corrupted IM pairs are caught", "[im]") {
  auto base = symplectic_plane();
  auto c = base.chart();
  const auto corpus = section_corpus(c, 20, 3, 7);

  IMFormPair doubled = IMFormPair::standard(c);
  doubled.mu[0][0] = Expr(2.0);
  CheckReport r = verify_im_2form(base, doubled, corpus, sampling(), Tolerances{});
  CHECK_FALSE(entry(r, "IM-bracket").passed);

  // ν(df, g) = g + q ∂_q f: with a = (q, 0), b = (p, 0) the defect is
  // ν([a,b]) − X_q ν(b) + X_p ν(a) = 0 − 0 + (−∂_q)(q) = −1.
  IMFormPair skewed = IMFormPair::standard(c);
  skewed.nu[0] = coordinate(c, 0);
  const ExactSection a = section(c, "q", "0"), b = section(c, "p", "0");
  const Expr defect = skewed.nu_of(bracket(base, a, b)) - anchor(base, a).apply(skewed.nu_of(b)) +
                      anchor(base, b).apply(skewed.nu_of(a));
  for (const auto& p : sample_points(c, 8, 8)) CHECK(at(defect, p) == -1.0);
  CHECK_FALSE(verify_im_1form(base, skewed, {a, b}, sampling(), Tolerances{}).passed());
  CHECK_FALSE(verify_im_1form(base, skewed, corpus, sampling(), Tolerances{}).passed());

  IMFormPair bad_shape = IMFormPair::standard(c);
  bad_shape.nu.pop_back();
  CHECK_THROWS(verify_im_1form(base, bad_shape, corpus, sampling(), Tolerances{}));
}

TEST_CASE("IM forms induced at the units of the cotangent groupoid", "[induced][builtin]") {
  const Manifest m = load_manifest(gallery_manifest("cotangent_s1", 2, 1));
  const GroupoidPresentation& g = m.groupoids.at("G");
  const CosymplecticStructure& s = m.structures.at("G");
  const InducedIMForms im = induced_im_forms(g, s);
  const int n = 2;
  // ω = Σ dq∧dp on (q1, q2, p1, p2, θ); ε(q) = (q, 0, 0).
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < n; ++i) {
    w(i, n + i) = 1.0;
    w(n + i, i) = -1.0;
  }
  Eigen::MatrixXd deps = Eigen::MatrixXd::Zero(5, 2);
  deps(0, 0) = deps(1, 1) = 1.0;
  for (const auto& x : sample_points(g.units(), 32, 9)) {
    const Eigen::MatrixXd ker = im.kernel(x);
    CHECK(ker.cols() == n + 1);
    CHECK((g.source.jacobian(g.unit(x)) * ker).norm() < 1e-14);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd u = Eigen::VectorXd::Unit(5, k);
      // μ(u)(X) = ω(u, dε X), X over the coordinate frame of M.
      Eigen::RowVectorXd want = u.transpose() * w * deps;
      CHECK(((im.mu(x) * u).transpose() - want).norm() < 1e-14);
    }
    Eigen::VectorXd dtheta = Eigen::VectorXd::Unit(5, 4);
    CHECK((im.nu(x) * dtheta)(0) == 1.0);
    CHECK((im.mu(x) * dtheta).norm() == 0.0);
  }

  const PoissonBase& pi = m.poisson.at("piM");
  const auto& corpus = m.sections.at("secM").sections;
  CheckReport r = verify_induced_im_forms(g, s, pi, corpus, sampling(), Tolerances{});
  CHECK(r.passed());
  CHECK(entry(r, "(mu, nu) is an isomorphism onto T*M+R").min > 0.5);
  CHECK(entry(r, "transported/IM-bracket").passed);
}

TEST_CASE("a source map with the wrong kernel raises a rank error", "[induced]") {
  const Manifest m = load_manifest(gallery_manifest("cotangent_s1", 2, 1));
  GroupoidPresentation g = m.groupoids.at("G");
  std::vector<Expr> flat(2);
  g.source = SmoothMap(g.arrows(), g.units(), flat, "s0");
  const InducedIMForms im = induced_im_forms(g, m.structures.at("G"));
  CHECK_THROWS_AS(im.kernel(Point(g.units(), {0.1, 0.2})), RankError);
  CheckReport r = verify_induced_im_forms(g, m.structures.at("G"), m.poisson.at("piM"), m.sections.at("secM").sections,
                                          sampling(), Tolerances{});
  CHECK_FALSE(r.passed());
}

TEST_CASE("the infinitesimal moment map of the translation action", "[moment][builtin]") {
  const Manifest m = load_manifest(gallery_manifest("cotangent_s1", 2, 1));
  const GroupAction& a = m.actions.at("AM");
  CheckReport r = verify_infinitesimal_moment(m.poisson.at("piM"), a, m.im_forms.at("imM"), m.sections.at("secM").sections,
                                              sampling(), Tolerances{});
  CHECK(r.passed());
  CHECK(r.find("equivariance on invariant sections"));
  CHECK(r.unverified.empty());
}
