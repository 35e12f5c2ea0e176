#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cosym/cosym.hpp"

using namespace cosym;
using Catch::Matchers::WithinAbs;

namespace {

ChartPtr cotangent_chart(int n) {
  std::vector<std::string> coords;
  for (int i = 1; i <= n; ++i) coords.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) coords.push_back("p" + std::to_string(i));
  coords.push_back("theta");
  std::vector<bool> periodic(coords.size(), false);
  periodic.back() = true;
  return make_chart("G", coords, periodic);
}

CosymplecticStructure cotangent(int n) {
  auto c = cotangent_chart(n);
  DifferentialForm w(c, 2);
  for (int i = 0; i < n; ++i) w.add_term({i, n + i}, Expr(1.0));
  return CosymplecticStructure(w, DifferentialForm::differential(c, 2 * n), "TRn x S1");
}

ChartPtr qpt() { return make_chart("Q", {"q", "p", "theta"}, {false, false, true}); }

// ω = (1 + q²) dq∧dp, η = dθ + q dq: closed, not constant, Reeb field ∂θ.
CosymplecticStructure warped() {
  auto c = qpt();
  return CosymplecticStructure(parse_form(c, 2, {{"dq^dp", "1 + q^2"}}), parse_form(c, 1, {{"dtheta", "1"}, {"dq", "q"}}),
                               "warped");
}

Sampling sampling(std::size_t n = 128, std::uint64_t seed = 42) { return Sampling{n, seed}; }

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

const CheckEntry& entry(const CheckReport& r, std::string_view name) {
  const CheckEntry* e = r.find(name);
  if (!e) FAIL("missing entry " << name);
  return *e;
}

}  // namespace

TEST_CASE("cotangent bundle times a circle is cosymplectic", "[verify]") {
  for (int n : {1, 2, 3}) {
    CheckReport r = verify_cosymplectic(cotangent(n), sampling(), Tolerances{}, n);
    INFO(r.subject);
    CHECK(r.passed());
    CHECK(entry(r, "volume form nonvanishing").min == 1.0 * (n == 3 ? 6 : n));
  }
  CHECK(verify_cosymplectic(warped(), sampling(), Tolerances{}).passed());
}

TEST_CASE("degenerate and malformed candidates fail", "[verify]") {
  auto c = qpt();
  CosymplecticStructure flat(DifferentialForm(c, 2), DifferentialForm::differential(c, 2));
  CheckReport r = verify_cosymplectic(flat, sampling(), Tolerances{});
  CHECK_FALSE(r.passed());
  CHECK_FALSE(entry(r, "volume form nonvanishing").passed);
  CHECK_FALSE(entry(r, "flat map invertible").passed);
  CHECK_THROWS_AS(flat.reeb(Point(c, {0.1, 0.2, 0.3})), SingularMatrixError);

  CosymplecticStructure open(parse_form(c, 2, {{"dq^dp", "1 + theta^2"}}), DifferentialForm::differential(c, 2));
  CHECK_FALSE(entry(verify_cosymplectic(open, sampling(), Tolerances{}), "omega closed").passed);

  auto even = make_chart("R2", {"q", "p"});
  CheckReport e = verify_cosymplectic(
      CosymplecticStructure(parse_form(even, 2, {{"dq^dp", "1"}}), DifferentialForm::differential(even, 0)), sampling(),
      Tolerances{});
  CHECK_FALSE(entry(e, "odd dimension").passed);
  CHECK_FALSE(e.passed());

  CHECK_THROWS_AS(CosymplecticStructure(DifferentialForm::differential(c, 0), DifferentialForm::differential(c, 2)),
                  DegreeError);
}

TEST_CASE("product of a groupoid with the circle unit groupoid fails the dimension count", "[verify][builtin]") {
  const RunReport rep = run_manifest(load_manifest(gallery_manifest("product_circle_units")), RunOptions{});
  const CheckResult* dim = rep.find("dimension 2 dim(M) + 1");
  REQUIRE(dim);
  CHECK_FALSE(dim->report.passed());
  CHECK_FALSE(entry(dim->report, "dimension is 2*units+1").passed);
  CHECK(entry(dim->report, "volume form nonvanishing").passed);
  CHECK(rep.exit_code() == 0);
}

TEST_CASE("flat map on the standard chart", "[flat]") {
  auto s = cotangent(1);
  auto c = s.chart();
  Point p(c, {0.3, -0.2, 1.0});
  // ♭(X) = ι_X ω + η(X) η read off by hand for ω = dq∧dp, η = dθ.
  Eigen::Matrix3d want;
  want << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((s.flat_matrix(p) - want).norm() == 0.0);
  CHECK((s.flat_inverse(p, Eigen::Vector3d(0, 1, 0)) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK((s.reeb(p) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);

  auto alpha = FormField(parse_form(c, 1, {{"dp1", "1"}}));
  PointwiseVectorField x = flat_inverse(s, alpha);
  for (const auto& pt : sample_points(c, 16, 1)) CHECK((x(pt) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("flat inverse round trips random covectors", "[flat][property]") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto s = warped();
  for (const auto& p : sample_points(s.chart(), 64, 2)) {
    Eigen::Vector3d a(u(rng), u(rng), u(rng));
    Eigen::VectorXd x = s.flat_inverse(p, a);
    // ι_X ω + η(X) η with ω = f dq∧dp, η = dθ + q dq, written out.
    const double f = 1.0 + p[0] * p[0];
    const double ex = x(2) + p[0] * x(0);
    Eigen::Vector3d back(-f * x(1) + ex * p[0], f * x(0), ex);
    CHECK(max_abs(back - a) < 1e-10);
  }
  CHECK(verify_flat_roundtrip(warped(), sampling(64), Tolerances{}).passed());
  CHECK(verify_flat_roundtrip(cotangent(2), sampling(64), Tolerances{}).passed());
}

TEST_CASE("Reeb fields of the examples", "[reeb]") {
  for (int n : {1, 2}) {
    auto s = cotangent(n);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(2 * n + 1);
    want(2 * n) = 1.0;
    for (const auto& p : sample_points(s.chart(), 128, 5)) CHECK(max_abs(s.reeb(p) - want) < 1e-12);
    CHECK(verify_reeb(s, sampling(), Tolerances{}).passed());
  }
  for (const auto& p : sample_points(qpt(), 64, 6)) CHECK(max_abs(warped().reeb(p) - Eigen::Vector3d(0, 0, 1)) < 1e-12);
  CHECK(verify_reeb(warped(), sampling(), Tolerances{}).passed());

  // M x L with η = dr: the Reeb field is ∂r.
  auto ml = make_chart("ML", {"q", "p", "r"});
  CosymplecticStructure prod(parse_form(ml, 2, {{"dq^dp", "1"}}), parse_form(ml, 1, {{"dr", "1"}}));
  for (const auto& p : sample_points(ml, 32, 7)) CHECK(max_abs(prod.reeb(p) - Eigen::Vector3d(0, 0, 1)) < 1e-12);
}

TEST_CASE("Hamiltonian vector fields", "[hamiltonian]") {
  auto s = cotangent(1);
  auto c = s.chart();
  PointwiseVectorField xq = hamiltonian_vf(s, parse_expr("q1", c));
  PointwiseVectorField xc = hamiltonian_vf(s, Expr(3.5));
  PointwiseVectorField xf = hamiltonian_vf(s, parse_expr("q1^2*p1 + sin(p1)", c));
  for (const auto& p : sample_points(c, 32, 3)) {
    CHECK(max_abs(xq(p) - Eigen::Vector3d(0, -1, 0)) < 1e-12);
    CHECK(max_abs(xc(p)) == 0.0);
    CHECK(std::abs(xf(p)(2)) < 1e-12);
  }

  // On the warped chart, X_q solves (1 + q²)(X^q dp − X^p dq) = dq and η(X) = 0.
  auto w = warped();
  PointwiseVectorField x = hamiltonian_vf(w, parse_expr("q", w.chart()));
  for (const auto& p : sample_points(w.chart(), 32, 4)) {
    Eigen::Vector3d want(0, -1.0 / (1.0 + p[0] * p[0]), 0);
    CHECK(max_abs(x(p) - want) < 1e-12);
  }

  const auto corpus = polynomial_corpus(c, 20, 3, 9);
  CHECK(verify_hamiltonian(s, corpus, sampling(), Tolerances{}).passed());
  std::vector<Expr> with_theta;
  for (const auto& f : polynomial_corpus(qpt(), 20, 3, 10)) with_theta.push_back(f * cos(coordinate(qpt(), 2)));
  CHECK(verify_hamiltonian(warped(), with_theta, sampling(), Tolerances{}).passed());
}

TEST_CASE("Poisson bracket", "[poisson]") {
  auto s = cotangent(1);
  auto c = s.chart();
  const Expr q = parse_expr("q1", c), p = parse_expr("p1", c);
  Eigen::Matrix3d flat;
  flat << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  for (const auto& pt : sample_points(c, 64, 12)) {
    CHECK_THAT(s.poisson(pt, q, p), WithinAbs(1.0, 1e-14));
    CHECK_THAT(s.poisson(pt, p, q), WithinAbs(-1.0, 1e-14));
    // Two independent solves against the hand-written flat matrix.
    Eigen::Vector3d xq = flat.lu().solve(Eigen::Vector3d(1, 0, 0));
    Eigen::Vector3d xp = flat.lu().solve(Eigen::Vector3d(0, 1, 0));
    Eigen::Matrix3d w;
    w << 0, 1, 0, -1, 0, 0, 0, 0, 0;
    CHECK_THAT(s.poisson(pt, q, p), WithinAbs(xq.dot(w * xp), 1e-14));
  }
  const Expr f = parse_expr("q1*sin(theta) + p1^2", c);
  for (const auto& pt : sample_points(c, 16, 13)) CHECK(std::abs(poisson_bracket(s, f, f)(pt)) < 1e-14);

  std::vector<Expr> quadratics = polynomial_corpus(c, 6, 2, 14);
  CheckReport r = verify_poisson(s, quadratics, sampling(64), Tolerances{});
  CHECK(r.passed());
  CHECK(entry(r, "jacobi").max < 1e-8);
  CHECK(entry(r, "xi is a poisson vector field").passed);

  std::vector<Expr> mixed;
  for (const auto& g : polynomial_corpus(qpt(), 6, 2, 15)) mixed.push_back(g + sin(coordinate(qpt(), 2)) * g);
  CHECK(verify_poisson(warped(), mixed, sampling(64), Tolerances{}).passed());
}

TEST_CASE("leaf distribution spans ker eta", "[leaves]") {
  for (int n : {1, 2}) {
    auto s = cotangent(n);
    for (const auto& p : sample_points(s.chart(), 64, 21)) {
      Eigen::MatrixXd basis = leaf_distribution(s, p);
      REQUIRE(basis.cols() == 2 * n);
      CHECK(max_abs(s.eta_at(p).transpose() * basis) < 1e-14);
      CHECK(linalg::rank(basis) == 2 * n);
      CHECK(std::abs(basis.row(2 * n).norm()) < 1e-14);
      Eigen::MatrixXd restricted = basis.transpose() * s.omega_matrix(p) * basis;
      CHECK(linalg::rank(restricted) == 2 * n);
      Eigen::MatrixXd frame(2 * n + 1, 2 * n + 1);
      frame << basis, s.reeb(p);
      CHECK(std::abs(frame.determinant()) > 1e-9);
    }
    CHECK(verify_leaf_distribution(s, sampling(64), Tolerances{}).passed());
  }
  CHECK(verify_leaf_distribution(warped(), sampling(64), Tolerances{}).passed());
}

TEST_CASE("hypersurfaces of symplectic charts", "[hypersurface]") {
  auto w = make_chart("W", {"q", "r", "p", "pr"});
  auto n = make_chart("N", {"q", "p", "s"});
  DifferentialForm omega = parse_form(w, 2, {{"dq^dp", "1"}, {"dr^dpr", "1"}});
  SmoothMap inc = SmoothMap::parse(n, w, {"q", "0", "p", "s"}, "i");
  VectorField dr = VectorField::parse(w, {"0", "1", "0", "0"}, "X");
  CosymplecticStructure s = from_symplectic_hypersurface(omega, inc, dr, sampling(), Tolerances{});
  CHECK(verify_cosymplectic(s, sampling(), Tolerances{}).passed());
  for (const auto& p : sample_points(n, 64, 30)) {
    CHECK(max_abs(s.eta_at(p) - Eigen::Vector3d(0, 0, 1)) == 0.0);
    CHECK(max_abs(exterior_derivative(s.eta().symbolic()).at(p)) < 1e-12);
    // ξ is ♭⁻¹ of i*(ι_X ω), re-applied through the flat map.
    CHECK(max_abs(s.flat(p, s.reeb(p)) - s.eta_at(p)) < 1e-12);
    CHECK(max_abs(s.reeb(p) - Eigen::Vector3d(0, 0, 1)) < 1e-12);
  }

  VectorField tangent = VectorField::parse(w, {"1", "0", "0", "0"}, "T");
  try {
    from_symplectic_hypersurface(omega, inc, tangent, sampling(), Tolerances{});
    FAIL("expected a transversality error");
  } catch (const TransversalityError& e) {
    CHECK(std::string(e.what()).find("tangent to the hypersurface at (") != std::string::npos);
  }
  VectorField stretch = VectorField::parse(w, {"q", "1", "0", "0"}, "Y");
  CHECK_THROWS_AS(from_symplectic_hypersurface(omega, inc, stretch, sampling(), Tolerances{}), NonSymplecticFieldError);
}

TEST_CASE("symplectization of the cotangent example", "[symplectization]") {
  for (int n : {1, 2}) {
    auto s = cotangent(n);
    Symplectization sp = symplectization(s);
    CHECK(sp.chart->dimension() == 2 * n + 2);
    CHECK(sp.time_index == 2 * n + 1);
    CHECK(verify_symplectic(sp.omega, sampling(), Tolerances{}, "omega_tilde").passed());
    for (const auto& p : sample_points(sp.chart, 64, 40)) {
      Eigen::MatrixXd m = pointwise::two_form_matrix(2 * n + 2, sp.omega.at(p));
      CHECK_THAT(std::abs(m.determinant()), WithinAbs(1.0, 1e-12));
      // Block form: the base block is ω, the time row pairs with η.
      const Point base = sp.projection(p);
      CHECK((m.topLeftCorner(2 * n + 1, 2 * n + 1) - s.omega_matrix(base)).norm() < 1e-15);
      CHECK((m.row(2 * n + 1).head(2 * n + 1).transpose() - s.eta_at(base)).norm() < 1e-15);
      CHECK(max_abs(exterior_derivative(sp.omega.symbolic()).at(p)) < 1e-12);
    }
  }
}

TEST_CASE("averaging over a circle action", "[averaging]") {
  auto c = qpt();
  GroupAction rot = GroupAction::parse(GroupModel{0, 1}, c, {"a"}, {"q", "p", "theta + a"}, "rot");

  // Invariant input: the average is the form itself.
  FormField inv(parse_form(c, 1, {{"dtheta", "1 + q^2"}, {"dq", "p"}}));
  FormField avg = average_one_form(inv, rot, 64);
  for (const auto& p : sample_points(c, 32, 50)) CHECK(max_abs(avg.at(p) - inv.at(p)) < 1e-12);

  // dθ + sin θ dq: the sine averages out. The input is not closed, which the
  // check reports as an unverified hypothesis rather than an error.
  FormField wobble(parse_form(c, 1, {{"dtheta", "1"}, {"dq", "sin(theta)"}}));
  FormField w64 = average_one_form(wobble, rot, 64);
  FormField w128 = average_one_form(wobble, rot, 128);
  for (const auto& p : sample_points(c, 32, 51)) {
    CHECK(max_abs(w64.at(p) - Eigen::Vector3d(0, 0, 1)) < 1e-12);
    CHECK(max_abs(w64.at(p) - w128.at(p)) < 1e-12);
  }
  CheckReport r = verify_averaging(wobble, rot, sampling(), Tolerances{});
  CHECK(r.passed());
  REQUIRE(r.unverified.size() == 1);
  CHECK(r.unverified[0] == "input form is not closed");

  // A closed but non-invariant η: dθ + d(q sin θ / 2).
  FormField closed(parse_form(c, 1, {{"dtheta", "1 + 0.5*q*cos(theta)"}, {"dq", "0.5*sin(theta)"}}));
  CheckReport rc = verify_averaging(closed, rot, sampling(), Tolerances{});
  CHECK(rc.passed());
  CHECK(rc.unverified.empty());
  CHECK(entry(rc, "averaged form invariant").max < 1e-8);
  CHECK(entry(rc, "quadrature order 64 vs 128").max < 1e-12);
  for (const auto& p : sample_points(c, 16, 52))
    CHECK(max_abs(average_one_form(closed, rot, 64).at(p) - Eigen::Vector3d(0, 0, 1)) < 1e-12);

  GroupAction shift = GroupAction::parse(GroupModel{1, 0}, c, {"b"}, {"q + b", "p", "theta"}, "shift");
  CHECK_THROWS_AS(average_one_form(closed, shift, 64), NonCompactGroupError);
  CHECK_FALSE(verify_averaging(closed, shift, sampling(), Tolerances{}).passed());
}
