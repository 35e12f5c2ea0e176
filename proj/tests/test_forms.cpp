#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cosym/cosym.hpp"

using namespace cosym;
using Catch::Matchers::WithinAbs;

namespace {

// (q1..qn, p1..pn, theta)
ChartPtr cotangent_chart(int n) {
  std::vector<std::string> coords;
  for (int i = 1; i <= n; ++i) coords.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) coords.push_back("p" + std::to_string(i));
  coords.push_back("theta");
  std::vector<bool> periodic(coords.size(), false);
  periodic.back() = true;
  return make_chart("G", coords, periodic);
}

DifferentialForm canonical(const ChartPtr& c, int n) {
  DifferentialForm w(c, 2);
  for (int i = 0; i < n; ++i) w.add_term({i, n + i}, Expr(1.0));
  return w;
}

DifferentialForm dx(const ChartPtr& c, int i) { return DifferentialForm::differential(c, i); }

Eigen::MatrixXd random_vectors(int n, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd v(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) v(i, j) = u(rng);
  return v;
}

int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) sign = -sign;
  return sign;
}

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// (ω^n ∧ dθ)(v_1..v_{2n+1}) from the alternation formula for a wedge of
// n copies of the 2-form with one 1-form, summed over all permutations.
double top_form_by_permutations(int n, const Eigen::MatrixXd& v) {
  const int dim = 2 * n + 1;
  auto omega = [n](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a(i) * b(n + i) - a(n + i) * b(i);
    return s;
  };
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0;
  do {
    double term = permutation_sign(perm);
    for (int f = 0; f < n; ++f) term *= omega(v.col(perm[2 * f]), v.col(perm[2 * f + 1]));
    term *= v(dim - 1, perm[dim - 1]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / std::pow(2.0, n);
}

// A corpus of polynomial/trig forms of every degree on a 4-dimensional chart.
std::vector<DifferentialForm> form_corpus(const ChartPtr& c, std::uint64_t seed) {
  const auto polys = polynomial_corpus(c, 40, 3, seed);
  std::vector<DifferentialForm> out;
  std::size_t next = 0;
  auto coeff = [&] {
    const Expr& e = polys[next++ % polys.size()];
    return next % 3 == 0 ? sin(e) : e;
  };
  for (int k = 0; k <= 2; ++k) {
    for (int rep = 0; rep < 4; ++rep) {
      DifferentialForm f(c, k);
      for (std::size_t r = 0; r < multi_indices(c->dimension(), k).size(); ++r)
        f.add_term(multi_indices(c->dimension(), k)[r], coeff());
      out.push_back(f);
    }
  }
  return out;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("wedge of coordinate differentials", "[wedge]") {
  auto c = make_chart("R2", {"q", "p"});
  DifferentialForm area = wedge(dx(c, 0), dx(c, 1));
  CHECK(area.degree() == 2);
  CHECK(area.coefficient({0, 1}).is_constant(1.0));
  CHECK(wedge(dx(c, 1), dx(c, 0)).coefficient({0, 1}).is_constant(-1.0));
  CHECK(eval(wedge(dx(c, 0), dx(c, 0)).coefficient({0, 1}), std::vector<double>{0.2, 0.3}) == 0.0);

  auto r3 = make_chart("R3", {"q", "p", "t"});
  DifferentialForm a = wedge(dx(r3, 0), dx(r3, 1));
  CHECK_THROWS_AS(wedge(a, a), DegreeError);
  CHECK_THROWS_AS(wedge(dx(r3, 0), dx(c, 0)), ChartMismatchError);
}

TEST_CASE("top power of the canonical form wedged with dtheta is n! times the volume", "[wedge]") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2}) {
    auto c = cotangent_chart(n);
    DifferentialForm top = canonical(c, n);
    for (int i = 1; i < n; ++i) top = wedge(top, canonical(c, n));
    top = wedge(top, dx(c, 2 * n));
    REQUIRE(top.degree() == 2 * n + 1);
    for (const auto& p : sample_points(c, 20, 4)) {
      CHECK_THAT(std::abs(top.at(p)(0)), WithinAbs(factorial(n), 1e-14));
      Eigen::MatrixXd v = random_vectors(2 * n + 1, 2 * n + 1, rng);
      const double want = top_form_by_permutations(n, v);
      CHECK_THAT(pointwise::evaluate(2 * n + 1, 2 * n + 1, top.at(p), v), WithinAbs(want, 1e-12));
      CHECK_THAT(std::abs(want), WithinAbs(factorial(n) * std::abs(v.determinant()), 1e-12));
    }
  }
}

TEST_CASE("exterior derivative on examples", "[d]") {
  auto c = make_chart("R2", {"q", "p"});
  DifferentialForm qdp = parse_form(c, 1, {{"dp", "q"}});
  DifferentialForm d = exterior_derivative(qdp);
  CHECK(d.coefficient({0, 1}).is_constant(1.0));

  for (int n : {1, 2, 3}) {
    auto g = cotangent_chart(n);
    DifferentialForm dw = exterior_derivative(canonical(g, n));
    for (const auto& coef : dw.coefficients()) CHECK(coef.is_zero());
  }

  auto top = make_chart("R2", {"q", "p"});
  CHECK_THROWS_AS(exterior_derivative(wedge(dx(top, 0), dx(top, 1))), DegreeError);
}

TEST_CASE("d(sin(theta) dq) agrees with Stokes on small squares", "[d][stokes]") {
  auto c = make_chart("C", {"q", "theta"}, {false, true});
  DifferentialForm alpha = parse_form(c, 1, {{"dq", "sin(theta)"}});
  DifferentialForm d = exterior_derivative(alpha);
  // cos(theta) dtheta^dq, stored on the increasing index (q, theta)
  for (const auto& p : sample_points(c, 10, 2)) CHECK_THAT(d.at(p)(0), WithinAbs(-std::cos(p[1]), 1e-15));

  // Five-point Gauss-Legendre on [0, 1].
  const double gx[] = {0.0469100770306680, 0.2307653449471585, 0.5, 0.7692346550528415, 0.9530899229693319};
  const double gw[] = {0.1184634425280945, 0.2393143352496832, 0.2844444444444444, 0.2393143352496832,
                       0.1184634425280945};
  const double h = 0.05;
  for (const auto& corner : sample_points(c, 20, 8)) {
    const double q0 = corner[0], t0 = corner[1];
    // ∮ over the boundary, counterclockwise in (q, theta)
    const double xs[4][2] = {{q0, t0}, {q0 + h, t0}, {q0 + h, t0 + h}, {q0, t0 + h}};
    double circulation = 0.0;
    for (int e = 0; e < 4; ++e) {
      const auto& a = xs[e];
      const auto& b = xs[(e + 1) % 4];
      Eigen::Vector2d tangent(b[0] - a[0], b[1] - a[1]);
      for (int g = 0; g < 5; ++g) {
        std::vector<double> x{a[0] + gx[g] * tangent(0), a[1] + gx[g] * tangent(1)};
        circulation += gw[g] * alpha.at(x).dot(tangent);
      }
    }
    double flux = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        std::vector<double> x{q0 + gx[i] * h, t0 + gx[j] * h};
        flux += gw[i] * gw[j] * d.at(x)(0) * h * h;
      }
    CHECK_THAT(circulation, WithinAbs(flux, 1e-14));
  }
}

TEST_CASE("interior products on examples", "[interior]") {
  auto c = make_chart("R2", {"q", "p"});
  DifferentialForm i = interior_product(VectorField::coordinate_field(c, 0), wedge(dx(c, 0), dx(c, 1)));
  CHECK(i.degree() == 1);
  CHECK(i.coefficient({0}).is_zero());
  CHECK(i.coefficient({1}).is_constant(1.0));

  auto s = make_chart("S1", {"theta"}, {true});
  DifferentialForm one = interior_product(VectorField::coordinate_field(s, 0), dx(s, 0));
  CHECK(one.degree() == 0);
  CHECK(one.coefficients()[0].is_constant(1.0));
  CHECK_THROWS_AS(interior_product(VectorField::coordinate_field(s, 0), DifferentialForm::function(s, Expr(1.0))),
                  DegreeError);
}

TEST_CASE("the built-in cotangent example has Reeb field d_theta", "[interior][builtin]") {
  const Manifest m = load_manifest(gallery_manifest("cotangent_s1"));
  const auto& omega = m.forms.at("omega");
  const auto& eta = m.forms.at("eta");
  const auto& xi = m.fields.at("xi");
  for (const auto& p : sample_points(omega.chart(), 64, 3)) {
    CHECK(max_abs(interior_product(xi, omega).at(p)) < 1e-15);
    CHECK(interior_product(xi, eta).at(p)(0) == 1.0);
    CHECK(max_abs(lie_derivative(xi, omega).at(p)) < 1e-15);
    CHECK(max_abs(lie_derivative(xi, eta).at(p)) < 1e-15);
  }
}

TEST_CASE("lie derivative on examples", "[lie]") {
  auto c = make_chart("R2", {"q", "p"});
  DifferentialForm l = lie_derivative(VectorField::coordinate_field(c, 0), parse_form(c, 1, {{"dq", "q"}}));
  CHECK(l.coefficient({0}).is_constant(1.0));
  CHECK(l.coefficient({1}).is_zero());
}

TEST_CASE("lie derivative obeys the Leibniz rule over wedge", "[lie][property]") {
  auto c = make_chart("R4", {"x", "y", "z", "w"});
  const auto corpus = form_corpus(c, 21);
  const VectorField x = VectorField::parse(c, {"y*z", "sin(x)", "x - w^2", "1 + x*y"});
  const auto points = sample_points(c, 50, 6);
  int pairs = 0;
  for (const auto& a : corpus)
    for (const auto& b : corpus) {
      if (a.degree() + b.degree() > 2 || &a > &b) continue;
      DifferentialForm lhs = lie_derivative(x, wedge(a, b));
      DifferentialForm rhs = wedge(lie_derivative(x, a), b) + wedge(a, lie_derivative(x, b));
      for (const auto& p : points) {
        const double scale = std::max(1.0, max_abs(lhs.at(p)));
        CHECK(max_abs(lhs.at(p) - rhs.at(p)) < 1e-12 * scale);
      }
      ++pairs;
    }
  CHECK(pairs > 20);
}

TEST_CASE("pullback on examples", "[pullback]") {
  auto line = make_chart("T", {"t"});
  auto plane = make_chart("R2", {"q", "p"});
  SmoothMap f = SmoothMap::parse(line, plane, {"t^2", "0"}, "F");
  DifferentialForm pulled = pullback_form(f, dx(plane, 0));
  for (double t : {-0.7, 0.0, 0.3, 1.9}) CHECK(eval(pulled.coefficients()[0], std::vector<double>{t}) == 2.0 * t);
  CHECK_THROWS_AS(pullback_form(f, dx(line, 0)), ChartMismatchError);

  const Manifest m = load_manifest(gallery_manifest("cotangent_s1"));
  DifferentialForm unit_eta = pullback_form(m.maps.at("eps"), m.forms.at("eta"));
  for (const auto& coef : unit_eta.coefficients()) CHECK(coef.is_zero());
}

TEST_CASE("d squares to zero on the corpus", "[d][property]") {
  auto c = make_chart("R4", {"x", "y", "z", "w"});
  const auto points = sample_points(c, 128, 12);
  for (const auto& a : form_corpus(c, 3)) {
    DifferentialForm dd = exterior_derivative(exterior_derivative(a));
    for (const auto& p : points) CHECK(max_abs(dd.at(p)) < 1e-12);
  }
}

TEST_CASE("pointwise evaluation is alternating", "[evaluate][property]") {
  auto c = make_chart("R4", {"x", "y", "z", "w"});
  std::mt19937_64 rng(5);
  for (const auto& a : form_corpus(c, 8)) {
    if (a.degree() < 2) continue;
    for (const auto& p : sample_points(c, 32, 1)) {
      Eigen::MatrixXd v = random_vectors(4, a.degree(), rng);
      Eigen::MatrixXd swapped = v;
      swapped.col(0).swap(swapped.col(1));
      CHECK_THAT(evaluate_form(a, p, swapped), WithinAbs(-evaluate_form(a, p, v), 1e-12));
      Eigen::MatrixXd repeated = v;
      repeated.col(1) = repeated.col(0);
      CHECK_THAT(evaluate_form(a, p, repeated), WithinAbs(0.0, 1e-12));
    }
  }
}

TEST_CASE("graded commutativity and iota_X iota_X = 0", "[wedge][interior][property]") {
  auto c = make_chart("R4", {"x", "y", "z", "w"});
  const auto corpus = form_corpus(c, 13);
  const VectorField x = VectorField::parse(c, {"x*y", "cos(z)", "w", "1 - y^2"});
  const auto points = sample_points(c, 16, 7);
  for (const auto& a : corpus)
    for (const auto& b : corpus) {
      if (a.degree() + b.degree() > 4) continue;
      DifferentialForm ab = wedge(a, b);
      DifferentialForm ba = wedge(b, a);
      const double sign = (a.degree() * b.degree()) % 2 == 0 ? 1.0 : -1.0;
      for (const auto& p : points) CHECK(max_abs(ab.at(p) - sign * ba.at(p)) < 1e-12 * std::max(1.0, max_abs(ab.at(p))));
    }
  for (const auto& a : corpus) {
    if (a.degree() < 2) continue;
    DifferentialForm ii = interior_product(x, interior_product(x, a));
    for (const auto& p : points) CHECK(max_abs(ii.at(p)) < 1e-12);
  }
}

TEST_CASE("pullback commutes with wedge and d", "[pullback][property]") {
  auto src = make_chart("R3", {"u", "v", "s"});
  auto dst = make_chart("R4", {"x", "y", "z", "w"});
  SmoothMap f = SmoothMap::parse(src, dst, {"u*v", "v^2 - s", "u + s^3", "u*v*s"}, "F");
  const auto corpus = form_corpus(dst, 17);
  const auto points = sample_points(src, 128, 19);
  for (const auto& a : corpus) {
    if (a.degree() < 3) {
      DifferentialForm lhs = pullback_form(f, exterior_derivative(a));
      DifferentialForm rhs = exterior_derivative(pullback_form(f, a));
      for (const auto& p : points) CHECK(max_abs(lhs.at(p) - rhs.at(p)) < 1e-9);
    }
    for (const auto& b : corpus) {
      if (a.degree() + b.degree() > 3 || a.degree() == 0 || b.degree() == 0) continue;
      DifferentialForm lhs = pullback_form(f, wedge(a, b));
      DifferentialForm rhs = wedge(pullback_form(f, a), pullback_form(f, b));
      for (std::size_t s = 0; s < points.size(); s += 8) CHECK(max_abs(lhs.at(points[s]) - rhs.at(points[s])) < 1e-9);
    }
  }
}

TEST_CASE("lie derivative of one-forms matches the flow derivative", "[lie][property]") {
  auto c = make_chart("R3", {"x", "y", "z"});
  const VectorField x = VectorField::parse(c, {"y*z", "sin(x)", "1 + x*y"});
  const DifferentialForm alpha = parse_form(c, 1, {{"dx", "y^2"}, {"dy", "cos(x*z)"}, {"dz", "x - y*z"}});
  const DifferentialForm lie = lie_derivative(x, alpha);
  // Jacobian of X, symbolic.
  const SmoothMap xmap(c, c, x.components(), "X");
  const double t = 1e-4;
  // (ψ_t* α)_j(p) for the Euler step ψ_t(p) = p + t X(p).
  auto euler_pullback = [&](const Point& p, double step) {
    Eigen::VectorXd xp = x.at(p);
    std::vector<double> moved(p.values().begin(), p.values().end());
    for (int i = 0; i < 3; ++i) moved[static_cast<std::size_t>(i)] += step * xp(i);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(3, 3) + step * xmap.jacobian(p);
    return Eigen::VectorXd(jac.transpose() * alpha.at(moved));
  };
  for (const auto& p : sample_points(c, 20, 23)) {
    Eigen::VectorXd fd = (euler_pullback(p, t) - euler_pullback(p, -t)) / (2.0 * t);
    CHECK(max_abs(fd - lie.at(p)) < 1e-5);
  }
}

TEST_CASE("pointwise operations agree with symbolic ones", "[pointwise]") {
  auto c = make_chart("R4", {"x", "y", "z", "w"});
  const auto corpus = form_corpus(c, 29);
  const VectorField x = VectorField::parse(c, {"x*y", "cos(z)", "w", "1 - y^2"});
  for (const auto& p : sample_points(c, 8, 31)) {
    for (const auto& a : corpus) {
      if (a.degree() > 0) {
        Eigen::VectorXd sym = interior_product(x, a).at(p);
        CHECK(max_abs(sym - pointwise::interior(4, a.degree(), x.at(p), a.at(p))) < 1e-13);
      }
      if (a.degree() < 4) {
        FormField numeric(c, a.degree(), [a](const Point& q) { return a.at(q); });
        CHECK(max_abs(exterior_derivative_fd(numeric, p) - exterior_derivative(a).at(p)) < 1e-6);
      }
      for (const auto& b : corpus) {
        if (a.degree() + b.degree() > 4) continue;
        Eigen::VectorXd sym = wedge(a, b).at(p);
        CHECK(max_abs(sym - pointwise::wedge(4, a.degree(), a.at(p), b.degree(), b.at(p))) < 1e-12 * std::max(1.0, max_abs(sym)));
      }
    }
  }
}

TEST_CASE("forms parse from manifest-style term maps", "[parse]") {
  auto c = make_chart("G", {"q", "p", "theta"}, {false, false, true});
  DifferentialForm w = parse_form(c, 2, {{"dp^dq", "2"}, {"dq^dtheta", "sin(q)"}});
  CHECK(w.coefficient({0, 1}).is_constant(-2.0));
  CHECK_THROWS_AS(parse_form(c, 2, {{"dq", "1"}}), DegreeError);
  CHECK_THROWS_AS(parse_form(c, 1, {{"dx", "1"}}), UnknownIdentifierError);
  CHECK_THROWS_AS(parse_form(c, 1, {{"q", "1"}}), ParseError);
}
