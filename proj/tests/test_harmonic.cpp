#include <doctest.h>

#include <cmath>
#include <random>

#include "qharm/errors.hpp"
#include "qharm/harmonic.hpp"

using namespace qharm;

namespace {

StepSet model(const char* name) { return load_model_file(std::string(QHARM_MODELS_DIR) + "/" + name + ".model"); }
StepSet fixture(const char* name) {
  return load_model_file(std::string(QHARM_TEST_MODELS_DIR) + "/" + name + ".model", ValidateOptions{true});
}

ErrorCode failure(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::ParseError;
}

// K times the table, compared with N(psi1(x)) - N(-psi1(y)) on the window (exact fields).
void check_kernel_identity(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int W) {
  HarmonicTable<Rational> h = expand_harmonic<Rational>(m, map, spec, W);
  Series2<Rational> H(W - 1, W - 1);
  for (int i = 1; i <= W; ++i)
    for (int j = 1; j <= W; ++j) H(i - 1, j - 1) = h(i, j);
  Series2<Rational> KH = kernel_poly(m).as_series2<Rational>(W - 1, W - 1) * H;
  std::vector<Rational> num = spec.numerator(m.p11());
  Series1<Rational> psi = map.series_exact(W - 1);
  Series1<Rational> nx = compose_poly(num, psi), ny = compose_poly(num, -psi);
  for (int a = 0; a < W; ++a)
    for (int b = 0; b < W; ++b) {
      Rational expect = 0;
      if (b == 0) expect += nx[a];
      if (a == 0) expect -= ny[b];
      CAPTURE(a);
      CAPTURE(b);
      CHECK(KH(a, b) == expect);
    }
}

Rational random_rational(std::mt19937& g) {
  std::uniform_int_distribution<long> num(-50, 50), den(1, 30);
  return ratio(num(g), den(g));
}

}  // namespace

TEST_CASE("harmonic spec parsing") {
  CHECK(parse_harmonic_spec("t").a == std::vector<Rational>{0, 1});
  CHECK(parse_harmonic_spec("t^3").a == std::vector<Rational>{0, 0, 0, 1});
  CHECK(parse_harmonic_spec("P2").a == std::vector<Rational>{0, 0, 1});
  CHECK(parse_harmonic_spec(" 1, 0 ,-2/6").a == std::vector<Rational>{0, 1, 0, ratio(-1, 3)});
  CHECK(failure([] { parse_harmonic_spec("t^0"); }) == ErrorCode::ParseError);
  CHECK(failure([] { parse_harmonic_spec("x^2"); }) == ErrorCode::ParseError);
  CHECK(failure([] { parse_harmonic_spec(""); }) == ErrorCode::ParseError);
}

TEST_CASE("basis polynomials") {
  Rational p = ratio(1, 8);
  CHECK(basis_poly(1, p) == std::vector<Rational>{0, 1});
  CHECK(basis_poly(2, p) == std::vector<Rational>{-p * p, 0, 1});
  CHECK(basis_poly(3, p) == std::vector<Rational>{0, -p * p, 0, 1});
  CHECK(basis_poly(4, 0) == std::vector<Rational>{0, 0, 0, 0, 1});
}

TEST_CASE("simple walk h1 is -4ij") {
  StepSet m = model("srw");
  HarmonicTable<Rational> h = expand_harmonic<Rational>(m, make_map(m), HarmonicSpec::basis(1), 30);
  for (int i = 1; i <= 30; ++i)
    for (int j = 1; j <= 30; ++j) REQUIRE(h(i, j) == -4 * i * j);
  CHECK(h(0, 3) == 0);
  CHECK(h.provenance.fill == "bidiagonal");
  CHECK(h.provenance.field == "rational");
}

TEST_CASE("kernel times table reproduces the numerator") {
  for (const char* n : {"srw", "king", "kreweras"}) {
    CAPTURE(n);
    StepSet m = model(n);
    ConformalMap map = make_map(m);
    for (int k = 1; k <= 4; ++k) check_kernel_identity(m, map, HarmonicSpec::basis(k), 12);
    check_kernel_identity(m, map, parse_harmonic_spec("1,-1/2,0,3"), 12);
  }
  StepSet z2 = fixture("bipolar_z2");
  check_kernel_identity(z2, make_map(z2), HarmonicSpec::basis(3), 10);
}

TEST_CASE("raw numerator X^2 equals the basis element h2") {
  // P2 = X^2 - p11^2 and a constant numerator contributes nothing
  StepSet m = model("king");
  ConformalMap map = make_map(m);
  HarmonicSpec raw = parse_harmonic_spec("0,1");
  raw.raw_numerator = true;
  CHECK(expand_harmonic<Rational>(m, map, raw, 15) == expand_harmonic<Rational>(m, map, HarmonicSpec::basis(2), 15));
}

TEST_CASE("Laplacian residual") {
  for (const char* n : {"srw", "king", "kreweras"}) {
    StepSet m = model(n);
    ConformalMap map = make_map(m);
    HarmonicTable<Rational> h = expand_harmonic<Rational>(m, map, parse_harmonic_spec("1,2,-1/3,1/7"), 20);
    CHECK(laplacian_residual(h, m).max_abs == 0);
    HarmonicTable<double> f = expand_harmonic<double>(m, map, HarmonicSpec::basis(3), 20);
    CHECK(laplacian_residual(f, m).relative < 1e-12);
  }
  // a table that is not harmonic is caught at its defect
  StepSet srw = model("srw");
  HarmonicTable<Rational> bad = table_from<Rational>(10, [](int i, int j) { return Rational(i * i * j); });
  LaplacianReport<Rational> r = laplacian_residual(bad, srw);
  CHECK(r.max_abs == ratio(1, 2) * 9);  // Δ(i^2 j) = j/2, largest j with a full stencil is 9
  CHECK(failure([&] { laplacian_residual(table_from<Rational>(1, [](int, int) { return Rational(1); }), srw); }) ==
        ErrorCode::WindowTooSmall);
}

TEST_CASE("vanishing patterns") {
  StepSet srw = model("srw");
  ConformalMap ms = make_map(srw);
  for (int n = 1; n <= 6; ++n) {
    VanishingReport v = vanishing_check(expand_harmonic<Rational>(srw, ms, HarmonicSpec::basis(n), 12), n, srw.p11());
    CHECK_MESSAGE(v.pass, v.detail);
  }
  // h1 does not vanish on i+j = 1 + 1, so claiming index 2 fails
  CHECK_FALSE(vanishing_check(expand_harmonic<Rational>(srw, ms, HarmonicSpec::basis(1), 12), 2, srw.p11()).pass);

  StepSet king = model("king");
  ConformalMap mk = make_map(king);
  std::vector<HarmonicTable<Rational>> b;
  for (int n = 0; n <= 7; ++n)
    b.push_back(n == 0 ? HarmonicTable<Rational>() : expand_harmonic<Rational>(king, mk, HarmonicSpec::basis(n), 10));
  for (int n = 1; n <= 7; ++n) CHECK(vanishing_check(b[n], n, king.p11()).pass);
  for (int k = 1; k <= 3; ++k) CHECK(lemma_block(b[2 * k], b[2 * k + 1], k).det != 0);
}

TEST_CASE("interpolation round trip") {
  std::mt19937 g(2024);
  for (const char* n : {"srw", "king", "kreweras"}) {
    CAPTURE(n);
    StepSet m = model(n);
    ConformalMap map = make_map(m);
    HarmonicSpec s;
    s.a.push_back(0);
    for (int i = 1; i <= 6; ++i) s.a.push_back(random_rational(g));
    HarmonicTable<Rational> h = expand_harmonic<Rational>(m, map, s, 10);
    std::vector<Rational> c, d;
    for (int i = 1; i <= 10; ++i) {
      c.push_back(h(i, 1));
      d.push_back(h(1, i));
    }
    Interpolation<Rational> r = interpolate_boundary<Rational>(m, map, c, d, 6);
    CHECK(r.a == s.a);
    CHECK(r.residual == 0.0);
  }
}

TEST_CASE("interpolation errors") {
  StepSet srw = model("srw");
  ConformalMap map = make_map(srw);
  HarmonicTable<Rational> h = expand_harmonic<Rational>(srw, map, HarmonicSpec::basis(2), 6);
  std::vector<Rational> c, d;
  for (int i = 1; i <= 6; ++i) {
    c.push_back(h(i, 1));
    d.push_back(h(1, i) + (i == 4 ? 1 : 0));
  }
  CHECK(failure([&] { interpolate_boundary<Rational>(srw, map, c, d, 3); }) == ErrorCode::InconsistentData);
  CHECK(failure([&] { interpolate_boundary<Rational>(srw, map, {c[0]}, std::nullopt, 3); }) ==
        ErrorCode::InconsistentData);
  StepSet king = model("king");
  CHECK(failure([&] { interpolate_boundary<Rational>(king, make_map(king), c, std::nullopt, 3); }) ==
        ErrorCode::InconsistentData);
}

TEST_CASE("symmetry split and sign grid") {
  StepSet m = model("srw");
  ConformalMap map = make_map(m);
  auto [s1, a1] = decompose_symmetry(expand_harmonic<Rational>(m, map, HarmonicSpec::basis(1), 10));
  CHECK(a1 == table_from<Rational>(10, [](int, int) { return Rational(0); }));
  HarmonicTable<Rational> h2 = expand_harmonic<Rational>(m, map, HarmonicSpec::basis(2), 10);
  auto [s2, a2] = decompose_symmetry(h2);
  CHECK(s2 == table_from<Rational>(10, [](int, int) { return Rational(0); }));

  SignReport g1 = sign_grid(expand_harmonic<Rational>(m, map, HarmonicSpec::basis(1), 10));
  CHECK(g1.normalization == -1);
  CHECK(g1.all_positive);
  SignReport g2 = sign_grid(h2);
  CHECK(g2.zeros == 10);
  CHECK(g2.negatives == 45);
  for (int i = 1; i <= 10; ++i) CHECK(g2.at(i, i) == 0);
  CHECK(ray_sign(g2, 1.0) == 0);
  CHECK(ray_sign(g2, 0.5) == -ray_sign(g2, 2.0));
}

TEST_CASE("file formats") {
  StepSet m = model("srw");
  ConformalMap map = make_map(m);
  HarmonicTable<Rational> h = expand_harmonic<Rational>(m, map, HarmonicSpec::basis(1), 3);
  CHECK(table_csv(h) == "i,j,numerator,denominator\n1,1,-4,1\n1,2,-8,1\n1,3,-12,1\n2,1,-8,1\n2,2,-16,1\n2,3,-24,1\n"
                        "3,1,-12,1\n3,2,-24,1\n3,3,-36,1\n");
  CHECK(table_csv(expand_harmonic<double>(m, map, HarmonicSpec::basis(1), 1)) == "i,j,value\n1,1,-4\n");
  SignReport g = sign_grid(expand_harmonic<Rational>(m, map, HarmonicSpec::basis(2), 2));
  // h2 antisymmetric: (1,2) and (2,1) have opposite signs, diagonal zero; first image row is j = 2
  std::string pgm = sign_pgm(g);
  std::string head = "P5\n2 2\n255\n";
  REQUIRE(pgm.size() == head.size() + 4);
  CHECK(pgm.substr(0, head.size()) == head);
  CHECK(static_cast<unsigned char>(pgm[head.size() + 1]) == 128);  // (2,2)
  CHECK(static_cast<unsigned char>(pgm[head.size() + 2]) == 128);  // (1,1)
  CHECK(static_cast<unsigned char>(pgm[head.size()]) + static_cast<unsigned char>(pgm[head.size() + 3]) == 255);
  CHECK(sign_csv(g).rfind("i,j,sign\n1,1,0\n", 0) == 0);
}

TEST_CASE("diagonal fill agrees with bivariate division") {
  for (const char* n : {"king", "kreweras"}) {
    StepSet m = model(n);
    ConformalMap map = make_map(m);
    for (int k = 1; k <= 4; ++k)
      CHECK(expand_harmonic<Rational>(m, map, HarmonicSpec::basis(k), 18) ==
            expand_by_division<Rational>(m, map, HarmonicSpec::basis(k), 18));
  }
}

TEST_CASE("float fill on the reversed Kreweras walk") {
  StepSet m = fixture("reverse_kreweras");
  ConformalMap map = make_map(m);
  CHECK_FALSE(map.exact());
  HarmonicTable<double> h = expand_harmonic<double>(m, map, HarmonicSpec::basis(1), 6);
  CHECK(laplacian_residual(h, m).relative < 1e-10);
  CHECK(h.provenance.consistency < 1e-9);
  // the bidiagonal march amplifies rounding; the overdetermined equation exposes it
  CHECK(failure([&] { expand_harmonic<double>(m, map, HarmonicSpec::basis(1), 10); }) == ErrorCode::ConsistencyResidual);
  CHECK(failure([&] { expand_harmonic<Rational>(m, map, HarmonicSpec::basis(1), 5); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("boundary functional equation") {
  StepSet m = model("srw");
  ConformalMap map = make_map(m);
  CurveSample c = trace_s1(m, 400);
  double prev = 1e300;
  for (int order : {50, 100, 200, 400}) {
    FunctionalResidual r = functional_equation_residual(m, map, HarmonicSpec::basis(1), c, order, 0.1);
    CHECK(r.max_abs < prev);
    prev = r.max_abs;
  }
  CHECK(prev < 1e-8);
  CurveSample outside = c;
  outside.points.push_back(1.2);
  CHECK(failure([&] { functional_equation_residual(m, map, HarmonicSpec::basis(1), outside, 20, 0.1); }) ==
        ErrorCode::SeriesDivergence);
}
