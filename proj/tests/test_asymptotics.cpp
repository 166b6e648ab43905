#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "qharm/asymptotics.hpp"
#include "qharm/errors.hpp"

using namespace qharm;

namespace {

StepSet model(const char* name) { return load_model_file(std::string(QHARM_MODELS_DIR) + "/" + name + ".model"); }

// Laplace transform over the quadrant by nested quadrature
double laplace_by_quadrature(int n, double theta, double x, double y) {
  boost::math::quadrature::exp_sinh<double> q;
  auto outer = [&](double u) {
    auto inner = [&](double v) {
      double w = std::exp(-u * x - v * y);
      return w == 0.0 ? 0.0 : continuous_harmonic(n, theta, u, v) * w;
    };
    return q.integrate(inner, 1e-11);
  };
  return q.integrate(outer, 1e-10);
}

}  // namespace

TEST_CASE("continuous harmonic functions") {
  // theta = pi/2: Im (x + iy)^(2n)
  CHECK(continuous_harmonic(1, M_PI / 2, 0.3, 0.7) == doctest::Approx(2 * 0.3 * 0.7).epsilon(1e-14));
  CHECK(continuous_harmonic(2, M_PI / 2, 0.3, 0.7) ==
        doctest::Approx(4 * 0.3 * 0.7 * (0.09 - 0.49)).epsilon(1e-13));
  // both sides of the wedge are nodal lines
  for (double th : {M_PI / 3, 2 * M_PI / 3})
    for (int n = 1; n <= 3; ++n) {
      CHECK(std::fabs(continuous_harmonic(n, th, 1.3, 0.0)) < 1e-14);
      CHECK(std::fabs(continuous_harmonic(n, th, 0.0, 1.3)) < 1e-12);
    }
}

TEST_CASE("closed-form Laplace transform matches quadrature") {
  for (double th : {M_PI / 2, 2 * M_PI / 3})
    for (int n = 1; n <= 3; ++n)
      for (auto [x, y] : {std::pair{1.0, 1.0}, std::pair{1.0, 2.0}, std::pair{2.5, 0.7}}) {
        CAPTURE(th);
        CAPTURE(n);
        CAPTURE(x);
        CAPTURE(y);
        double q = laplace_by_quadrature(n, th, x, y);
        CHECK(continuous_laplace(n, th, x, y) == doctest::Approx(q).epsilon(1e-7));
      }
  CHECK_THROWS_AS(continuous_laplace(1, M_PI / 2, 0.0, 0.0), Error);
}

TEST_CASE("window sum with tail bound") {
  // sum_{i,j>=1} ij e^{-i-j} = (e/(e-1)^2)^2
  HarmonicTable<double> t = table_from<double>(60, [](int i, int j) { return double(i * j); });
  LaplaceValue v = table_laplace(t, 1.0, 1.0, 2.0);
  double e = std::exp(1.0);
  double exact = std::pow(e / ((e - 1) * (e - 1)), 2);
  CHECK(v.value == doctest::Approx(exact).epsilon(1e-12));
  CHECK(v.tail >= exact - v.value);
  try {
    table_laplace(table_from<double>(5, [](int i, int j) { return double(i * j); }), 0.1, 0.1, 2.0);
    FAIL("tail accepted");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TailDominates);
  }
}

TEST_CASE("generating function route matches the window sum") {
  StepSet m = model("king");
  ConformalMap map = make_map(m);
  HarmonicTable<Rational> h = expand_harmonic<Rational>(m, map, HarmonicSpec::basis(1), 120);
  double g = generating_laplace(m, map, HarmonicSpec::basis(1), 0.5, 0.8);
  CHECK(table_laplace(h, 0.5, 0.8, 3.0).value == doctest::Approx(g).epsilon(1e-12));
}

TEST_CASE("scaling towards the continuous limit") {
  StepSet m = model("srw");
  ConformalMap map = make_map(m);
  ScalingReport r = scaling_convergence(m, map, 1, {{1, 1}, {1, 2}, {2, 1}}, {10, 50, 200});
  CHECK(r.monotone);
  CHECK(r.rows.back().spread < 1e-4);
  // h1 = -4ij against Im (x+iy)^2 = 2xy: the ratio tends to -2
  CHECK(r.c == doctest::Approx(-2.0).epsilon(1e-4));
  // antisymmetric h2 vanishes on the diagonal; that sample is skipped
  ScalingReport a = scaling_convergence(m, map, 2, {{1, 1}, {1, 2}}, {10});
  CHECK(std::isnan(a.rows[0].ratios[0]));
  CHECK(std::isfinite(a.rows[0].ratios[1]));
  ScalingOptions small;
  small.window = 100;
  CHECK_THROWS_AS(scaling_convergence(m, map, 1, {{1, 1}}, {50}, small), Error);
}
