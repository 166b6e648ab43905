#include <doctest.h>

#include <cmath>

#include "qharm/errors.hpp"
#include "qharm/kernel_curve.hpp"

using namespace qharm;

namespace {

StepSet model(const char* name) { return load_model_file(std::string(QHARM_MODELS_DIR) + "/" + name + ".model"); }
StepSet fixture(const char* name) {
  return load_model_file(std::string(QHARM_TEST_MODELS_DIR) + "/" + name + ".model", ValidateOptions{true});
}

}  // namespace

TEST_CASE("simple walk eta in closed form") {
  // cos(t) eta^2 - 2 eta + cos(t) = 0, root (1 - |sin t|)/cos t in [-1,1]
  StepSet m = model("srw");
  for (double t : {0.3, 1.0, 1.4, 2.0, 2.9}) {
    EtaSolution s = eta_at(m, t);
    CHECK(s.eta == doctest::Approx((1 - std::fabs(std::sin(t))) / std::cos(t)).epsilon(1e-13));
    CHECK(s.branch == 0);
  }
}

TEST_CASE("Kreweras positive root") {
  // K(ηs, η/s) = η^2 - (1 + 2η^3 cos t)/3
  StepSet m = model("kreweras");
  for (double t : {0.5, 1.5, 2.5}) {
    double eta = eta_at(m, t).eta;
    CHECK(eta > 0.0);
    CHECK(eta <= 1.0);
    CHECK(std::fabs(eta * eta - (1 + 2 * eta * eta * eta * std::cos(t)) / 3) < 1e-14);
  }
  // at t = pi the cubic is -(η+1)^2 (2η-1)
  CHECK(eta_at(m, M_PI).eta == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("curve is closed, simple and symmetric") {
  for (const char* n : {"srw", "king", "kreweras"}) {
    CurveSample c = trace_s1(model(n), 512);
    CHECK(c.points.size() == 512);
    CHECK(std::abs(c.points[0] - 1.0) < 1e-12);
    CHECK(self_intersections(c) == 0);
    CHECK(c.symmetry_residual < 1e-12);
    CHECK(winding_number(c, 0.3) == 1);
    CHECK(winding_number(c, 3.0) == 0);
    CHECK_FALSE(inside_s1(c, 1.0));
  }
}

TEST_CASE("corner angle matches the covariance angle") {
  for (const char* n : {"srw", "king", "kreweras"}) {
    StepSet m = model(n);
    CurveSample c = trace_s1(m, 4096);
    CHECK(std::fabs(corner_angle_estimate(c) - covariance_angle(m).theta) < 1e-3);
  }
  StepSet z2 = fixture("bipolar_z2");
  CHECK(std::fabs(corner_angle_estimate(trace_s1(z2, 4096)) - 2 * M_PI / 3) < 1e-3);
  CHECK_THROWS_AS(corner_angle_estimate(trace_s1(model("srw"), 32)), Error);
}

TEST_CASE("kernel has no zero with both coordinates inside") {
  for (const char* n : {"srw", "king", "kreweras"}) {
    StepSet m = model(n);
    KernelPoly k = kernel_poly(m);
    NoZeroReport r = no_zero_check(k, trace_s1(m, 512), 500, 7);
    CHECK(r.samples == 500);
    CHECK(r.min_abs_k > 0.0);
    NoZeroReport again = no_zero_check(k, trace_s1(m, 512), 500, 7);
    CHECK(again.min_abs_k == r.min_abs_k);
  }
}
