#ifndef QHARM_KERNEL_CURVE_HPP
#define QHARM_KERNEL_CURVE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "qharm/walk_model.hpp"

namespace qharm {

using cplx = std::complex<double>;

struct EtaOptions {
  double exclusion_radius = 1e-4;
  double bisect_tol = 1e-6;
  double newton_tol = 1e-15;
};

struct EtaSolution {
  double t = 0.0;
  double eta = 0.0;
  double residual = 0.0;  // |K(eta e^{it}, eta e^{-it})|
  int branch = 1;         // 0: unique root (p11 = 0); 1: positive root eta_1
};

// Root of the torus slice of K. For p11 != 0 the positive root in (0,1];
// for p11 = 0 the unique root of the reduced slice in [-1,1].
EtaSolution eta_at(const KernelPoly& k, double t, const EtaOptions& opt = {});
EtaSolution eta_at(const StepSet& m, double t, const EtaOptions& opt = {});

struct CurveSample {
  std::vector<double> t;
  std::vector<cplx> points;
  bool closed = true;
  bool half_period = false;  // grid over [0,pi) (p11 = 0) instead of [0,2pi)
  double symmetry_residual = 0.0;
  double max_eta_residual = 0.0;
};

// Counterclockwise samples of S1 on a uniform grid starting at t = 0 (x = 1).
CurveSample trace_s1(const KernelPoly& k, int n_points, const EtaOptions& opt = {});
CurveSample trace_s1(const StepSet& m, int n_points, const EtaOptions& opt = {});

// Number of crossing pairs among non-adjacent edges of the closed polygon.
int self_intersections(const CurveSample& c);

// Interior angle at 1 from one-sided secants at h, 2h, 4h with Richardson
// extrapolation.
double corner_angle_estimate(const CurveSample& c);

// Winding number of the closed polygon around z.
int winding_number(const CurveSample& c, cplx z);
bool inside_s1(const CurveSample& c, cplx z, double corner_exclusion = 1e-6);

struct NoZeroReport {
  double min_abs_k = 0.0;
  cplx argmin_x, argmin_y;
  int samples = 0;
  int rejected = 0;
};

NoZeroReport no_zero_check(const KernelPoly& k, const CurveSample& c, int n_samples,
                           std::uint64_t seed = 12345);

}  // namespace qharm

#endif
