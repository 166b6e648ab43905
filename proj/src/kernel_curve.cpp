#include "qharm/kernel_curve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qharm/errors.hpp"
#include "qharm/parallel.hpp"

namespace qharm {

namespace {

struct SliceFn {
  std::vector<std::pair<int, double>> terms;  // (eta power, weight * cos(m t))
  double operator()(double eta) const {
    double acc = 0.0;
    for (auto [d, w] : terms) acc += w * std::pow(eta, d);
    return acc;
  }
  double deriv(double eta) const {
    double acc = 0.0;
    for (auto [d, w] : terms)
      if (d > 0) acc += w * d * std::pow(eta, d - 1);
    return acc;
  }
};

SliceFn make_slice(const std::vector<KernelPoly::TorusTerm>& src, double t) {
  SliceFn f;
  for (const auto& term : src) f.terms.emplace_back(term.eta_power, term.weight.get_d() * std::cos(term.freq * t));
  return f;
}

// f(lo) < 0 <= f(hi) is assumed.
double bracket_solve(const SliceFn& f, double lo, double hi, const EtaOptions& opt) {
  while (hi - lo > opt.bisect_tol) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    double fx = f(x), dx = f.deriv(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) lo = x;
    else hi = x;
    double nx = dx != 0.0 ? x - fx / dx : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    double step = std::fabs(nx - x);
    x = nx;
    if (step < opt.newton_tol || hi - lo < opt.newton_tol) break;
  }
  return x;
}

double wrap_angle(double t) {
  double r = std::fmod(t, 2.0 * M_PI);
  if (r < 0) r += 2.0 * M_PI;
  return r;
}

}  // namespace

EtaSolution eta_at(const KernelPoly& k, double t, const EtaOptions& opt) {
  EtaSolution s;
  s.t = t;
  double tw = wrap_angle(t);
  double dist0 = std::min(tw, 2.0 * M_PI - tw);
  bool zero_p11 = sgn(k.p11) == 0;
  s.branch = zero_p11 ? 0 : 1;
  SliceFn full = make_slice(k.torus, t);
  auto finish = [&](double eta) {
    s.eta = eta;
    s.residual = std::fabs(full(eta));
    return s;
  };
  if (dist0 == 0.0) return finish(1.0);

  if (!zero_p11) {
    double f1 = full(1.0);
    if (f1 <= 0.0) {
      // colliding roots near t = 0, or eta = 1 is itself a root
      if (dist0 < opt.exclusion_radius || std::fabs(f1) < 1e-14) return finish(1.0);
      throw Error(ErrorCode::RootNotBracketed, "slice is negative at eta = 1");
    }
    if (!(full(0.0) < 0.0)) throw Error(ErrorCode::RootNotBracketed, "slice is nonnegative at eta = 0");
    return finish(bracket_solve(full, 0.0, 1.0, opt));
  }

  double distpi = std::fabs(tw - M_PI);
  if (distpi == 0.0) return finish(-1.0);
  SliceFn red = make_slice(k.reduced, t);
  double g1 = red(1.0), gm1 = red(-1.0);
  if (g1 <= 0.0) {
    if (dist0 < opt.exclusion_radius || std::fabs(g1) < 1e-14) return finish(1.0);
    throw Error(ErrorCode::RootNotBracketed, "reduced slice is negative at eta = 1");
  }
  if (gm1 >= 0.0) {
    if (distpi < opt.exclusion_radius || std::fabs(gm1) < 1e-14) return finish(-1.0);
    throw Error(ErrorCode::RootNotBracketed, "reduced slice is positive at eta = -1");
  }
  return finish(bracket_solve(red, -1.0, 1.0, opt));
}

EtaSolution eta_at(const StepSet& m, double t, const EtaOptions& opt) {
  return eta_at(kernel_poly(m), t, opt);
}

CurveSample trace_s1(const KernelPoly& k, int n_points, const EtaOptions& opt) {
  if (n_points < 16) throw Error(ErrorCode::InsufficientResolution, "trace_s1 needs at least 16 points");
  CurveSample c;
  c.half_period = sgn(k.p11) == 0;
  double span = c.half_period ? M_PI : 2.0 * M_PI;
  size_t n = static_cast<size_t>(n_points);
  c.t.resize(n);
  c.points.resize(n);
  std::vector<double> res(n);
  parallel_for(n, [&](size_t i) {
    double t = span * static_cast<double>(i) / static_cast<double>(n);
    EtaSolution e = eta_at(k, t, opt);
    c.t[i] = t;
    c.points[i] = e.eta * cplx(std::cos(t), std::sin(t));
    res[i] = e.residual;
  });
  c.max_eta_residual = *std::max_element(res.begin(), res.end());
  for (size_t i = 1; i < n; ++i)
    c.symmetry_residual = std::max(c.symmetry_residual, std::abs(c.points[i] - std::conj(c.points[n - i])));
  c.symmetry_residual = std::max(c.symmetry_residual, std::fabs(c.points[0].imag()));
  return c;
}

CurveSample trace_s1(const StepSet& m, int n_points, const EtaOptions& opt) {
  return trace_s1(kernel_poly(m), n_points, opt);
}

namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(cplx p1, cplx p2, cplx q1, cplx q2) {
  double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

int self_intersections(const CurveSample& c) {
  size_t n = c.points.size();
  int count = 0;
  for (size_t i = 0; i < n; ++i) {
    cplx a = c.points[i], b = c.points[(i + 1) % n];
    for (size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, c.points[j], c.points[(j + 1) % n])) ++count;
    }
  }
  return count;
}

double corner_angle_estimate(const CurveSample& c) {
  size_t n = c.points.size();
  if (n < 64) throw Error(ErrorCode::InsufficientResolution, "corner estimate needs at least 64 samples");
  auto dir = [&](size_t i) { return std::arg(c.points[i] - 1.0); };
  auto rich = [](double a1, double a2, double a4) { return (8.0 * a1 - 6.0 * a2 + a4) / 3.0; };
  if (std::abs(c.points[4] - 1.0) > 0.25 || std::abs(c.points[n - 4] - 1.0) > 0.25)
    throw Error(ErrorCode::InsufficientResolution, "grid too coarse near t = 0");
  double up = rich(dir(1), dir(2), dir(4));
  auto low_dir = [&](size_t i) {
    double a = dir(n - i);
    return a < 0 ? a + 2.0 * M_PI : a;
  };
  double low = rich(low_dir(1), low_dir(2), low_dir(4));
  return low - up;
}

int winding_number(const CurveSample& c, cplx z) {
  int wn = 0;
  size_t n = c.points.size();
  for (size_t i = 0; i < n; ++i) {
    cplx a = c.points[i], b = c.points[(i + 1) % n];
    if (a.imag() <= z.imag()) {
      if (b.imag() > z.imag() && cross(b - a, z - a) > 0) ++wn;
    } else if (b.imag() <= z.imag() && cross(b - a, z - a) < 0) {
      --wn;
    }
  }
  return wn;
}

bool inside_s1(const CurveSample& c, cplx z, double corner_exclusion) {
  if (std::abs(z - 1.0) < corner_exclusion) return false;
  return winding_number(c, z) != 0;
}

NoZeroReport no_zero_check(const KernelPoly& k, const CurveSample& c, int n_samples, std::uint64_t seed) {
  double xmin = 1e300, xmax = -1e300, ymax = 0.0;
  for (auto p : c.points) {
    xmin = std::min(xmin, p.real());
    xmax = std::max(xmax, p.real());
    ymax = std::max(ymax, std::fabs(p.imag()));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(xmin, xmax), uy(-ymax, ymax);
  NoZeroReport r;
  r.min_abs_k = 1e300;
  auto draw = [&]() {
    for (;;) {
      cplx z(ux(rng), uy(rng));
      if (inside_s1(c, z)) return z;
      ++r.rejected;
    }
  };
  for (int s = 0; s < n_samples; ++s) {
    cplx x = draw(), y = draw();
    double v = std::abs(k.eval(x, y));
    if (v < r.min_abs_k) {
      r.min_abs_k = v;
      r.argmin_x = x;
      r.argmin_y = y;
    }
    ++r.samples;
  }
  return r;
}

}  // namespace qharm
