#include "qharm/conformal_maps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "qharm/chebyshev.hpp"
#include "qharm/errors.hpp"

namespace qharm {

const char* to_string(Backend b) {
  switch (b) {
    case Backend::ExplicitRational: return "explicit";
    case Backend::SmallStepChebyshev: return "smallstep";
    case Backend::BipolarFamily: return "bipolar";
    case Backend::FittedNumeric: return "fit";
  }
  return "?";
}

Backend parse_backend(const std::string& s) {
  if (s == "explicit") return Backend::ExplicitRational;
  if (s == "smallstep") return Backend::SmallStepChebyshev;
  if (s == "bipolar") return Backend::BipolarFamily;
  if (s == "fit") return Backend::FittedNumeric;
  throw Error(ErrorCode::ParseError, "unknown backend '" + s + "'");
}

namespace {

using Poly = std::vector<Rational>;

void trim(Poly& p) {
  while (p.size() > 1 && sgn(p.back()) == 0) p.pop_back();
}

Poly mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, Rational(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly sub(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rational(0));
  for (size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim(a);
  return a;
}

// p = (x - 1) q + rem
Poly div_x_minus_1(const Poly& p, Rational& rem) {
  size_t n = p.size();
  if (n < 2) {
    rem = n ? p[0] : Rational(0);
    return Poly{Rational(0)};
  }
  Poly q(n - 1);
  Rational carry = 0;
  for (size_t i = n - 1; i >= 1; --i) {
    carry = p[i] + carry;
    q[i - 1] = carry;
    if (i == 1) break;
  }
  rem = p[0] + carry;
  return q;
}

template <class T>
T poly_eval(const Poly& p, const T& x) {
  T acc = T(0);
  for (size_t i = p.size(); i-- > 0;) acc = acc * x + T(p[i].get_d());
  return acc;
}

Rational poly_eval_exact(const Poly& p, const Rational& x) {
  Rational acc = 0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

template <class T>
Series1<T> poly_series(const Poly& p, int order) {
  Series1<T> s(order);
  for (size_t i = 0; i < p.size() && static_cast<int>(i) <= order; ++i) s[static_cast<int>(i)] = ScalarTraits<T>::from(p[i]);
  return s;
}

bool same_steps(const StepSet& m, const RawWeights& w) {
  std::map<Jump, Rational> ref;
  for (const auto& [j, p] : w) ref[j] = p;
  return ref == m.steps;
}

RawWeights srw_weights() {
  Rational q(1, 4);
  return {{{1, 0}, q}, {{0, 1}, q}, {{-1, 0}, q}, {{0, -1}, q}};
}

RawWeights king_weights() {
  RawWeights w;
  for (int k = -1; k <= 1; ++k)
    for (int l = -1; l <= 1; ++l)
      if (k || l) w.push_back({{k, l}, Rational(1, 8)});
  return w;
}

}  // namespace

// ---------------------------------------------------------------- explicit

ConformalMap explicit_map(const StepSet& m) {
  ConformalMap map;
  map.backend_ = Backend::ExplicitRational;
  map.p11_ = m.p11();
  map.exact_ = true;
  map.pi_over_theta_ = covariance_angle(m).pi_over_theta;
  if (same_steps(m, srw_weights())) map.explicit_name_ = "srw";
  else if (same_steps(m, king_weights())) {
    map.explicit_name_ = "king";
    map.scalar_ = 1.0 / 8.0;  // (x^2+4x+1)/(1-x)^2 scaled so psi1(0) = 1/8
  } else {
    throw Error(ErrorCode::BackendUnavailable, "explicit maps exist only for the simple and king walks");
  }
  return map;
}

// -------------------------------------------------------------- small step

SmallStepConstants smallstep_constants(const StepSet& m) {
  if (!m.small_steps()) throw Error(ErrorCode::NotSmallStep, "a jump leaves {-1,0,1}^2");
  SmallStepConstants s;
  s.a = {-m.p(1, -1), -m.p(0, -1), -m.p(-1, -1)};
  s.b = {-m.p(1, 0), 1 - m.p(0, 0), -m.p(-1, 0)};
  s.c = {-m.p(1, 1), -m.p(0, 1), -m.p(-1, 1)};
  Poly four_ac = mul(s.a, s.c);
  for (auto& v : four_ac) v *= 4;
  s.d = sub(mul(s.b, s.b), four_ac);
  Rational r1, r2;
  Poly q = div_x_minus_1(s.d, r1);
  q = div_x_minus_1(q, r2);
  if (sgn(r1) != 0 || sgn(r2) != 0)
    throw Error(ErrorCode::NotSmallStep, "discriminant lacks a double root at 1");
  trim(q);
  s.q = q;
  s.theta = covariance_angle(m).theta;
  s.rho_unif = std::polar(1.0, -s.theta);
  if (q.size() == 3) {
    double al = q[2].get_d(), be = q[1].get_d(), ga = q[0].get_d();
    double disc = be * be - 4.0 * al * ga;
    if (disc < 0) throw Error(ErrorCode::NotSmallStep, "branch points are not real");
    double big = (-be - std::copysign(std::sqrt(disc), be)) / (2.0 * al);
    double small = ga / (al * big);
    if (std::fabs(big) < std::fabs(small)) std::swap(big, small);
    s.x1 = small;
    s.x4 = big;
    double w = s.x4 - s.x1;
    s.mu0 = 2.0 * (2.0 - s.x1 - s.x4) / w;
    s.mu1 = 2.0 * (s.x1 + s.x4 - 2.0 * s.x1 * s.x4) / w;
    s.s0 = (2.0 - (s.x1 + s.x4) + 2.0 * std::sqrt(cplx((1 - s.x1) * (1 - s.x4)))) / w;
    s.s1 = (s.x1 + s.x4 - 2.0 * s.x1 * s.x4 + 2.0 * std::sqrt(cplx(s.x1 * s.x4 * (1 - s.x1) * (1 - s.x4)))) / w;
  } else if (q.size() == 2) {
    s.x1 = -q[0].get_d() / q[1].get_d();
    s.x4 = std::numeric_limits<double>::infinity();
    s.x4_infinite = true;
    s.mu0 = -2.0;
    s.mu1 = 2.0 * (1.0 - 2.0 * s.x1);
    s.s0 = -1.0;
    s.s1 = (1.0 - 2.0 * s.x1) + 2.0 * std::sqrt(cplx(s.x1 * (s.x1 - 1.0)));
  } else {
    throw Error(ErrorCode::NotSmallStep, "degenerate discriminant");
  }
  if (!(s.x1 >= -1.0 && s.x1 < 1.0))
    throw Error(ErrorCode::NotSmallStep, "branch point x1 outside [-1,1)");
  return s;
}

namespace {

// Taylor coefficients of f, analytic on the unit disc with growth at most a pole at 1:
// coefficient n from a trapezoid rule on the circle of radius about 1 - 2/(n+2).
Series1<double> cauchy_coefficients(const std::function<cplx(cplx)>& f, int order) {
  Series1<double> out(order);
  int kmax = 1;
  while (std::ldexp(1.0, -kmax) > 2.0 / (order + 2)) ++kmax;
  std::vector<std::vector<int>> by_ring(static_cast<size_t>(kmax) + 1);
  for (int n = 0; n <= order; ++n) {
    int k = 1;
    while (k < kmax && std::ldexp(1.0, -(k + 1)) >= 2.0 / (n + 2)) ++k;
    by_ring[static_cast<size_t>(k)].push_back(n);
  }
  for (int k = 1; k <= kmax; ++k) {
    const auto& ns = by_ring[static_cast<size_t>(k)];
    if (ns.empty()) continue;
    double r = 1.0 - std::ldexp(1.0, -k);
    // aliasing falls off like r^M
    int M = 256;
    while (M * std::ldexp(1.0, -k) < 48.0) M *= 2;
    std::vector<cplx> vals(static_cast<size_t>(M)), roots(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) {
      roots[static_cast<size_t>(j)] = std::polar(1.0, -2.0 * M_PI * j / M);
      vals[static_cast<size_t>(j)] = f(r * std::conj(roots[static_cast<size_t>(j)]));
    }
    for (int n : ns) {
      cplx acc = 0.0;
      for (int j = 0; j < M; ++j) acc += vals[static_cast<size_t>(j)] * roots[static_cast<size_t>((static_cast<long>(j) * n) % M)];
      out[n] = acc.real() / M / std::pow(r, n);
    }
  }
  return out;
}

cplx smallstep_raw(const SmallStepConstants& s, double a, cplx x) {
  cplx mu = (s.mu0 * x - s.mu1) / (2.0 * (x - 1.0));
  return 2.0 * chebyshev_T(a, mu);
}

}  // namespace

ConformalMap smallstep_map(const StepSet& m) {
  ConformalMap map;
  map.backend_ = Backend::SmallStepChebyshev;
  map.p11_ = m.p11();
  map.exact_ = false;
  map.small_ = smallstep_constants(m);
  map.pi_over_theta_ = M_PI / map.small_->theta;
  const SmallStepConstants& s = *map.small_;
  if (sgn(map.p11_) != 0) {
    map.scalar_ = map.p11_.get_d() / smallstep_raw(s, map.pi_over_theta_, 0.0).real();
  } else {
    // psi1'(0) = 1: d/dx 2 T_a(mu(x)) at 0 is 2 T_a'(mu1/2) (mu1 - mu0)/2
    double d = chebyshev_taylor(map.pi_over_theta_, 0.5 * s.mu1, 1)[1];
    map.scalar_ = 1.0 / (d * (s.mu1 - s.mu0));
  }
  return map;
}

// ----------------------------------------------------------------- bipolar

BipolarConstants bipolar_constants(const StepSet& m) {
  BipolarConstants b;
  b.z = m.p11();
  if (sgn(b.z) == 0) throw Error(ErrorCode::NotBipolarFamily, "p(1,1) must be positive");
  for (const auto& [j, w] : m.steps) {
    if (j == Jump{1, 1}) continue;
    if (j.first > 0 || j.second > 0) throw Error(ErrorCode::NotBipolarFamily, "jump with a positive coordinate besides (1,1)");
    int r = -(j.first + j.second);
    auto it = b.zr.find(r);
    if (it == b.zr.end()) b.zr[r] = w;
    else if (it->second != w) throw Error(ErrorCode::NotBipolarFamily, "weights differ within a level k + l = -r");
  }
  for (const auto& [r, w] : b.zr)
    for (int k = -r; k <= 0; ++k)
      if (m.p(k, -r - k) != w) throw Error(ErrorCode::NotBipolarFamily, "incomplete level k + l = -r");
  Rational mass = b.z, drift = 0;
  for (const auto& [r, w] : b.zr) {
    mass += (r + 1) * w;
    drift += w * (r * (r + 1) / 2);
  }
  if (mass != 1 || drift != b.z) throw Error(ErrorCode::NotBipolarFamily, "weights violate the family constraints");

  int top = b.zr.empty() ? 2 : std::max(2, b.zr.rbegin()->first + 2);
  b.x_i0.assign(static_cast<size_t>(top) + 1, Rational(0));
  b.k_diag.assign(static_cast<size_t>(top) + 1, Rational(0));
  b.x_i0[0] = b.z;
  b.x_i0[2] += 1;
  b.k_diag[0] = -b.z;
  b.k_diag[2] += 1;
  for (const auto& [r, w] : b.zr) {
    b.x_i0[static_cast<size_t>(r + 2)] -= w;
    b.k_diag[static_cast<size_t>(r + 2)] -= (r + 1) * w;
  }

  // t: the root of x^2 I0'(x) in [-1, 0); Q(0) = -z < 0.
  Rational qm1 = poly_eval_exact(b.k_diag, Rational(-1));
  if (sgn(qm1) == 0) {
    b.t_exact = Rational(-1);
    b.t = -1.0;
  } else if (sgn(qm1) > 0) {
    double lo = -1.0, hi = 0.0;
    auto f = [&](double x) { return poly_eval<double>(b.k_diag, x); };
    while (hi - lo > 1e-6) {
      double mid = 0.5 * (lo + hi);
      (f(mid) > 0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    Poly dq(b.k_diag.size() - 1);
    for (size_t i = 1; i < b.k_diag.size(); ++i) dq[i - 1] = b.k_diag[i] * static_cast<long>(i);
    for (int it = 0; it < 50; ++it) {
      double step = f(x) / poly_eval<double>(dq, x);
      x -= step;
      if (std::fabs(step) < 1e-16) break;
    }
    b.t = x;
    Rational guess = rationalize(x, 1000000);
    if (sgn(poly_eval_exact(b.k_diag, guess)) == 0) {
      b.t_exact = guess;
      b.t = guess.get_d();
    }
  } else {
    throw Error(ErrorCode::NoInteriorCriticalPoint, "x^2 I0'(x) has no sign change on [-1,0]");
  }
  b.b_exact = 0;
  for (const auto& c : b.x_i0) b.b_exact += c;
  b.b_val = b.b_exact.get_d();
  if (b.t_exact) {
    b.a_exact = poly_eval_exact(b.x_i0, *b.t_exact) / *b.t_exact;
    b.a_val = b.a_exact->get_d();
  } else {
    b.a_val = poly_eval<double>(b.x_i0, b.t) / b.t;
  }
  if (!(b.a_val < 0 && b.b_val > 0)) throw Error(ErrorCode::NotBipolarFamily, "expected I0(t) < 0 < I0(1)");
  return b;
}

ConformalMap bipolar_map(const StepSet& m) {
  ConformalMap map;
  map.backend_ = Backend::BipolarFamily;
  map.p11_ = m.p11();
  map.bip_ = bipolar_constants(m);
  map.exact_ = map.bip_->t_exact.has_value();
  map.pi_over_theta_ = covariance_angle(m).pi_over_theta;
  return map;
}

// -------------------------------------------------------------- fitted map

// psi1 = scalar * (x - xl) (1 - x)^(-alpha) exp(v(x)), xl the left real point of
// the curve and v a real polynomial in an Arnoldi basis on the samples.
struct FitState {
  double xl = 0.0;
  double alpha = 2.0;
  double beta = 1.0;  // exponent at xl: pi/theta when x -> -x preserves the kernel
  int degree = 0;
  Eigen::MatrixXcd H;  // (degree+1) x degree Hessenberg from Arnoldi
  Eigen::VectorXcd coef;

  cplx v(cplx z) const {
    std::vector<cplx> q(static_cast<size_t>(degree) + 1);
    q[0] = 1.0;
    cplx acc = coef(0);
    for (int k = 0; k < degree; ++k) {
      cplx t = z * q[k];
      for (int j = 0; j <= k; ++j) t -= H(j, k) * q[j];
      q[k + 1] = t / H(k + 1, k);
      acc += coef(k + 1) * q[k + 1];
    }
    return acc;
  }

  cplx raw(cplx z) const {
    return std::exp(beta * std::log(z - xl) - alpha * std::log(1.0 - z) + v(z));
  }

  // Taylor coefficients of v at 0 by running the Arnoldi recurrence on series
  std::vector<double> v_taylor(int order) const {
    size_t n = static_cast<size_t>(order) + 1;
    std::vector<std::vector<cplx>> q(static_cast<size_t>(degree) + 1, std::vector<cplx>(n, 0.0));
    q[0][0] = 1.0;
    std::vector<cplx> acc(n, 0.0);
    acc[0] = coef(0);
    for (int k = 0; k < degree; ++k) {
      for (size_t i = 0; i < n; ++i) {
        cplx t = i ? q[k][i - 1] : 0.0;
        for (int j = 0; j <= k; ++j) t -= H(j, k) * q[j][i];
        q[k + 1][i] = t / H(k + 1, k);
        acc[i] += coef(k + 1) * q[k + 1][i];
      }
    }
    std::vector<double> r(n);
    for (size_t i = 0; i < n; ++i) r[i] = acc[i].real();
    return r;
  }

  Series1<double> raw_series(int order) const {
    std::vector<double> vt = v_taylor(order);
    Series1<double> e(order);
    e[0] = std::exp(vt[0]);
    for (int n = 1; n <= order; ++n) {
      double acc = 0.0;
      for (int k = 1; k <= n; ++k) acc += k * vt[static_cast<size_t>(k)] * e[n - k];
      e[n] = acc / n;
    }
    Series1<double> corner(order), lin(order);
    corner[0] = 1.0;
    for (int n = 1; n <= order; ++n) corner[n] = corner[n - 1] * (alpha + n - 1) / n;
    if (xl == 0.0) {
      for (int n = order; n >= 1; --n) corner[n] = corner[n - 1];
      corner[0] = 0.0;
      return corner * e;
    }
    // (x - xl)^beta = (-xl)^beta (1 - x/xl)^beta for xl < 0
    lin[0] = std::pow(-xl, beta);
    for (int n = 1; n <= order; ++n) lin[n] = lin[n - 1] * (beta - n + 1) / n / xl * -1.0;
    return lin * corner * e;
  }
};

namespace {

bool even_lattice(const StepSet& m) {
  for (const auto& [j, w] : m.steps)
    if ((j.first + j.second) % 2 != 0) return false;
  return true;
}

std::shared_ptr<FitState> fit_degree(const std::vector<cplx>& pts, double xl, double alpha, double beta, int M,
                                     double& residual, double& rms) {
  auto st = std::make_shared<FitState>();
  st->alpha = alpha;
  st->beta = beta;
  st->degree = M;
  st->xl = xl;
  int npts = static_cast<int>(pts.size());
  Eigen::VectorXcd Z(npts);
  for (int j = 0; j < npts; ++j) Z(j) = pts[static_cast<size_t>(j)];
  Eigen::MatrixXcd Q(npts, M + 1);
  st->H = Eigen::MatrixXcd::Zero(M + 1, M);
  Q.col(0).setOnes();
  double sm = std::sqrt(static_cast<double>(npts));
  for (int k = 0; k < M; ++k) {
    Eigen::VectorXcd t = Z.cwiseProduct(Q.col(k));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) {
        cplx h = Q.col(j).dot(t) / static_cast<double>(npts);
        st->H(j, k) += h;
        t -= h * Q.col(j);
      }
    st->H(k + 1, k) = t.norm() / sm;
    Q.col(k + 1) = t / st->H(k + 1, k);
  }
  // Im v = sign(Im x) pi/2 - beta arg(x - xl) + alpha arg(1 - x) puts psi1 on the imaginary axis
  Eigen::VectorXd target(npts);
  for (int j = 0; j < npts; ++j) {
    cplx z = Z(j);
    target(j) = std::copysign(M_PI / 2, z.imag()) - beta * std::arg(z - xl) + alpha * std::arg(1.0 - z);
  }
  Eigen::MatrixXd A(npts, 2 * (M + 1));
  A.leftCols(M + 1) = Q.imag();
  A.rightCols(M + 1) = Q.real();
  Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(target);
  st->coef = Eigen::VectorXcd(M + 1);
  for (int k = 0; k <= M; ++k) st->coef(k) = cplx(sol(k), sol(M + 1 + k));
  st->coef(0) = cplx(0.0, st->coef(0).imag());
  residual = 0.0;
  rms = 0.0;
  for (int j = 0; j < npts; ++j) {
    double e = std::fabs(st->v(Z(j)).imag() - target(j));
    residual = std::max(residual, e);
    rms += e * e;
  }
  rms = std::sqrt(rms / npts);
  return st;
}

}  // namespace

ConformalMap fit_conformal_numeric(const StepSet& m, const CurveSample& c, int order, const FitOptions& opt) {
  ConformalMap map;
  map.backend_ = Backend::FittedNumeric;
  map.p11_ = m.p11();
  map.exact_ = false;
  map.pi_over_theta_ = covariance_angle(m).pi_over_theta;
  bool zero_p11 = sgn(map.p11_) == 0;

  std::vector<cplx> pts;
  for (cplx p : c.points)
    if (std::fabs(p.imag()) > 1e-12) pts.push_back(p);
  int npts = static_cast<int>(pts.size());
  if (npts < 4 * std::max(order, 1))
    throw Error(ErrorCode::InsufficientResolution, "fit needs at least 4 off-axis curve samples per coefficient");

  double xl = zero_p11 ? 0.0 : -eta_at(m, M_PI).eta;
  double beta = (!zero_p11 && even_lattice(m)) ? map.pi_over_theta_ : 1.0;
  std::vector<int> ladder;
  if (opt.fit_degree > 0) ladder = {opt.fit_degree};
  else
    for (int d : {8, 12, 16, 24, 32, 48, 64, 96, 128})
      if (4 * d <= npts) ladder.push_back(d);
  if (ladder.empty() || 4 * ladder.front() > npts)
    throw Error(ErrorCode::InsufficientResolution, "fit needs at least 4 off-axis curve samples per degree");

  std::shared_ptr<FitState> best;
  double best_res = 1e300, best_rms = 1e300;
  for (int d : ladder) {
    double res = 0.0, rms = 0.0;
    auto st = fit_degree(pts, xl, map.pi_over_theta_, beta, d, res, rms);
    // a rung that does not halve the rms residual is fitting noise; keep the previous one
    if (best && rms > 0.5 * best_rms) break;
    best = st;
    best_res = res;
    best_rms = rms;
    if (res <= opt.target_residual) break;
  }

  FitReport rep;
  rep.degree = best->degree;
  rep.samples = npts;
  rep.left_point = xl;
  rep.boundary_residual = best_res;
  Series1<double> r1 = best->raw_series(1);
  map.scalar_ = zero_p11 ? 1.0 / r1[1] : map.p11_.get_d() / r1[0];
  map.fit_ = rep;
  map.fit_state_ = best;
  if (best_res > opt.residual_threshold)
    throw Error(ErrorCode::IllConditioned, "boundary residual " + std::to_string(best_res) + " above threshold");
  return map;
}

// ------------------------------------------------------------------ common

Series1<Rational> ConformalMap::series_exact(int order) const {
  if (!exact_) throw Error(ErrorCode::BackendUnavailable, std::string("backend ") + to_string(backend_) + " has no exact series");
  if (backend_ == Backend::ExplicitRational) {
    Series1<Rational> s(order);
    if (explicit_name_ == "srw") {
      for (int n = 0; n <= order; ++n) s[n] = n;
    } else {
      s[0] = Rational(1, 8);
      for (int n = 1; n <= order; ++n) s[n] = ratio(3 * n, 4);
    }
    return s;
  }
  const BipolarConstants& b = *bip_;
  Series1<Rational> xi0 = poly_series<Rational>(b.x_i0, order);
  Series1<Rational> x = Series1<Rational>::variable(order);
  Series1<Rational> num = xi0 - (*b.a_exact) * x;
  Series1<Rational> den = xi0 - b.b_exact * x;
  return b.z * sqrt(div_unit(num, den));
}

Series1<double> ConformalMap::series_float(int order) const {
  if (exact_) return series_exact(order).convert<double>();
  if (backend_ == Backend::SmallStepChebyshev) {
    // Composing the Taylor series of T_a with mu(x) cancels exponentially (the second
    // Chebyshev solution is singular at x1), so take Cauchy integrals of the closed form.
    Series1<double> r = cauchy_coefficients([&](cplx x) { return eval(x); }, order);
    if (sgn(p11_) == 0) r[0] = 0.0;
    return r;
  }
  if (backend_ == Backend::BipolarFamily) {
    const BipolarConstants& b = *bip_;
    Series1<double> xi0 = poly_series<double>(b.x_i0, order);
    Series1<double> x = Series1<double>::variable(order);
    Series1<double> num = xi0 - b.a_val * x;
    Series1<double> den = xi0 - b.b_val * x;
    return b.z.get_d() * sqrt(div_unit(num, den));
  }
  Series1<double> r = scalar_ * fit_state_->raw_series(order);
  if (sgn(p11_) == 0) r[0] = 0.0;
  return r;
}

cplx ConformalMap::eval(cplx x) const {
  switch (backend_) {
    case Backend::ExplicitRational:
      if (explicit_name_ == "srw") return x / ((1.0 - x) * (1.0 - x));
      return scalar_ * (x * x + 4.0 * x + 1.0) / ((1.0 - x) * (1.0 - x));
    case Backend::SmallStepChebyshev:
      return scalar_ * smallstep_raw(*small_, pi_over_theta_, x);
    case Backend::BipolarFamily: {
      const BipolarConstants& b = *bip_;
      cplx xi0 = poly_eval<cplx>(b.x_i0, x);
      return b.z.get_d() * std::sqrt((xi0 - b.a_val * x) / (xi0 - b.b_val * x));
    }
    case Backend::FittedNumeric:
      return scalar_ * fit_state_->raw(x);
  }
  return 0.0;
}

ConformalMap make_map(const StepSet& m, std::optional<Backend> prefer, int fit_order) {
  auto fit = [&] {
    CurveSample c = trace_s1(m, std::max(1024, 8 * fit_order));
    return fit_conformal_numeric(m, c, fit_order);
  };
  if (prefer) {
    switch (*prefer) {
      case Backend::ExplicitRational: return explicit_map(m);
      case Backend::SmallStepChebyshev: return smallstep_map(m);
      case Backend::BipolarFamily: return bipolar_map(m);
      case Backend::FittedNumeric: return fit();
    }
  }
  try {
    return explicit_map(m);
  } catch (const Error&) {
  }
  try {
    ConformalMap b = bipolar_map(m);
    if (b.exact() || !m.small_steps()) return b;
  } catch (const Error&) {
  }
  if (m.small_steps()) return smallstep_map(m);
  return fit();
}

namespace {

double distance_to_polygon(const CurveSample& c, cplx z) {
  double best = 1e300;
  size_t n = c.points.size();
  for (size_t i = 0; i < n; ++i) {
    cplx a = c.points[i], b = c.points[(i + 1) % n];
    cplx ab = b - a;
    double len2 = std::norm(ab);
    double t = len2 > 0 ? std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::abs(z - (a + t * ab)));
  }
  return best;
}

}  // namespace

cplx psi1_eval(const ConformalMap& map, const CurveSample& c, cplx x) {
  if (std::abs(x - 1.0) < 1e-12 || (!inside_s1(c, x, 0.0) && distance_to_polygon(c, x) > 1e-12))
    throw Error(ErrorCode::OutsideDomain, "point is not inside S1");
  return map.eval(x);
}

}  // namespace qharm
