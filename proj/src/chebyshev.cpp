#include "qharm/chebyshev.hpp"

#include <cmath>

#include "qharm/errors.hpp"

namespace qharm {

double hyp2f1(double a, double b, double c, double z) {
  if (!(std::fabs(z) <= 1.0)) throw Error(ErrorCode::SeriesDivergence, "2F1 series needs |z| <= 1");
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < 2000000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (term == 0.0) break;
    // tail after the terms have turned monotone is bounded by term * z/(1-z)
    if (n > 8 && std::fabs(term) < 1e-17 * std::fabs(sum) * (1.0 - std::fabs(z) + 1e-300)) break;
  }
  return sum;
}

std::complex<double> chebyshev_T(double a, std::complex<double> x) {
  if (x.imag() == 0.0 && x.real() <= -1.0) {
    if (a == std::round(a)) return std::cos(a * std::acos(std::complex<double>(x.real(), 0.0)));
    throw Error(ErrorCode::BranchCut, "T_a evaluated on (-inf,-1]");
  }
  return std::cos(a * std::acos(x));
}

ChebyshevSeed chebyshev_seed(double a, double c) {
  if (!(c > -1.0 && c < 3.0)) throw Error(ErrorCode::BranchCut, "hypergeometric seed needs c in (-1,3)");
  double z = 0.5 * (1.0 - c);
  ChebyshevSeed s;
  s.value = hyp2f1(-a, a, 0.5, z);
  s.deriv = a * a * hyp2f1(1.0 - a, 1.0 + a, 1.5, z);
  return s;
}

Series1<double> chebyshev_taylor(double a, double c, int order) {
  if (!(c > -1.0)) throw Error(ErrorCode::BranchCut, "Taylor center must lie in (-1,inf)");
  Series1<double> t(order);
  if (std::fabs(c - 1.0) < 1e-12) {
    // at the regular point 1 the recurrence degenerates to first order
    t[0] = 1.0;
    for (int n = 0; n < order; ++n) t[n + 1] = (a * a - n * n) * t[n] / ((n + 1.0) * (2.0 * n + 1.0));
    return t;
  }
  double v, d;
  if (c < 3.0) {
    ChebyshevSeed s = chebyshev_seed(a, c);
    v = s.value;
    d = s.deriv;
  } else {
    double ac = std::acosh(c);
    v = std::cosh(a * ac);
    d = a * std::sinh(a * ac) / std::sinh(ac);
  }
  t[0] = v;
  if (order >= 1) t[1] = d;
  double q = 1.0 - c * c;
  for (int n = 0; n + 2 <= order; ++n)
    t[n + 2] = (c * (n + 1) * (2 * n + 1) * t[n + 1] + (n * n - a * a) * t[n]) / (q * (n + 2) * (n + 1));
  return t;
}

}  // namespace qharm
