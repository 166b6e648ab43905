#ifndef QHARM_CHEBYSHEV_HPP
#define QHARM_CHEBYSHEV_HPP

#include <complex>

#include "qharm/series.hpp"

namespace qharm {

// Gauss 2F1(a,b;c;z) by its defining series, |z| < 1 (z = 1 allowed when c-a-b > 0).
double hyp2f1(double a, double b, double c, double z);

// T_a(x) = 2F1(-a, a; 1/2; (1-x)/2), continued off the cut (-inf,-1].
std::complex<double> chebyshev_T(double a, std::complex<double> x);

struct ChebyshevSeed {
  double value;
  double deriv;
};

// T_a(c) and T_a'(c) from hypergeometric series; c in (-1, 3).
ChebyshevSeed chebyshev_seed(double a, double c);

// Taylor coefficients of T_a at c from (1-x^2)T'' - xT' + a^2 T = 0, c in (-1,1) or (1,inf).
Series1<double> chebyshev_taylor(double a, double center, int order);

}  // namespace qharm

#endif
