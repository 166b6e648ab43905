#ifndef QHARM_WALK_MODEL_HPP
#define QHARM_WALK_MODEL_HPP

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qharm/scalar.hpp"
#include "qharm/series.hpp"

namespace qharm {

using Jump = std::pair<int, int>;
using RawWeights = std::vector<std::pair<Jump, Rational>>;

// Validated jump distribution. Only positive weights are stored.
struct StepSet {
  std::map<Jump, Rational> steps;
  int max_neg_jump = 0;  // largest -k (equivalently -l) over the support
  bool irreducible = true;
  bool reducible_override = false;  // admitted through the override flag

  Rational p(int k, int l) const;
  Rational p11() const { return p(1, 1); }
  Rational p10() const { return p(1, 0); }
  bool small_steps() const;  // all jumps in {-1,0,1}^2
};

struct ValidateOptions {
  bool allow_reducible = false;
};

// Throws Error listing every violated condition.
StepSet validate_stepset(const RawWeights& raw, ValidateOptions opt = {});

// Index of the subgroup of Z^2 generated by the support (0 when rank < 2).
long lattice_index(const std::vector<Jump>& support);

struct CovarianceData {
  Rational sigma1, sigma2, sigma12;
  double theta = 0.0;
  double pi_over_theta = 0.0;
};

CovarianceData covariance_angle(const StepSet& m);

// K(x,y) = xy - sum p_{k,l} x^{1-k} y^{1-l}, stored by monomial exponents.
struct KernelPoly {
  std::map<std::pair<int, int>, Rational> coeffs;
  Rational p11;

  // Torus slice K(eta e^{it}, eta e^{-it}) = sum_{(d,m)} w * eta^d * cos(m t).
  // When p11 = 0 every term has d >= 1 and `reduced` holds the slice divided by eta.
  struct TorusTerm {
    int eta_power;
    int freq;
    Rational weight;
  };
  std::vector<TorusTerm> torus;
  std::vector<TorusTerm> reduced;

  Rational coeff(int a, int b) const;
  Rational eval(const Rational& x, const Rational& y) const;
  std::complex<double> eval(std::complex<double> x, std::complex<double> y) const;
  double eval(double x, double y) const;
  int degree_x() const;

  template <class T>
  Series1<T> row_x0(int order) const;  // K(x,0)
  template <class T>
  Series2<T> as_series2(int nx, int ny) const;
};

KernelPoly kernel_poly(const StepSet& m);

// Model file: lines `k l num/den`, '#' comments.
RawWeights parse_model_text(const std::string& text);
std::string serialize_model(const StepSet& m);
StepSet load_model_file(const std::string& path, ValidateOptions opt = {});
std::string model_hash(const StepSet& m);

template <class T>
Series1<T> KernelPoly::row_x0(int order) const {
  Series1<T> s(order);
  for (const auto& [ab, w] : coeffs)
    if (ab.second == 0 && ab.first <= order) s[ab.first] = ScalarTraits<T>::from(w);
  return s;
}

template <class T>
Series2<T> KernelPoly::as_series2(int nx, int ny) const {
  Series2<T> s(nx, ny);
  for (const auto& [ab, w] : coeffs)
    if (ab.first <= nx && ab.second <= ny) s(ab.first, ab.second) = ScalarTraits<T>::from(w);
  return s;
}

}  // namespace qharm

#endif
