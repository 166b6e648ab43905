#ifndef QHARM_CONFORMAL_MAPS_HPP
#define QHARM_CONFORMAL_MAPS_HPP

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qharm/kernel_curve.hpp"
#include "qharm/series.hpp"
#include "qharm/walk_model.hpp"

namespace qharm {

enum class Backend { ExplicitRational, SmallStepChebyshev, BipolarFamily, FittedNumeric };

const char* to_string(Backend b);
Backend parse_backend(const std::string& s);  // explicit|smallstep|bipolar|fit

// K = a(x) y^2 + b(x) y + c(x) for small steps; d = b^2 - 4ac = (x-1)^2 q(x).
struct SmallStepConstants {
  std::vector<Rational> a, b, c, d, q;  // ascending coefficients
  double x1 = 0.0, x4 = 0.0;
  bool x4_infinite = false;
  double mu0 = 0.0, mu1 = 0.0;
  cplx s0, s1, rho_unif;
  double theta = 0.0;
};

SmallStepConstants smallstep_constants(const StepSet& m);

struct BipolarConstants {
  Rational z;
  std::map<int, Rational> zr;      // level r -> weight of each jump with k + l = -r
  std::vector<Rational> x_i0;      // coefficients of x * I0(x)
  std::vector<Rational> k_diag;    // coefficients of x^2 I0'(x) = K(x,x)
  double t = 0.0;
  std::optional<Rational> t_exact;
  double a_val = 0.0, b_val = 0.0;
  std::optional<Rational> a_exact;
  Rational b_exact;
};

BipolarConstants bipolar_constants(const StepSet& m);

struct FitOptions {
  int fit_degree = 0;  // degree of the smooth factor; 0 climbs a ladder until target_residual or stagnation
  double target_residual = 1e-10;
  double residual_threshold = 1e-4;
};

struct FitReport {
  double boundary_residual = 0.0;  // max angle error of psi1 against the imaginary axis (radians)
  int degree = 0;
  int samples = 0;
  double left_point = 0.0;         // real boundary point where psi1 vanishes
};

struct FitState;  // Arnoldi basis and fitted coefficients

// psi1 for one model. psi2 is -psi1 and is never stored.
class ConformalMap {
 public:
  Backend backend() const { return backend_; }
  const Rational& p11() const { return p11_; }
  bool exact() const { return exact_; }
  double scalar() const { return scalar_; }  // normalization applied to the raw backend map
  double pi_over_theta() const { return pi_over_theta_; }

  // Taylor coefficients at 0 in the rational field (exact backends only).
  Series1<Rational> series_exact(int order) const;
  Series1<double> series_float(int order) const;
  template <class T>
  Series1<T> series(int order) const;

  // Pointwise value; callers check domain membership (see psi1_eval).
  cplx eval(cplx x) const;

  const std::optional<SmallStepConstants>& smallstep() const { return small_; }
  const std::optional<BipolarConstants>& bipolar() const { return bip_; }
  const std::optional<FitReport>& fit_report() const { return fit_; }
  std::string explicit_name() const { return explicit_name_; }

  friend ConformalMap explicit_map(const StepSet& m);
  friend ConformalMap smallstep_map(const StepSet& m);
  friend ConformalMap bipolar_map(const StepSet& m);
  friend ConformalMap fit_conformal_numeric(const StepSet& m, const CurveSample& c, int order,
                                            const FitOptions& opt);

 private:
  Backend backend_ = Backend::ExplicitRational;
  Rational p11_;
  bool exact_ = false;
  double scalar_ = 1.0;
  double pi_over_theta_ = 2.0;
  std::string explicit_name_;
  std::optional<SmallStepConstants> small_;
  std::optional<BipolarConstants> bip_;
  std::optional<FitReport> fit_;
  std::shared_ptr<const FitState> fit_state_;
};

ConformalMap explicit_map(const StepSet& m);   // SRW and king walk only
ConformalMap smallstep_map(const StepSet& m);
ConformalMap bipolar_map(const StepSet& m);
ConformalMap fit_conformal_numeric(const StepSet& m, const CurveSample& c, int order,
                                   const FitOptions& opt = {});

// Picks explicit, then bipolar, then small-step, then a fitted map.
ConformalMap make_map(const StepSet& m, std::optional<Backend> prefer = std::nullopt, int fit_order = 24);

// psi1 at x with winding-number membership against the traced curve.
cplx psi1_eval(const ConformalMap& map, const CurveSample& c, cplx x);

template <class T>
Series1<T> ConformalMap::series(int order) const {
  if constexpr (std::is_same_v<T, Rational>) return series_exact(order);
  else return series_float(order);
}

}  // namespace qharm

#endif
