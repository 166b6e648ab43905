#ifndef QHARM_HARMONIC_HPP
#define QHARM_HARMONIC_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qharm/conformal_maps.hpp"
#include "qharm/series.hpp"
#include "qharm/walk_model.hpp"

namespace qharm {

// P_n = (X^2 - p11^2)^floor(n/2) X^(n mod 2), ascending coefficients.
std::vector<Rational> basis_poly(int n, const Rational& p11);

// Harmonic function sum a_n h_n. With raw_numerator the a_n are instead the
// coefficients of the literal numerator polynomial F in (F(psi1(x)) - F(-psi1(y)))/K.
struct HarmonicSpec {
  std::vector<Rational> a;  // a[0] must be 0
  bool raw_numerator = false;

  static HarmonicSpec basis(int n);
  std::vector<Rational> numerator(const Rational& p11) const;
  std::string describe() const;
};

// Parses `t^n`, `Pn`, `t` or a comma list a1,a2,... of rationals.
HarmonicSpec parse_harmonic_spec(const std::string& text);

struct Provenance {
  std::string model_hash;
  std::string backend;
  double scalar = 1.0;
  std::string field;
  std::string spec;
  int window = 0;
  std::string fill;            // "diagonal" or "bidiagonal"
  double consistency = 0.0;    // worst overdetermined equation (bidiagonal fill)
  double cross_check = 0.0;    // worst difference against bivariate division (diagonal fill)

  std::string json() const;
};

template <class T>
class HarmonicTable {
 public:
  HarmonicTable() = default;
  explicit HarmonicTable(int window) : w_(window), v_(static_cast<size_t>(window) * window, ScalarTraits<T>::zero()) {}

  int window() const { return w_; }
  // h(i,j) for 1 <= i,j <= W; zero outside the quadrant
  T operator()(int i, int j) const {
    if (i < 1 || j < 1) return ScalarTraits<T>::zero();
    return v_[idx(i, j)];
  }
  T& at(int i, int j) { return v_[idx(i, j)]; }
  const T& at(int i, int j) const { return v_[idx(i, j)]; }
  bool operator==(const HarmonicTable& o) const { return w_ == o.w_ && v_ == o.v_; }

  Provenance provenance;

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i - 1) * w_ + (j - 1); }
  int w_ = 0;
  std::vector<T> v_;
};

template <class T>
HarmonicTable<T> table_from(int window, const std::function<T(int, int)>& f);

// Coefficients of H(x,y) = (F(psi1(x)) - F(-psi1(y)))/K(x,y) with h(i,j) = [x^(i-1) y^(j-1)] H.
template <class T>
HarmonicTable<T> expand_harmonic(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int window);

// Boundary rows H(x,0) and H(0,y) to the given order.
template <class T>
std::pair<Series1<T>, Series1<T>> boundary_series(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec,
                                                  int order);

// Same table by direct bivariate division of the numerator by K (p11 != 0).
template <class T>
HarmonicTable<T> expand_by_division(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int window);

template <class T>
struct LaplacianReport {
  T max_abs{};
  int i = 0, j = 0;
  double relative = 0.0;  // max_abs over the largest |h| in the window
};

// max |sum p_{k,l} h(i+k,j+l) - h(i,j)| over points whose stencil fits in the window
template <class T>
LaplacianReport<T> laplacian_residual(const HarmonicTable<T>& h, const StepSet& m);

struct VanishingReport {
  bool pass = true;
  std::string detail;
};

// Triangle pattern (p11 = 0) or square pattern (p11 != 0) for h = h_n.
template <class T>
VanishingReport vanishing_check(const HarmonicTable<T>& h, int n, const Rational& p11);

// T_k = [[h_2k(k+1,1), h_2k+1(k+1,1)], [h_2k(1,k+1), h_2k+1(1,k+1)]] and its determinant
template <class T>
struct BlockReport {
  T t[2][2];
  T det;
};
template <class T>
BlockReport<T> lemma_block(const HarmonicTable<T>& even, const HarmonicTable<T>& odd, int k);

template <class T>
struct Interpolation {
  std::vector<T> a;         // a[0] = 0, a[1..N]
  double residual = 0.0;    // worst mismatch on boundary entries not used by the solve
  int used_c = 0, used_d = 0;
};

// Recover a_1..a_N from boundary values c_i = h(i,1) (and d_j = h(1,j) when p11 != 0).
template <class T>
Interpolation<T> interpolate_boundary(const StepSet& m, const ConformalMap& map, const std::vector<T>& c,
                                      const std::optional<std::vector<T>>& d, int order);

template <class T>
std::pair<HarmonicTable<T>, HarmonicTable<T>> decompose_symmetry(const HarmonicTable<T>& h);

struct SignReport {
  int window = 0;
  std::vector<int8_t> sign;            // row-major over i then j, after normalization
  int normalization = 1;               // sign of the first nonzero entry in (i+j, i) order
  std::vector<int> row_changes;        // sign changes along each row i (zeros skipped)
  int negatives = 0;                   // after normalization
  int zeros = 0;
  bool all_positive = false;           // every entry > 0 after normalization
  int at(int i, int j) const { return sign[static_cast<size_t>(i - 1) * window + (j - 1)]; }
};

template <class T>
SignReport sign_grid(const HarmonicTable<T>& h);

// Majority sign of h(i, round(slope*i)) over the outer half of the ray, 0 if it is identically zero.
int ray_sign(const SignReport& s, double slope);

struct FunctionalResidual {
  double max_abs = 0.0;
  std::vector<double> per_sample;
  int samples = 0;
  int excluded = 0;
};

// |KH(x,0) + KH(0,conj x) - KH(0,0)| with the boundary series truncated at `order`, at curve points
// with |x - 1| > exclusion (SeriesDivergence if a sample lies outside the unit disc of convergence).
FunctionalResidual functional_equation_residual(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec,
                                                const CurveSample& curve, int order, double exclusion = 1e-3);

template <class T>
std::string table_csv(const HarmonicTable<T>& h);
// P5 graymap, one byte per cell (0, 128, 255 for -, 0, +); first image row is j = W
std::string sign_pgm(const SignReport& s);
std::string sign_csv(const SignReport& s);

}  // namespace qharm

#endif
