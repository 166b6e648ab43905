#ifndef QHARM_SERIES_HPP
#define QHARM_SERIES_HPP

#include <algorithm>
#include <complex>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qharm/errors.hpp"
#include "qharm/scalar.hpp"

namespace qharm {

// Univariate truncated power series c_0 + c_1 x + ... + c_N x^N (+ O(x^{N+1})).
// Results of binary operations carry the smaller of the two orders, so
// coefficient n never depends on anything past n.
template <class T>
class Series1 {
 public:
  using traits = ScalarTraits<T>;

  Series1() : c_(1, traits::zero()) {}
  explicit Series1(int order) : c_(static_cast<size_t>(order) + 1, traits::zero()) {}
  Series1(std::vector<T> coeffs, int order) : c_(static_cast<size_t>(order) + 1, traits::zero()) {
    for (size_t i = 0; i < coeffs.size() && i < c_.size(); ++i) c_[i] = coeffs[i];
  }

  static Series1 constant(const T& v, int order) {
    Series1 s(order);
    s.c_[0] = v;
    return s;
  }
  static Series1 variable(int order) {
    Series1 s(order);
    if (order >= 1) s.c_[1] = traits::one();
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const T& operator[](int i) const { return c_[static_cast<size_t>(i)]; }
  T& operator[](int i) { return c_[static_cast<size_t>(i)]; }
  const std::vector<T>& coeffs() const { return c_; }

  Series1 truncated(int n) const {
    Series1 r(std::min(n, order()));
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = c_[i];
    return r;
  }

  // index of first nonzero coefficient, or order()+1 if none
  int valuation() const {
    for (int i = 0; i <= order(); ++i)
      if (!traits::is_zero(c_[i])) return i;
    return order() + 1;
  }

  Series1 operator-() const {
    Series1 r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = -c_[i];
    return r;
  }
  friend Series1 operator+(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }
  friend Series1 operator-(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }
  friend Series1 operator*(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.order(), b.order()));
    int va = a.valuation(), vb = b.valuation();
    for (int i = va; i <= r.order(); ++i) {
      if (traits::is_zero(a.c_[i])) continue;
      for (int j = vb; i + j <= r.order(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }
  friend Series1 operator*(const T& s, const Series1& a) {
    Series1 r(a.order());
    for (int i = 0; i <= a.order(); ++i) r.c_[i] = s * a.c_[i];
    return r;
  }

  friend bool operator==(const Series1& a, const Series1& b) {
    return a.order() == b.order() && a.c_ == b.c_;
  }

  std::complex<double> eval(std::complex<double> x) const {
    std::complex<double> acc = 0.0;
    for (int i = order(); i >= 0; --i) acc = acc * x + traits::to_double(c_[i]);
    return acc;
  }

  template <class U>
  Series1<U> convert() const {
    Series1<U> r(order());
    for (int i = 0; i <= order(); ++i) r[i] = convert_scalar<U>(c_[i]);
    return r;
  }

 private:
  template <class U>
  static U convert_scalar(const T& v) {
    if constexpr (std::is_same_v<U, T>) return v;
    else if constexpr (std::is_same_v<U, double>) return traits::to_double(v);
    else return v;  // unreachable for supported fields
  }
  std::vector<T> c_;
};

// q with q*b = a, requires b_0 != 0.
template <class T>
Series1<T> div_unit(const Series1<T>& a, const Series1<T>& b) {
  using tr = ScalarTraits<T>;
  if (tr::is_zero(b[0])) throw Error(ErrorCode::NonUnitDivisor, "divisor has zero constant term");
  int n = std::min(a.order(), b.order());
  Series1<T> q(n);
  T inv = tr::one() / b[0];
  for (int i = 0; i <= n; ++i) {
    T acc = a[i];
    for (int k = 1; k <= i; ++k)
      if (!tr::is_zero(b[k])) acc -= b[k] * q[i - k];
    q[i] = acc * inv;
  }
  return q;
}

// Strip the divisor's valuation from both sides, then unit division.
// The quotient is valid to order min(orders) - valuation(den).
template <class T>
Series1<T> div_valuation(const Series1<T>& num, const Series1<T>& den) {
  using tr = ScalarTraits<T>;
  int v = den.valuation();
  if (v > den.order()) throw Error(ErrorCode::NonUnitDivisor, "divisor is zero to its order");
  for (int i = 0; i < v && i <= num.order(); ++i)
    if (!tr::is_zero(num[i]))
      throw Error(ErrorCode::NotDivisible,
                  "numerator coefficient " + std::to_string(i) + " does not vanish");
  int n = std::min(num.order(), den.order()) - v;
  if (n < 0) throw Error(ErrorCode::NotDivisible, "no coefficients left after stripping");
  Series1<T> a(n), b(n);
  for (int i = 0; i <= n; ++i) {
    a[i] = num[i + v];
    b[i] = den[i + v];
  }
  return div_unit(a, b);
}

template <class T>
Series1<T> sqrt(const Series1<T>& a) {
  using tr = ScalarTraits<T>;
  auto r0 = tr::sqrt(a[0]);
  if (!r0) throw Error(ErrorCode::NonSquareConstant, "constant term has no square root in the field");
  Series1<T> r(a.order());
  r[0] = *r0;
  T inv = tr::one() / (r[0] + r[0]);
  for (int n = 1; n <= a.order(); ++n) {
    T acc = a[n];
    for (int k = 1; k < n; ++k) acc -= r[k] * r[n - k];
    r[n] = acc * inv;
  }
  return r;
}

// outer(inner) for a polynomial outer; inner may have any constant term.
template <class T>
Series1<T> compose_poly(const std::vector<T>& outer, const Series1<T>& inner) {
  using tr = ScalarTraits<T>;
  Series1<T> acc = Series1<T>::constant(outer.empty() ? tr::zero() : outer.back(), inner.order());
  for (int k = static_cast<int>(outer.size()) - 2; k >= 0; --k) {
    acc = acc * inner;
    acc[0] += outer[static_cast<size_t>(k)];
  }
  return acc;
}

// outer(inner) for a truncated series outer; needs inner_0 = 0.
template <class T>
Series1<T> compose(const Series1<T>& outer, const Series1<T>& inner) {
  using tr = ScalarTraits<T>;
  if (!tr::is_zero(inner[0]))
    throw Error(ErrorCode::CompositionDivergence, "inner series has nonzero constant term");
  int n = std::min(outer.order(), inner.order());
  Series1<T> acc = Series1<T>::constant(outer[n], n);
  Series1<T> in = inner.truncated(n);
  for (int k = n - 1; k >= 0; --k) {
    acc = acc * in;
    acc[0] += outer[k];
  }
  return acc;
}

// Bivariate series, rectangular truncation: coefficient (a,b) for a <= nx, b <= ny.
template <class T>
class Series2 {
 public:
  using traits = ScalarTraits<T>;

  Series2() : Series2(0, 0) {}
  Series2(int nx, int ny)
      : nx_(nx), ny_(ny), c_(static_cast<size_t>(nx + 1) * (ny + 1), traits::zero()) {}

  int order_x() const { return nx_; }
  int order_y() const { return ny_; }
  const T& operator()(int a, int b) const { return c_[idx(a, b)]; }
  T& operator()(int a, int b) { return c_[idx(a, b)]; }

  static Series2 from_x(const Series1<T>& s, int ny) {
    Series2 r(s.order(), ny);
    for (int a = 0; a <= s.order(); ++a) r(a, 0) = s[a];
    return r;
  }
  static Series2 from_y(const Series1<T>& s, int nx) {
    Series2 r(nx, s.order());
    for (int b = 0; b <= s.order(); ++b) r(0, b) = s[b];
    return r;
  }

  friend Series2 operator+(const Series2& p, const Series2& q) {
    Series2 r(std::min(p.nx_, q.nx_), std::min(p.ny_, q.ny_));
    for (int a = 0; a <= r.nx_; ++a)
      for (int b = 0; b <= r.ny_; ++b) r(a, b) = p(a, b) + q(a, b);
    return r;
  }
  friend Series2 operator-(const Series2& p, const Series2& q) {
    Series2 r(std::min(p.nx_, q.nx_), std::min(p.ny_, q.ny_));
    for (int a = 0; a <= r.nx_; ++a)
      for (int b = 0; b <= r.ny_; ++b) r(a, b) = p(a, b) - q(a, b);
    return r;
  }
  friend Series2 operator*(const Series2& p, const Series2& q) {
    Series2 r(std::min(p.nx_, q.nx_), std::min(p.ny_, q.ny_));
    for (int a1 = 0; a1 <= r.nx_; ++a1)
      for (int b1 = 0; b1 <= r.ny_; ++b1) {
        if (traits::is_zero(p(a1, b1))) continue;
        for (int a2 = 0; a1 + a2 <= r.nx_; ++a2)
          for (int b2 = 0; b1 + b2 <= r.ny_; ++b2)
            if (!traits::is_zero(q(a2, b2))) r(a1 + a2, b1 + b2) += p(a1, b1) * q(a2, b2);
      }
    return r;
  }
  friend bool operator==(const Series2& p, const Series2& q) {
    return p.nx_ == q.nx_ && p.ny_ == q.ny_ && p.c_ == q.c_;
  }

 private:
  size_t idx(int a, int b) const { return static_cast<size_t>(a) * (ny_ + 1) + b; }
  int nx_, ny_;
  std::vector<T> c_;
};

// Bivariate unit division: q*d = n on the common rectangle.
template <class T>
Series2<T> div_unit(const Series2<T>& n, const Series2<T>& d) {
  using tr = ScalarTraits<T>;
  if (tr::is_zero(d(0, 0))) throw Error(ErrorCode::NonUnitDivisor, "divisor has zero constant term");
  int nx = std::min(n.order_x(), d.order_x()), ny = std::min(n.order_y(), d.order_y());
  Series2<T> q(nx, ny);
  std::vector<std::pair<int, int>> support;
  for (int a = 0; a <= nx; ++a)
    for (int b = 0; b <= ny; ++b)
      if ((a || b) && !tr::is_zero(d(a, b))) support.emplace_back(a, b);
  T inv = tr::one() / d(0, 0);
  for (int a = 0; a <= nx; ++a)
    for (int b = 0; b <= ny; ++b) {
      T acc = n(a, b);
      for (auto [da, db] : support)
        if (da <= a && db <= b) acc -= d(da, db) * q(a - da, b - db);
      q(a, b) = acc * inv;
    }
  return q;
}

std::string to_csv(const Series1<Rational>& s);
std::string to_csv(const Series1<double>& s);
std::string to_csv(const Series2<Rational>& s);
std::string to_csv(const Series2<double>& s);
Series1<Rational> series1_from_csv(const std::string& text);

}  // namespace qharm

#endif
