#include "qharm/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qharm/errors.hpp"
#include "qharm/parallel.hpp"

namespace qharm {

std::vector<Rational> basis_poly(int n, const Rational& p11) {
  std::vector<Rational> p{Rational(1)};
  Rational c = -p11 * p11;
  for (int r = 0; r < n / 2; ++r) {
    std::vector<Rational> q(p.size() + 2, Rational(0));
    for (size_t i = 0; i < p.size(); ++i) {
      q[i + 2] += p[i];
      q[i] += c * p[i];
    }
    p = q;
  }
  if (n % 2) p.insert(p.begin(), Rational(0));
  return p;
}

HarmonicSpec HarmonicSpec::basis(int n) {
  HarmonicSpec s;
  s.a.assign(static_cast<size_t>(n) + 1, Rational(0));
  s.a[static_cast<size_t>(n)] = 1;
  return s;
}

std::vector<Rational> HarmonicSpec::numerator(const Rational& p11) const {
  if (raw_numerator) return a;
  std::vector<Rational> num(1, Rational(0));
  for (size_t n = 1; n < a.size(); ++n) {
    if (sgn(a[n]) == 0) continue;
    std::vector<Rational> p = basis_poly(static_cast<int>(n), p11);
    if (num.size() < p.size()) num.resize(p.size(), Rational(0));
    for (size_t i = 0; i < p.size(); ++i) num[i] += a[n] * p[i];
  }
  return num;
}

std::string HarmonicSpec::describe() const {
  int nonzero = 0, last = 0;
  for (size_t n = 0; n < a.size(); ++n)
    if (sgn(a[n]) != 0) {
      ++nonzero;
      last = static_cast<int>(n);
    }
  if (!raw_numerator && nonzero == 1 && a[static_cast<size_t>(last)] == 1) return "P" + std::to_string(last);
  std::string s = raw_numerator ? "raw:" : "";
  for (size_t n = raw_numerator ? 0 : 1; n < a.size(); ++n) {
    if (n > (raw_numerator ? 0u : 1u)) s += ',';
    s += rational_str(a[n]);
  }
  return s;
}

HarmonicSpec parse_harmonic_spec(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  auto index = [&](const std::string& digits) {
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw Error(ErrorCode::ParseError, "bad harmonic spec '" + text + "'");
    int n = std::stoi(digits);
    if (n < 1) throw Error(ErrorCode::ParseError, "basis index must be at least 1");
    return n;
  };
  if (t == "t") return HarmonicSpec::basis(1);
  if (t.rfind("t^", 0) == 0) return HarmonicSpec::basis(index(t.substr(2)));
  if (t.size() > 1 && t[0] == 'P') return HarmonicSpec::basis(index(t.substr(1)));
  HarmonicSpec s;
  s.a.push_back(Rational(0));
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) s.a.push_back(parse_rational(item));
  if (s.a.size() < 2) throw Error(ErrorCode::ParseError, "empty harmonic spec");
  return s;
}

std::string Provenance::json() const {
  nlohmann::json j{{"model_hash", model_hash}, {"backend", backend}, {"scalar", scalar},
                   {"field", field},           {"spec", spec},       {"window", window},
                   {"fill", fill},             {"consistency", consistency},
                   {"cross_check", cross_check}};
  return j.dump();
}

template <class T>
HarmonicTable<T> table_from(int window, const std::function<T(int, int)>& f) {
  HarmonicTable<T> h(window);
  for (int i = 1; i <= window; ++i)
    for (int j = 1; j <= window; ++j) h.at(i, j) = f(i, j);
  return h;
}

namespace {

template <class T>
using tr = ScalarTraits<T>;

template <class T>
T poly_value(const std::vector<T>& p, const T& x) {
  T acc = tr<T>::zero();
  for (size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

template <class T>
std::vector<T> convert_poly(const std::vector<Rational>& p) {
  std::vector<T> r;
  for (const auto& c : p) r.push_back(tr<T>::from(c));
  return r;
}

int row_valuation(const KernelPoly& k) {
  for (int a = 0; a <= k.degree_x(); ++a)
    if (sgn(k.coeff(a, 0)) != 0) return a;
  throw Error(ErrorCode::UnsupportedFillPattern, "K(x,0) vanishes identically");
}

template <class T>
bool near(const T& a, const T& b, double rel) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)rel;
    return a == b;
  } else {
    double s = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) <= rel * s;
  }
}

template <class T>
struct StepTerm {
  int k, l;
  T p;
};

template <class T>
std::vector<StepTerm<T>> step_terms(const StepSet& m) {
  std::vector<StepTerm<T>> s;
  for (const auto& [j, w] : m.steps) s.push_back({j.first, j.second, tr<T>::from(w)});
  return s;
}

template <class T>
const char* field_name() {
  return std::is_same_v<T, Rational> ? "rational" : "float";
}

template <class T>
Provenance base_provenance(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int window) {
  Provenance p;
  p.model_hash = model_hash(m);
  p.backend = to_string(map.backend());
  p.scalar = map.scalar();
  p.field = field_name<T>();
  p.spec = spec.describe();
  p.window = window;
  return p;
}

}  // namespace

template <class T>
std::pair<Series1<T>, Series1<T>> boundary_series(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec,
                                                  int order) {
  KernelPoly kern = kernel_poly(m);
  int v = row_valuation(kern);
  int ord = order + v;
  Series1<T> psi = map.series<T>(ord);
  if (sgn(m.p11()) == 0) psi[0] = tr<T>::zero();
  std::vector<T> num = convert_poly<T>(spec.numerator(m.p11()));
  T psi0 = psi[0];
  // K(x,0) H(x,0) = F(psi(x)) - F(-psi(0)),  K(0,y) H(0,y) = F(psi(0)) - F(-psi(y))
  Series1<T> A = compose_poly(num, psi);
  A[0] -= poly_value(num, T(-psi0));
  Series1<T> B = -compose_poly(num, -psi);
  B[0] += poly_value(num, psi0);
  if constexpr (!std::is_same_v<T, Rational>) {
    for (int i = 0; i < v; ++i) A[i] = B[i] = 0.0;
  }
  Series1<T> k0 = kern.row_x0<T>(ord);
  Series1<T> hx = div_valuation(A, k0);
  Series1<T> hy = div_valuation(B, k0);
  return {hx.truncated(order), hy.truncated(order)};
}

template <class T>
HarmonicTable<T> expand_by_division(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int window) {
  KernelPoly kern = kernel_poly(m);
  int n = window - 1;
  Series1<T> psi = map.series<T>(n);
  std::vector<T> num = convert_poly<T>(spec.numerator(m.p11()));
  Series1<T> A = compose_poly(num, psi);
  Series1<T> B = compose_poly(num, -psi);
  Series2<T> N(n, n);
  for (int a = 0; a <= n; ++a) N(a, 0) += A[a];
  for (int b = 0; b <= n; ++b) N(0, b) -= B[b];
  Series2<T> q = div_unit(N, kern.as_series2<T>(n, n));
  HarmonicTable<T> h(window);
  for (int i = 1; i <= window; ++i)
    for (int j = 1; j <= window; ++j) h.at(i, j) = q(i - 1, j - 1);
  h.provenance = base_provenance<T>(m, map, spec, window);
  h.provenance.fill = "division";
  return h;
}

template <class T>
HarmonicTable<T> expand_harmonic(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, int window) {
  if (window < 1) throw Error(ErrorCode::WindowTooSmall, "window must be positive");
  if (!spec.a.empty() && !spec.raw_numerator && sgn(spec.a[0]) != 0)
    throw Error(ErrorCode::ParseError, "characterizing series must have zero constant term");
  bool diag = sgn(m.p11()) != 0;
  if (!diag && sgn(m.p10()) == 0)
    throw Error(ErrorCode::UnsupportedFillPattern, "p(1,1) = p(1,0) = 0: no pivot for the interior fill");
  const double tol = 1e-9;
  int W = window;
  int D = diag ? W : 2 * W - 1;  // side of the working square; the bidiagonal fill needs i + j <= 2W
  auto [hx, hy] = boundary_series<T>(m, map, spec, D - 1);
  if (!near(hx[0], hy[0], tol))
    throw Error(ErrorCode::ConsistencyResidual, "the two boundary rows disagree at h(1,1)");

  std::vector<T> g(static_cast<size_t>(D) * D, tr<T>::zero());
  auto G = [&](int i, int j) -> T& { return g[static_cast<size_t>(i - 1) * D + (j - 1)]; };
  auto get = [&](int i, int j) -> T {
    if (i < 1 || j < 1 || i > D || j > D) return tr<T>::zero();
    return g[static_cast<size_t>(i - 1) * D + (j - 1)];
  };
  for (int i = 1; i <= D; ++i) G(i, 1) = hx[i - 1];
  for (int j = 1; j <= D; ++j) G(1, j) = hy[j - 1];

  auto steps = step_terms<T>(m);
  Provenance prov = base_provenance<T>(m, map, spec, W);
  if (diag) {
    prov.fill = "diagonal";
    T p11 = tr<T>::from(m.p11());
    // harmonicity at (i,j) solved for h(i+1,j+1)
    for (int s = 4; s <= 2 * W; ++s) {
      int lo = std::max(2, s - W), hi = std::min(W, s - 2);
      if (lo > hi) continue;
      auto cell = [&](std::size_t idx) {
        int ip = lo + static_cast<int>(idx), jp = s - ip;
        int i = ip - 1, j = jp - 1;
        T acc = get(i, j);
        for (const auto& st : steps)
          if (!(st.k == 1 && st.l == 1)) acc -= st.p * get(i + st.k, j + st.l);
        G(ip, jp) = acc / p11;
      };
      std::size_t len = static_cast<std::size_t>(hi - lo + 1);
      if (len >= 64) parallel_for(len, cell);
      else
        for (std::size_t t = 0; t < len; ++t) cell(t);
    }
  } else {
    prov.fill = "bidiagonal";
    T p10 = tr<T>::from(m.p10());
    T p01 = tr<T>::from(m.p(0, 1));
    double worst = 0.0;
    for (int d = 3; d <= 2 * W; ++d) {
      for (int i = 1; i <= d - 2; ++i) {
        int j = d - 1 - i;
        T rhs = get(i, j);
        for (const auto& st : steps)
          if (!((st.k == 1 && st.l == 0) || (st.k == 0 && st.l == 1))) rhs -= st.p * get(i + st.k, j + st.l);
        if (i < d - 2) {
          G(i + 1, j) = (rhs - p01 * get(i, j + 1)) / p10;
        } else {
          // last equation of the anti-diagonal is overdetermined
          T lhs = p10 * get(d - 1, 1) + p01 * get(d - 2, 2);
          if constexpr (std::is_same_v<T, Rational>) {
            if (lhs != rhs)
              throw Error(ErrorCode::ConsistencyResidual,
                          "anti-diagonal " + std::to_string(d) + " violates harmonicity at (" + std::to_string(i) +
                              ",1)");
          } else {
            double scale = std::max({std::fabs(p10 * get(d - 1, 1)), std::fabs(p01 * get(d - 2, 2)),
                                     std::fabs(rhs), 1e-300});
            double r = std::fabs(lhs - rhs) / scale;
            worst = std::max(worst, r);
            if (r > tol) {
              char buf[32];
              std::snprintf(buf, sizeof buf, "%.3g", r);
              throw Error(ErrorCode::ConsistencyResidual,
                          "anti-diagonal " + std::to_string(d) + " relative residual " + buf);
            }
          }
        }
      }
    }
    prov.consistency = worst;
  }

  HarmonicTable<T> h(W);
  for (int i = 1; i <= W; ++i)
    for (int j = 1; j <= W; ++j) h.at(i, j) = G(i, j);
  if (diag) {
    HarmonicTable<T> q = expand_by_division<T>(m, map, spec, W);
    double worst = 0.0, scale = 1e-300;
    for (int i = 1; i <= W; ++i)
      for (int j = 1; j <= W; ++j) {
        if constexpr (std::is_same_v<T, Rational>) {
          if (q.at(i, j) != h.at(i, j))
            throw Error(ErrorCode::ConsistencyResidual, "recurrence and bivariate division disagree at (" +
                                                            std::to_string(i) + "," + std::to_string(j) + ")");
        } else {
          worst = std::max(worst, std::fabs(q.at(i, j) - h.at(i, j)));
          scale = std::max(scale, std::fabs(h.at(i, j)));
        }
      }
    prov.cross_check = worst / scale;
  }
  h.provenance = prov;
  return h;
}

template <class T>
LaplacianReport<T> laplacian_residual(const HarmonicTable<T>& h, const StepSet& m) {
  int W = h.window();
  if (W < 2) throw Error(ErrorCode::WindowTooSmall, "no interior point has its full stencil in the window");
  auto steps = step_terms<T>(m);
  std::vector<LaplacianReport<T>> rows(static_cast<size_t>(W - 1));
  parallel_for(static_cast<std::size_t>(W - 1), [&](std::size_t r) {
    int i = static_cast<int>(r) + 1;
    LaplacianReport<T> best;
    best.max_abs = tr<T>::zero();
    for (int j = 1; j <= W - 1; ++j) {
      T acc = -h(i, j);
      for (const auto& st : steps) acc += st.p * h(i + st.k, j + st.l);
      T a = tr<T>::abs(acc);
      if (a > best.max_abs || best.i == 0) {
        best.max_abs = a;
        best.i = i;
        best.j = j;
      }
    }
    rows[r] = best;
  });
  LaplacianReport<T> out = rows[0];
  for (const auto& r : rows)
    if (r.max_abs > out.max_abs) out = r;
  double big = 0.0;
  for (int i = 1; i <= W; ++i)
    for (int j = 1; j <= W; ++j) big = std::max(big, std::fabs(tr<T>::to_double(h(i, j))));
  out.relative = big > 0 ? tr<T>::to_double(out.max_abs) / big : 0.0;
  return out;
}

namespace {

template <class T>
double max_abs_entry(const HarmonicTable<T>& h) {
  double big = 0.0;
  for (int i = 1; i <= h.window(); ++i)
    for (int j = 1; j <= h.window(); ++j) big = std::max(big, std::fabs(tr<T>::to_double(h(i, j))));
  return big;
}

template <class T>
bool is_null(const T& v, double floor) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)floor;
    return sgn(v) == 0;
  } else {
    return std::fabs(v) <= floor;
  }
}

}  // namespace

template <class T>
VanishingReport vanishing_check(const HarmonicTable<T>& h, int n, const Rational& p11) {
  VanishingReport r;
  double floor = 1e-9 * max_abs_entry(h);
  std::ostringstream os;
  int W = h.window();
  if (sgn(p11) == 0) {
    if (W < n) {
      r.pass = false;
      os << "window " << W << " too small for index " << n;
    }
    for (int i = 1; i <= W && r.pass; ++i)
      for (int j = 1; i + j <= n && j <= W; ++j)
        if (!is_null(h(i, j), floor)) {
          r.pass = false;
          os << "h(" << i << "," << j << ") nonzero inside the triangle";
          break;
        }
    for (int i = 1; i <= n && r.pass; ++i)
      if (is_null(h(i, n + 1 - i), floor)) {
        r.pass = false;
        os << "h(" << i << "," << n + 1 - i << ") vanishes on the first diagonal";
      }
    if (r.pass) os << "zero on i+j<=" << n << ", nonzero on i+j=" << n + 1;
  } else {
    int k = n / 2;
    if (W < k + 1) {
      r.pass = false;
      os << "window " << W << " too small for index " << n;
    }
    for (int i = 1; i <= k && r.pass; ++i)
      for (int j = 1; j <= k; ++j)
        if (!is_null(h(i, j), floor)) {
          r.pass = false;
          os << "h(" << i << "," << j << ") nonzero inside the square";
          break;
        }
    if (r.pass) os << "zero on the square i,j<=" << k;
  }
  r.detail = os.str();
  return r;
}

template <class T>
BlockReport<T> lemma_block(const HarmonicTable<T>& even, const HarmonicTable<T>& odd, int k) {
  BlockReport<T> b;
  b.t[0][0] = even(k + 1, 1);
  b.t[0][1] = odd(k + 1, 1);
  b.t[1][0] = even(1, k + 1);
  b.t[1][1] = odd(1, k + 1);
  b.det = b.t[0][0] * b.t[1][1] - b.t[0][1] * b.t[1][0];
  return b;
}

template <class T>
Interpolation<T> interpolate_boundary(const StepSet& m, const ConformalMap& map, const std::vector<T>& c,
                                      const std::optional<std::vector<T>>& d, int order) {
  int N = order;
  if (N < 1) throw Error(ErrorCode::ParseError, "order must be at least 1");
  bool diag = sgn(m.p11()) != 0;
  int K = N / 2;  // the last block index
  int need_c = diag ? K + 1 : N;
  int need_d = diag && N >= 3 ? (N - 1) / 2 + 1 : 0;
  if (static_cast<int>(c.size()) < need_c)
    throw Error(ErrorCode::InconsistentData, "need " + std::to_string(need_c) + " values h(i,1)");
  if (need_d > 0 && (!d || static_cast<int>(d->size()) < need_d))
    throw Error(ErrorCode::InconsistentData, "need " + std::to_string(need_d) + " values h(1,j)");
  int W = std::max({N + 1, static_cast<int>(c.size()), d ? static_cast<int>(d->size()) : 0});
  std::vector<HarmonicTable<T>> basis(static_cast<size_t>(N) + 1);
  for (int n = 1; n <= N; ++n) basis[static_cast<size_t>(n)] = expand_harmonic<T>(m, map, HarmonicSpec::basis(n), W);
  auto hb = [&](int n, int i, int j) { return basis[static_cast<size_t>(n)](i, j); };

  Interpolation<T> out;
  out.a.assign(static_cast<size_t>(N) + 1, tr<T>::zero());
  auto& a = out.a;
  auto partial = [&](int upto, int i, int j) {
    T acc = tr<T>::zero();
    for (int n = 1; n <= upto; ++n) acc += a[static_cast<size_t>(n)] * hb(n, i, j);
    return acc;
  };
  if (!diag) {
    for (int i = 1; i <= N; ++i) {
      T piv = hb(i, i, 1);
      if (tr<T>::is_zero(piv)) throw Error(ErrorCode::SingularDiagonal, "h_" + std::to_string(i) + "(i,1) vanishes");
      a[static_cast<size_t>(i)] = (c[static_cast<size_t>(i - 1)] - partial(i - 1, i, 1)) / piv;
    }
    out.used_c = N;
  } else {
    T piv = hb(1, 1, 1);
    if (tr<T>::is_zero(piv)) throw Error(ErrorCode::SingularDiagonal, "h_1(1,1) vanishes");
    a[1] = c[0] / piv;
    out.used_c = 1;
    out.used_d = 1;
    for (int k = 1; 2 * k <= N; ++k) {
      T rc = c[static_cast<size_t>(k)] - partial(2 * k - 1, k + 1, 1);
      out.used_c = k + 1;
      if (2 * k + 1 <= N) {
        T rd = (*d)[static_cast<size_t>(k)] - partial(2 * k - 1, 1, k + 1);
        out.used_d = k + 1;
        BlockReport<T> b = lemma_block(basis[static_cast<size_t>(2 * k)], basis[static_cast<size_t>(2 * k + 1)], k);
        if (tr<T>::is_zero(b.det)) throw Error(ErrorCode::SingularDiagonal, "block T_" + std::to_string(k) + " is singular");
        a[static_cast<size_t>(2 * k)] = (rc * b.t[1][1] - b.t[0][1] * rd) / b.det;
        a[static_cast<size_t>(2 * k + 1)] = (b.t[0][0] * rd - b.t[1][0] * rc) / b.det;
      } else {
        T p = hb(2 * k, k + 1, 1);
        if (tr<T>::is_zero(p)) throw Error(ErrorCode::SingularDiagonal, "h_" + std::to_string(2 * k) + "(k+1,1) vanishes");
        a[static_cast<size_t>(2 * k)] = rc / p;
      }
    }
  }
  double res = 0.0;
  for (int i = out.used_c + 1; i <= static_cast<int>(c.size()); ++i)
    res = std::max(res, std::fabs(tr<T>::to_double(partial(N, i, 1) - c[static_cast<size_t>(i - 1)])));
  if (d) {
    for (int j = 1; j <= static_cast<int>(d->size()); ++j) {
      T pred = partial(N, 1, j);
      const T& given = (*d)[static_cast<size_t>(j - 1)];
      if (!diag && !near(pred, given, 1e-9))
        throw Error(ErrorCode::InconsistentData, "h(1," + std::to_string(j) + ") conflicts with the values it is determined by");
      if (j > out.used_d) res = std::max(res, std::fabs(tr<T>::to_double(pred - given)));
    }
  }
  out.residual = res;
  return out;
}

template <class T>
std::pair<HarmonicTable<T>, HarmonicTable<T>> decompose_symmetry(const HarmonicTable<T>& h) {
  int W = h.window();
  HarmonicTable<T> s(W), a(W);
  T half = tr<T>::from(Rational(1, 2));
  for (int i = 1; i <= W; ++i)
    for (int j = 1; j <= W; ++j) {
      s.at(i, j) = half * (h(i, j) + h(j, i));
      a.at(i, j) = half * (h(i, j) - h(j, i));
    }
  s.provenance = a.provenance = h.provenance;
  return {s, a};
}

template <class T>
SignReport sign_grid(const HarmonicTable<T>& h) {
  SignReport r;
  int W = h.window();
  r.window = W;
  r.sign.assign(static_cast<size_t>(W) * W, 0);
  double floor = std::is_same_v<T, Rational> ? 0.0 : 1e-12 * max_abs_entry(h);
  auto sg = [&](int i, int j) -> int {
    T v = h(i, j);
    if constexpr (std::is_same_v<T, Rational>) return sgn(v);
    else return std::fabs(v) <= floor ? 0 : (v > 0 ? 1 : -1);
  };
  r.normalization = 0;
  for (int s = 2; s <= 2 * W && r.normalization == 0; ++s)
    for (int i = std::max(1, s - W); i <= std::min(W, s - 1); ++i)
      if (int v = sg(i, s - i)) {
        r.normalization = v;
        break;
      }
  if (r.normalization == 0) r.normalization = 1;
  r.all_positive = true;
  for (int i = 1; i <= W; ++i)
    for (int j = 1; j <= W; ++j) {
      int v = sg(i, j) * r.normalization;
      r.sign[static_cast<size_t>(i - 1) * W + (j - 1)] = static_cast<int8_t>(v);
      if (v < 0) ++r.negatives;
      if (v == 0) ++r.zeros;
      if (v <= 0) r.all_positive = false;
    }
  r.row_changes.assign(static_cast<size_t>(W), 0);
  for (int i = 1; i <= W; ++i) {
    int prev = 0;
    for (int j = 1; j <= W; ++j) {
      int v = r.at(i, j);
      if (v == 0) continue;
      if (prev != 0 && v != prev) ++r.row_changes[static_cast<size_t>(i - 1)];
      prev = v;
    }
  }
  return r;
}

int ray_sign(const SignReport& s, double slope) {
  std::vector<int> ray;
  for (int i = 1; i <= s.window; ++i) {
    long j = std::lround(slope * i);
    if (j >= 1 && j <= s.window) ray.push_back(s.at(i, static_cast<int>(j)));
  }
  int total = 0;
  for (size_t t = ray.size() / 2; t < ray.size(); ++t) total += ray[t];
  return (total > 0) - (total < 0);
}

FunctionalResidual functional_equation_residual(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec,
                                                const CurveSample& curve, int order, double exclusion) {
  auto [hx, hy] = boundary_series<double>(m, map, spec, order);
  KernelPoly kern = kernel_poly(m);
  Series1<double> k0 = kern.row_x0<double>(kern.degree_x());
  double kh00 = -m.p11().get_d() * hx[0];
  FunctionalResidual out;
  for (cplx x : curve.points) {
    if (std::abs(x - 1.0) <= exclusion) {
      ++out.excluded;
      continue;
    }
    if (std::abs(x) >= 1.0) throw Error(ErrorCode::SeriesDivergence, "curve sample outside the disc of convergence");
    cplx xb = std::conj(x);
    cplx r = k0.eval(x) * hx.eval(x) + k0.eval(xb) * hy.eval(xb) - kh00;
    out.per_sample.push_back(std::abs(r));
    out.max_abs = std::max(out.max_abs, std::abs(r));
    ++out.samples;
  }
  return out;
}

template <class T>
std::string table_csv(const HarmonicTable<T>& h) {
  std::ostringstream os;
  if constexpr (std::is_same_v<T, Rational>) {
    os << "i,j,numerator,denominator\n";
    for (int i = 1; i <= h.window(); ++i)
      for (int j = 1; j <= h.window(); ++j)
        os << i << ',' << j << ',' << h(i, j).get_num().get_str() << ',' << h(i, j).get_den().get_str() << '\n';
  } else {
    os << "i,j,value\n";
    char buf[40];
    for (int i = 1; i <= h.window(); ++i)
      for (int j = 1; j <= h.window(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", h(i, j));
        os << i << ',' << j << ',' << buf << '\n';
      }
  }
  return os.str();
}

std::string sign_pgm(const SignReport& s) {
  std::string out = "P5\n" + std::to_string(s.window) + " " + std::to_string(s.window) + "\n255\n";
  for (int j = s.window; j >= 1; --j)
    for (int i = 1; i <= s.window; ++i) {
      int v = s.at(i, j);
      out += static_cast<char>(v < 0 ? 0 : (v == 0 ? 128 : 255));
    }
  return out;
}

std::string sign_csv(const SignReport& s) {
  std::ostringstream os;
  os << "i,j,sign\n";
  for (int i = 1; i <= s.window; ++i)
    for (int j = 1; j <= s.window; ++j) os << i << ',' << j << ',' << s.at(i, j) << '\n';
  return os.str();
}

#define QHARM_INSTANTIATE(T)                                                                                   \
  template HarmonicTable<T> table_from<T>(int, const std::function<T(int, int)>&);                             \
  template HarmonicTable<T> expand_harmonic<T>(const StepSet&, const ConformalMap&, const HarmonicSpec&, int);  \
  template std::pair<Series1<T>, Series1<T>> boundary_series<T>(const StepSet&, const ConformalMap&,            \
                                                                const HarmonicSpec&, int);                     \
  template HarmonicTable<T> expand_by_division<T>(const StepSet&, const ConformalMap&, const HarmonicSpec&, int); \
  template LaplacianReport<T> laplacian_residual<T>(const HarmonicTable<T>&, const StepSet&);                  \
  template VanishingReport vanishing_check<T>(const HarmonicTable<T>&, int, const Rational&);                  \
  template BlockReport<T> lemma_block<T>(const HarmonicTable<T>&, const HarmonicTable<T>&, int);               \
  template Interpolation<T> interpolate_boundary<T>(const StepSet&, const ConformalMap&, const std::vector<T>&, \
                                                    const std::optional<std::vector<T>>&, int);                \
  template std::pair<HarmonicTable<T>, HarmonicTable<T>> decompose_symmetry<T>(const HarmonicTable<T>&);       \
  template SignReport sign_grid<T>(const HarmonicTable<T>&);                                                   \
  template std::string table_csv<T>(const HarmonicTable<T>&);

QHARM_INSTANTIATE(Rational)
QHARM_INSTANTIATE(double)

}  // namespace qharm
