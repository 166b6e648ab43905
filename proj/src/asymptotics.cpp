#include "qharm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "qharm/errors.hpp"
#include "qharm/parallel.hpp"

namespace qharm {

double continuous_harmonic(int n, double theta, double x, double y) {
  std::complex<double> z(x / std::sin(theta) + y / std::tan(theta), y);
  if (z == 0.0) return 0.0;
  return std::pow(z, n * M_PI / theta).imag();
}

double continuous_laplace(int n, double theta, double x, double y) {
  double den = x * x - 2.0 * x * y * std::cos(theta) + y * y;
  if (!(den > 0.0)) throw Error(ErrorCode::PoleOnDiagonal, "x^2 - 2xy cos(theta) + y^2 vanishes");
  double a = n * M_PI / theta;
  double e = M_PI / theta;
  double num = std::pow(std::pow(x, -e), n) - std::pow(-std::pow(y, -e), n);
  return std::tgamma(a + 2.0) / ((a + 1.0) * std::pow(std::sin(theta), a - 1.0)) * num / den;
}

namespace {

// sum_{i >= from} i^p e^{-i x}
double power_exp_sum(double p, double x, long from) {
  double sum = 0.0;
  double peak = p / x;  // terms increase up to here
  for (long i = std::max(from, 1L);; ++i) {
    double t = std::exp(p * std::log(static_cast<double>(i)) - i * x);
    sum += t;
    if (i > peak && t <= 1e-18 * sum) break;
    if (t == 0.0 && i > peak) break;
  }
  return sum;
}

}  // namespace

template <class T>
LaplaceValue table_laplace(const HarmonicTable<T>& h, double x, double y, double gamma, double tail_limit) {
  int W = h.window();
  if (W < 1) throw Error(ErrorCode::WindowTooSmall, "empty table");
  std::vector<double> ex(static_cast<size_t>(W) + 1), ey(static_cast<size_t>(W) + 1);
  for (int i = 1; i <= W; ++i) {
    ex[static_cast<size_t>(i)] = std::exp(-i * x);
    ey[static_cast<size_t>(i)] = std::exp(-i * y);
  }
  std::vector<double> rows(static_cast<size_t>(W));
  parallel_for(static_cast<std::size_t>(W), [&](std::size_t r) {
    int i = static_cast<int>(r) + 1;
    double acc = 0.0;
    for (int j = 1; j <= W; ++j) acc += ScalarTraits<T>::to_double(h(i, j)) * ey[static_cast<size_t>(j)];
    rows[r] = acc * ex[static_cast<size_t>(i)];
  });
  LaplaceValue out;
  for (double r : rows) out.value += r;

  double C = 0.0;
  for (int t = 1; t <= W; ++t) {
    C = std::max(C, std::fabs(ScalarTraits<T>::to_double(h(W, t))) / std::pow(W + t, gamma));
    C = std::max(C, std::fabs(ScalarTraits<T>::to_double(h(t, W))) / std::pow(W + t, gamma));
  }
  // (i+j)^g <= 2^(g-1) (i^g + j^g); the outside of the window lies in {i > W} u {j > W}
  double g = std::max(gamma, 1.0);
  auto strip = [&](double a, double b) {
    return power_exp_sum(g, a, W + 1) * power_exp_sum(0.0, b, 1) + power_exp_sum(0.0, a, W + 1) * power_exp_sum(g, b, 1);
  };
  out.tail = C * std::pow(2.0, g - 1.0) * (strip(x, y) + strip(y, x));
  if (out.tail > tail_limit * std::fabs(out.value))
    throw Error(ErrorCode::TailDominates, "tail bound " + std::to_string(out.tail) + " against partial sum " +
                                              std::to_string(out.value));
  return out;
}

double generating_laplace(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, double x, double y) {
  double X = std::exp(-x), Y = std::exp(-y);
  KernelPoly k = kernel_poly(m);
  std::vector<Rational> num = spec.numerator(m.p11());
  auto F = [&](double t) {
    double acc = 0.0;
    for (size_t i = num.size(); i-- > 0;) acc = acc * t + num[i].get_d();
    return acc;
  };
  double px = map.eval(X).real(), py = map.eval(Y).real();
  double kv = k.eval(X, Y);
  if (kv == 0.0) throw Error(ErrorCode::PoleOnDiagonal, "kernel vanishes at the evaluation point");
  return X * Y * (F(px) - F(-py)) / kv;
}

ScalingReport scaling_convergence(const StepSet& m, const ConformalMap& map, int n,
                                  const std::vector<std::pair<double, double>>& samples, const std::vector<int>& m_list,
                                  const ScalingOptions& opt) {
  ScalingReport rep;
  rep.n = n;
  rep.theta = covariance_angle(m).theta;
  rep.samples = samples;
  double alpha = n * M_PI / rep.theta;
  HarmonicSpec spec = HarmonicSpec::basis(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::optional<HarmonicTable<double>> table;
  if (opt.window > 0) {
    double reach = 0.0;
    for (auto [x, y] : samples) reach = std::max({reach, x, y});
    int mmax = m_list.empty() ? 0 : *std::max_element(m_list.begin(), m_list.end());
    if (opt.window < mmax * reach * 3)
      throw Error(ErrorCode::WindowTooSmall, "window below 3 max(m) max(sample)");
    table = expand_harmonic<double>(m, map, spec, opt.window);
  }

  double prev = std::numeric_limits<double>::infinity();
  for (int mm : m_list) {
    ScalingRow row;
    row.m = mm;
    double lo = 1e300, hi = -1e300, sum = 0.0;
    int kept = 0;
    for (auto [x, y] : samples) {
      double cont = continuous_laplace(n, rep.theta, x, y);
      if (std::fabs(cont) < 1e-12) {
        // antisymmetric transforms vanish on the diagonal
        row.ratios.push_back(nan);
        row.table_ratios.push_back(nan);
        continue;
      }
      double scale = std::pow(static_cast<double>(mm), alpha + 2.0) * cont;
      double r = generating_laplace(m, map, spec, x / mm, y / mm) / scale;
      row.ratios.push_back(r);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      sum += r;
      ++kept;
      if (table) {
        try {
          LaplaceValue v = table_laplace(*table, x / mm, y / mm, alpha + 2.0);
          double tr = v.value / scale;
          row.table_ratios.push_back(tr);
          row.table_gap = std::max(row.table_gap, std::fabs(tr - r) / std::fabs(r));
        } catch (const Error& e) {
          if (!e.has(ErrorCode::TailDominates)) throw;
          row.table_ratios.push_back(nan);
        }
      }
    }
    if (kept > 0) {
      row.mean = sum / kept;
      row.spread = (hi - lo) / std::fabs(row.mean);
    }
    if (row.spread > prev + 1e-9) rep.monotone = false;
    prev = row.spread;
    rep.c = row.mean;
    rep.rows.push_back(row);
  }
  return rep;
}

template LaplaceValue table_laplace<Rational>(const HarmonicTable<Rational>&, double, double, double, double);
template LaplaceValue table_laplace<double>(const HarmonicTable<double>&, double, double, double, double);

}  // namespace qharm
