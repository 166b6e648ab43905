#include "qharm/walk_model.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qharm/errors.hpp"

namespace qharm {

Rational StepSet::p(int k, int l) const {
  auto it = steps.find({k, l});
  return it == steps.end() ? Rational(0) : it->second;
}

bool StepSet::small_steps() const {
  for (const auto& [j, w] : steps)
    if (j.first < -1 || j.second < -1) return false;
  return true;
}

long lattice_index(const std::vector<Jump>& support) {
  long g = 0;
  for (size_t i = 0; i < support.size(); ++i)
    for (size_t j = i + 1; j < support.size(); ++j) {
      long det = static_cast<long>(support[i].first) * support[j].second -
                 static_cast<long>(support[i].second) * support[j].first;
      g = std::gcd(g, std::labs(det));
    }
  return g;
}

StepSet validate_stepset(const RawWeights& raw, ValidateOptions opt) {
  std::vector<ErrorCode> bad;
  std::ostringstream why;
  StepSet m;
  for (const auto& [j, w] : raw) {
    if (sgn(w) < 0) {
      bad.push_back(ErrorCode::NegativeWeight);
      why << "negative weight at (" << j.first << "," << j.second << "); ";
      continue;
    }
    m.steps[j] += w;
  }
  for (auto it = m.steps.begin(); it != m.steps.end();)
    it = sgn(it->second) == 0 ? m.steps.erase(it) : std::next(it);

  Rational total = 0, dx = 0, dy = 0;
  bool asym = false, big = false;
  for (const auto& [j, w] : m.steps) {
    total += w;
    dx += j.first * w;
    dy += j.second * w;
    if (m.p(j.second, j.first) != w) asym = true;
    if (j.first >= 2 || j.second >= 2) big = true;
    m.max_neg_jump = std::max({m.max_neg_jump, -j.first, -j.second});
  }
  if (total != 1) {
    bad.push_back(ErrorCode::SumNotOne);
    why << "weights sum to " << rational_str(total) << "; ";
  }
  if (asym) {
    bad.push_back(ErrorCode::AsymmetricWeights);
    why << "p(k,l) != p(l,k) somewhere; ";
  }
  if (big) {
    bad.push_back(ErrorCode::PositiveJumpTooLarge);
    why << "a jump has a coordinate >= 2; ";
  }
  if (dx != 0 || dy != 0) {
    bad.push_back(ErrorCode::NonzeroDrift);
    why << "drift (" << rational_str(dx) << "," << rational_str(dy) << "); ";
  }
  std::vector<Jump> support;
  for (const auto& [j, w] : m.steps) support.push_back(j);
  m.irreducible = lattice_index(support) == 1;
  if (!m.irreducible) {
    if (opt.allow_reducible) {
      m.reducible_override = true;
    } else {
      bad.push_back(ErrorCode::Reducible);
      why << "support generates a proper sublattice of Z^2; ";
    }
  }
  if (!bad.empty()) {
    std::string msg = why.str();
    if (msg.size() >= 2) msg.resize(msg.size() - 2);
    throw Error(bad, msg);
  }
  return m;
}

CovarianceData covariance_angle(const StepSet& m) {
  CovarianceData c;
  for (const auto& [j, w] : m.steps) {
    c.sigma1 += j.first * j.first * w;
    c.sigma2 += j.second * j.second * w;
    c.sigma12 += j.first * j.second * w;
  }
  if (sgn(c.sigma1) == 0 || sgn(c.sigma2) == 0)
    throw Error(ErrorCode::DegenerateCovariance, "sum of k^2 p vanishes");
  double s1 = c.sigma1.get_d(), s2 = c.sigma2.get_d(), s12 = c.sigma12.get_d();
  double cs = -s12 / std::sqrt(s1 * s2);
  cs = std::clamp(cs, -1.0, 1.0);
  c.theta = std::acos(cs);
  if (!(c.theta > 0.0 && c.theta < M_PI))
    throw Error(ErrorCode::DegenerateCovariance, "correlation is +-1");
  c.pi_over_theta = M_PI / c.theta;
  return c;
}

Rational KernelPoly::coeff(int a, int b) const {
  auto it = coeffs.find({a, b});
  return it == coeffs.end() ? Rational(0) : it->second;
}

Rational KernelPoly::eval(const Rational& x, const Rational& y) const {
  Rational acc = 0;
  for (const auto& [ab, w] : coeffs) {
    Rational t = w;
    for (int i = 0; i < ab.first; ++i) t *= x;
    for (int i = 0; i < ab.second; ++i) t *= y;
    acc += t;
  }
  return acc;
}

std::complex<double> KernelPoly::eval(std::complex<double> x, std::complex<double> y) const {
  std::complex<double> acc = 0.0;
  for (const auto& [ab, w] : coeffs)
    acc += w.get_d() * std::pow(x, ab.first) * std::pow(y, ab.second);
  return acc;
}

double KernelPoly::eval(double x, double y) const {
  double acc = 0.0;
  for (const auto& [ab, w] : coeffs) acc += w.get_d() * std::pow(x, ab.first) * std::pow(y, ab.second);
  return acc;
}

int KernelPoly::degree_x() const {
  int d = 0;
  for (const auto& [ab, w] : coeffs) d = std::max(d, ab.first);
  return d;
}

KernelPoly kernel_poly(const StepSet& m) {
  KernelPoly k;
  k.coeffs[{1, 1}] = 1;
  for (const auto& [j, w] : m.steps) k.coeffs[{1 - j.first, 1 - j.second}] -= w;
  for (auto it = k.coeffs.begin(); it != k.coeffs.end();)
    it = sgn(it->second) == 0 ? k.coeffs.erase(it) : std::next(it);
  k.p11 = m.p11();

  std::map<std::pair<int, int>, Rational> slice;
  for (const auto& [ab, w] : k.coeffs) slice[{ab.first + ab.second, std::abs(ab.first - ab.second)}] += w;
  for (const auto& [dm, w] : slice)
    if (sgn(w) != 0) k.torus.push_back({dm.first, dm.second, w});
  if (sgn(k.p11) == 0)
    for (const auto& t : k.torus) k.reduced.push_back({t.eta_power - 1, t.freq, t.weight});
  return k;
}

RawWeights parse_model_text(const std::string& text) {
  RawWeights out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string ks, lstr, ws, extra;
    if (!(ls >> ks)) continue;
    if (!(ls >> lstr >> ws) || (ls >> extra))
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected `k l num/den`");
    try {
      size_t used = 0;
      int k = std::stoi(ks, &used);
      if (used != ks.size()) throw std::invalid_argument(ks);
      int l = std::stoi(lstr, &used);
      if (used != lstr.size()) throw std::invalid_argument(lstr);
      out.push_back({{k, l}, parse_rational(ws)});
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": weight must be an exact rational");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad integer jump");
    }
  }
  return out;
}

std::string serialize_model(const StepSet& m) {
  std::ostringstream os;
  for (const auto& [j, w] : m.steps) os << j.first << ' ' << j.second << ' ' << rational_str(w) << '\n';
  return os.str();
}

StepSet load_model_file(const std::string& path, ValidateOptions opt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return validate_stepset(parse_model_text(ss.str()), opt);
}

std::string model_hash(const StepSet& m) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : serialize_model(m)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qharm
