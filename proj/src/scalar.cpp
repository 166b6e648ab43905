#include "qharm/scalar.hpp"

#include <cctype>
#include <cmath>

#include "qharm/errors.hpp"

namespace qharm {

const char* to_string(Field f) { return f == Field::Rational ? "rational" : "float"; }

namespace {

bool is_int_token(const std::string& s) {
  size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s = trim(text);
  auto slash = s.find('/');
  std::string num = trim(s.substr(0, slash));
  std::string den = slash == std::string::npos ? "1" : trim(s.substr(slash + 1));
  if (!is_int_token(num) || !is_int_token(den) || den[0] == '-' || den[0] == '+')
    throw Error(ErrorCode::ParseError, "not an exact rational: '" + text + "'");
  if (num[0] == '+') num.erase(0, 1);
  mpz_class n(num), d(den);
  if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator: '" + text + "'");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

std::string rational_str(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  const mpz_class& n = q.get_num();
  const mpz_class& d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

Rational rationalize(double v, long max_den) {
  // convergents h/k of the continued fraction of v
  long double x = v;
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int it = 0; it < 64; ++it) {
    long double a = std::floor(x);
    mpz_class ai(static_cast<double>(a));
    mpz_class h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    long double frac = x - a;
    if (frac < 1e-18L) break;
    x = 1.0L / frac;
  }
  if (k1 == 0) return Rational(0);
  Rational r(h1, k1);
  r.canonicalize();
  return r;
}

}  // namespace qharm
