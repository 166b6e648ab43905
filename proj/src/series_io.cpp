#include <cstdio>
#include <sstream>

#include "qharm/series.hpp"

namespace qharm {

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv(const Series1<Rational>& s) {
  std::ostringstream os;
  os << "degree,numerator,denominator\n";
  for (int i = 0; i <= s.order(); ++i)
    os << i << ',' << s[i].get_num().get_str() << ',' << s[i].get_den().get_str() << '\n';
  return os.str();
}

std::string to_csv(const Series1<double>& s) {
  std::ostringstream os;
  os << "degree,value\n";
  for (int i = 0; i <= s.order(); ++i) os << i << ',' << fmt_double(s[i]) << '\n';
  return os.str();
}

std::string to_csv(const Series2<Rational>& s) {
  std::ostringstream os;
  os << "i,j,numerator,denominator\n";
  for (int a = 0; a <= s.order_x(); ++a)
    for (int b = 0; b <= s.order_y(); ++b)
      os << a << ',' << b << ',' << s(a, b).get_num().get_str() << ','
         << s(a, b).get_den().get_str() << '\n';
  return os.str();
}

std::string to_csv(const Series2<double>& s) {
  std::ostringstream os;
  os << "i,j,value\n";
  for (int a = 0; a <= s.order_x(); ++a)
    for (int b = 0; b <= s.order_y(); ++b) os << a << ',' << b << ',' << fmt_double(s(a, b)) << '\n';
  return os.str();
}

Series1<Rational> series1_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<Rational> c;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("degree", 0) == 0) continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) f.push_back(tok);
    if (f.size() != 3) throw Error(ErrorCode::ParseError, "bad series row: " + line);
    size_t deg = std::stoul(f[0]);
    if (deg != c.size()) throw Error(ErrorCode::ParseError, "series rows out of order");
    c.push_back(parse_rational(f[1] + "/" + f[2]));
  }
  if (c.empty()) throw Error(ErrorCode::ParseError, "empty series");
  return Series1<Rational>(c, static_cast<int>(c.size()) - 1);
}

}  // namespace qharm
