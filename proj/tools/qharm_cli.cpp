#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qharm/asymptotics.hpp"
#include "qharm/conformal_maps.hpp"
#include "qharm/errors.hpp"
#include "qharm/harmonic.hpp"
#include "qharm/kernel_curve.hpp"
#include "qharm/parallel.hpp"
#include "qharm/walk_model.hpp"

using namespace qharm;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string model;
  bool allow_reducible = false;
  std::string backend;
  std::string field;
  int window = 20;
  int order = 24;
  int points = 1024;
  std::uint64_t seed = 12345;
  std::string spec = "t";
  bool raw_numerator = false;
  std::string out;
  std::string report;
};

json versions() {
  return {{"qharm", kVersion}, {"gmp", gmp_version}, {"threads", worker_count()}};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

// JSON report: to --report when given, else one line on stderr.
void emit_report(const RunConfig& cfg, const json& j) {
  if (cfg.report.empty()) std::cerr << j.dump() << '\n';
  else emit(cfg.report, j.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

StepSet load(const RunConfig& cfg) { return load_model_file(cfg.model, ValidateOptions{cfg.allow_reducible}); }

ConformalMap map_for(const StepSet& m, const RunConfig& cfg) {
  std::optional<Backend> prefer;
  if (!cfg.backend.empty() && cfg.backend != "auto") prefer = parse_backend(cfg.backend);
  return make_map(m, prefer, cfg.order);
}

Field field_for(const ConformalMap& map, const RunConfig& cfg) {
  if (cfg.field.empty()) return map.exact() ? Field::Rational : Field::Float;
  if (cfg.field == "float") return Field::Float;
  if (cfg.field != "rational") throw Error(ErrorCode::ParseError, "field must be rational or float");
  if (!map.exact())
    throw Error(ErrorCode::FieldMismatch, std::string("backend ") + to_string(map.backend()) + " is not exact");
  return Field::Rational;
}

HarmonicSpec spec_for(const RunConfig& cfg) {
  HarmonicSpec s = parse_harmonic_spec(cfg.spec);
  if (cfg.raw_numerator) {
    if (s.a.size() < 2 || cfg.spec.find(',') == std::string::npos)
      throw Error(ErrorCode::ParseError, "--raw-numerator takes a comma list of coefficients");
    s.raw_numerator = true;
  }
  return s;
}

json map_json(const StepSet& m, const ConformalMap& map) {
  json j{{"model_hash", model_hash(m)},
         {"backend", to_string(map.backend())},
         {"exact", map.exact()},
         {"scalar", map.scalar()},
         {"pi_over_theta", map.pi_over_theta()}};
  if (!map.explicit_name().empty()) j["explicit"] = map.explicit_name();
  if (const auto& s = map.smallstep()) {
    j["smallstep"] = {{"x1", s->x1}, {"x4", s->x4_infinite ? json("inf") : json(s->x4)}, {"mu0", s->mu0},
                      {"mu1", s->mu1}};
  }
  if (const auto& b = map.bipolar()) {
    j["bipolar"] = {{"z", rational_str(b->z)}, {"t", b->t}, {"a", b->a_val}, {"b", b->b_val}};
    if (b->t_exact) j["bipolar"]["t_exact"] = rational_str(*b->t_exact);
  }
  if (const auto& f = map.fit_report()) {
    j["fit"] = {{"boundary_residual", f->boundary_residual},
                {"degree", f->degree},
                {"samples", f->samples},
                {"left_point", f->left_point}};
  }
  return j;
}

template <class T>
std::string value_str(const T& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    return rational_str(v);
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
}

// ---- validate

int cmd_validate(const RunConfig& cfg) {
  StepSet m = load(cfg);
  CovarianceData cov = covariance_angle(m);
  json steps = json::array();
  for (const auto& [kl, w] : m.steps) steps.push_back({{"k", kl.first}, {"l", kl.second}, {"p", rational_str(w)}});
  json j{{"model", cfg.model},
         {"model_hash", model_hash(m)},
         {"steps", steps},
         {"irreducible", m.irreducible},
         {"reducible_override", m.reducible_override},
         {"small_steps", m.small_steps()},
         {"max_neg_jump", m.max_neg_jump},
         {"p11", rational_str(m.p11())},
         {"sigma1", rational_str(cov.sigma1)},
         {"sigma2", rational_str(cov.sigma2)},
         {"sigma12", rational_str(cov.sigma12)},
         {"theta", cov.theta},
         {"pi_over_theta", cov.pi_over_theta},
         {"versions", versions()}};
  emit(cfg.out, j.dump(2) + "\n");
  return 0;
}

// ---- curve

int cmd_curve(const RunConfig& cfg) {
  StepSet m = load(cfg);
  KernelPoly k = kernel_poly(m);
  CurveSample c = trace_s1(k, cfg.points);
  NoZeroReport nz = no_zero_check(k, c, 2000, cfg.seed);
  json head{{"model_hash", model_hash(m)},
            {"points", c.points.size()},
            {"closed", c.closed},
            {"half_period", c.half_period},
            {"self_intersections", self_intersections(c)},
            {"corner_angle_estimate", corner_angle_estimate(c)},
            {"theta", covariance_angle(m).theta},
            {"symmetry_residual", c.symmetry_residual},
            {"max_eta_residual", c.max_eta_residual},
            {"no_zero_min_abs_k", nz.min_abs_k},
            {"seed", cfg.seed},
            {"versions", versions()}};
  std::ostringstream os;
  os << "# " << head.dump() << "\nt,re,im\n";
  for (size_t i = 0; i < c.points.size(); ++i)
    os << value_str(c.t[i]) << ',' << value_str(c.points[i].real()) << ',' << value_str(c.points[i].imag()) << '\n';
  emit(cfg.out, os.str());
  if (!cfg.report.empty()) emit(cfg.report, head.dump(2) + "\n");
  return 0;
}

// ---- map

int cmd_map(const RunConfig& cfg) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  Field f = field_for(map, cfg);
  std::string csv = f == Field::Rational ? to_csv(map.series_exact(cfg.order)) : to_csv(map.series_float(cfg.order));
  emit(cfg.out, csv);
  json j = map_json(m, map);
  j["field"] = to_string(f);
  j["order"] = cfg.order;
  j["versions"] = versions();
  emit_report(cfg, j);
  return 0;
}

// ---- harmonic

template <class T>
int harmonic_in(const RunConfig& cfg, const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec) {
  HarmonicTable<T> h = expand_harmonic<T>(m, map, spec, cfg.window);
  emit(cfg.out, table_csv(h));
  json j = json::parse(h.provenance.json());
  j["versions"] = versions();
  emit_report(cfg, j);
  return 0;
}

int cmd_harmonic(const RunConfig& cfg) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  HarmonicSpec spec = spec_for(cfg);
  if (field_for(map, cfg) == Field::Rational) return harmonic_in<Rational>(cfg, m, map, spec);
  return harmonic_in<double>(cfg, m, map, spec);
}

// ---- verify

std::optional<int> basis_index(const HarmonicSpec& s) {
  if (s.raw_numerator) return std::nullopt;
  int n = 0;
  for (size_t i = 1; i < s.a.size(); ++i) {
    if (sgn(s.a[i]) == 0) continue;
    if (n != 0 || s.a[i] != 1) return std::nullopt;
    n = static_cast<int>(i);
  }
  if (n == 0) return std::nullopt;
  return n;
}

template <class T>
json verify_in(const RunConfig& cfg, const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec) {
  HarmonicTable<T> h = expand_harmonic<T>(m, map, spec, cfg.window);
  LaplacianReport<T> lap = laplacian_residual(h, m);
  bool lap_ok = ScalarTraits<T>::exact ? ScalarTraits<T>::is_zero(lap.max_abs) : lap.relative <= 1e-10;
  json j{{"provenance", json::parse(h.provenance.json())},
         {"laplacian", {{"max_abs", value_str(lap.max_abs)}, {"at", {lap.i, lap.j}}, {"relative", lap.relative}}}};
  bool pass = lap_ok;
  if (auto n = basis_index(spec)) {
    VanishingReport v = vanishing_check(h, *n, m.p11());
    j["vanishing"] = {{"n", *n}, {"pass", v.pass}, {"detail", v.detail}};
    pass = pass && v.pass;
  }
  try {
    CurveSample c = trace_s1(m, cfg.points);
    FunctionalResidual fr = functional_equation_residual(m, map, spec, c, cfg.order, 0.1);
    j["functional_equation"] = {
        {"order", cfg.order}, {"max_abs", fr.max_abs}, {"samples", fr.samples}, {"excluded", fr.excluded}};
  } catch (const Error& e) {
    j["functional_equation"] = json::parse(e.json());
  }
  j["pass"] = pass;
  return j;
}

int cmd_verify(const RunConfig& cfg) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  HarmonicSpec spec = spec_for(cfg);
  json j = field_for(map, cfg) == Field::Rational ? verify_in<Rational>(cfg, m, map, spec)
                                                   : verify_in<double>(cfg, m, map, spec);
  j["versions"] = versions();
  emit(cfg.out, j.dump(2) + "\n");
  return 0;
}

// ---- interpolate

// Boundary rows c_i = h(i,1), d_j = h(1,j) from a table CSV (rational or float columns).
template <class T>
std::pair<std::vector<T>, std::vector<T>> read_boundary(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::map<int, T> c, d;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line.rfind("i,j", 0) == 0) continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) f.push_back(tok);
    if (f.size() != 3 && f.size() != 4) throw Error(ErrorCode::ParseError, "bad table row: " + line);
    int i = std::stoi(f[0]), j = std::stoi(f[1]);
    T v;
    if constexpr (std::is_same_v<T, Rational>) {
      v = f.size() == 4 ? parse_rational(f[2] + "/" + f[3]) : parse_rational(f[2]);
    } else {
      v = f.size() == 4 ? parse_rational(f[2] + "/" + f[3]).get_d() : std::stod(f[2]);
    }
    if (j == 1) c[i] = v;
    if (i == 1) d[j] = v;
  }
  auto dense = [](const std::map<int, T>& row, const char* name) {
    std::vector<T> out;
    for (const auto& [k, v] : row) {
      if (k != static_cast<int>(out.size()) + 1) throw Error(ErrorCode::InconsistentData, std::string(name) + " row has a gap");
      out.push_back(v);
    }
    return out;
  };
  return {dense(c, "h(i,1)"), dense(d, "h(1,j)")};
}

template <class T>
int interpolate_in(const RunConfig& cfg, const std::string& table, const StepSet& m, const ConformalMap& map) {
  auto [c, d] = read_boundary<T>(read_file(table));
  std::optional<std::vector<T>> dd;
  if (!d.empty()) dd = d;
  Interpolation<T> r = interpolate_boundary<T>(m, map, c, dd, cfg.order);
  std::ostringstream os;
  os << (std::is_same_v<T, Rational> ? "n,numerator,denominator\n" : "n,value\n");
  json support = json::array();
  for (int n = 1; n < static_cast<int>(r.a.size()); ++n) {
    const T& a = r.a[static_cast<size_t>(n)];
    if constexpr (std::is_same_v<T, Rational>) {
      os << n << ',' << a.get_num().get_str() << ',' << a.get_den().get_str() << '\n';
      if (sgn(a) != 0) support.push_back(n);
    } else {
      os << n << ',' << value_str(a) << '\n';
      if (std::fabs(a) > 1e-9) support.push_back(n);
    }
  }
  emit(cfg.out, os.str());
  json j = map_json(m, map);
  j["field"] = to_string(ScalarTraits<T>::field);
  j["order"] = cfg.order;
  j["support"] = support;
  j["residual"] = r.residual;
  j["used_c"] = r.used_c;
  j["used_d"] = r.used_d;
  j["versions"] = versions();
  emit_report(cfg, j);
  return 0;
}

int cmd_interpolate(const RunConfig& cfg, const std::string& table) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  if (field_for(map, cfg) == Field::Rational) return interpolate_in<Rational>(cfg, table, m, map);
  return interpolate_in<double>(cfg, table, m, map);
}

// ---- nodal

template <class T>
int nodal_in(const RunConfig& cfg, const std::string& prefix, const StepSet& m, const ConformalMap& map,
             const HarmonicSpec& spec) {
  HarmonicTable<T> h = expand_harmonic<T>(m, map, spec, cfg.window);
  SignReport s = sign_grid(h);
  emit(prefix + ".pgm", sign_pgm(s));
  emit(prefix + ".csv", sign_csv(s));
  int changes = 0;
  for (int r : s.row_changes) changes += r;
  json j{{"provenance", json::parse(h.provenance.json())},
         {"pgm", prefix + ".pgm"},
         {"csv", prefix + ".csv"},
         {"normalization", s.normalization},
         {"negatives", s.negatives},
         {"zeros", s.zeros},
         {"all_positive", s.all_positive},
         {"row_sign_changes", changes},
         {"ray_signs", {{"1/2", ray_sign(s, 0.5)}, {"1", ray_sign(s, 1.0)}, {"2", ray_sign(s, 2.0)}}},
         {"versions", versions()}};
  emit(cfg.out, j.dump(2) + "\n");
  return 0;
}

int cmd_nodal(const RunConfig& cfg, std::string prefix) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  HarmonicSpec spec = spec_for(cfg);
  if (prefix.empty()) prefix = "nodal";
  if (field_for(map, cfg) == Field::Rational) return nodal_in<Rational>(cfg, prefix, m, map, spec);
  return nodal_in<double>(cfg, prefix, m, map, spec);
}

// ---- asymp

std::vector<std::pair<double, double>> parse_samples(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "sample must be x:y, got '" + item + "'");
    out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "no samples");
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_asymp(const RunConfig& cfg, int n, const std::vector<int>& ms, const std::string& samples, int table_window) {
  StepSet m = load(cfg);
  ConformalMap map = map_for(m, cfg);
  ScalingOptions opt;
  opt.window = table_window;
  ScalingReport r = scaling_convergence(m, map, n, parse_samples(samples), ms, opt);
  json rows = json::array();
  for (const ScalingRow& row : r.rows) {
    json ratios = json::array(), table = json::array();
    for (double v : row.ratios) ratios.push_back(finite_or_null(v));
    for (double v : row.table_ratios) table.push_back(finite_or_null(v));
    json jr{{"m", row.m}, {"ratios", ratios}, {"spread", row.spread}, {"mean", row.mean}};
    if (table_window > 0) {
      jr["table_ratios"] = table;
      jr["table_gap"] = row.table_gap;
    }
    rows.push_back(jr);
  }
  json smp = json::array();
  for (auto [x, y] : r.samples) smp.push_back({x, y});
  json j{{"map", map_json(m, map)}, {"n", r.n},   {"theta", r.theta}, {"samples", smp},
         {"rows", rows},           {"c", r.c},   {"monotone", r.monotone}, {"table_window", table_window},
         {"versions", versions()}};
  emit(cfg.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete harmonic functions for quadrant walks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  RunConfig cfg;

  auto common = [&](CLI::App* s) {
    s->add_option("--model", cfg.model, "model file")->required()->check(CLI::ExistingFile);
    s->add_flag("--allow-reducible", cfg.allow_reducible, "admit step sets generating a proper sublattice");
    s->add_option("--out", cfg.out, "main output path (default stdout)");
  };
  auto mapopts = [&](CLI::App* s) {
    s->add_option("--backend", cfg.backend, "explicit|smallstep|bipolar|fit|auto")
        ->check(CLI::IsMember({"explicit", "smallstep", "bipolar", "fit", "auto"}));
    s->add_option("--field", cfg.field, "rational|float (default rational when the map is exact)")
        ->check(CLI::IsMember({"rational", "float"}));
    s->add_option("--report", cfg.report, "JSON report path (default one line on stderr)");
  };
  auto specopts = [&](CLI::App* s) {
    s->add_option("--F", cfg.spec, "t^n, Pn, t or a comma list a1,a2,...");
    s->add_flag("--raw-numerator", cfg.raw_numerator, "read the comma list as the numerator polynomial");
    s->add_option("--window", cfg.window, "table window W")->check(CLI::Range(1, 100000));
  };

  auto* validate = app.add_subcommand("validate", "check a step set and print its covariance data");
  common(validate);

  auto* curve = app.add_subcommand("curve", "trace the boundary curve");
  common(curve);
  curve->add_option("--points", cfg.points, "samples on the curve")->check(CLI::Range(64, 10000000));
  curve->add_option("--seed", cfg.seed, "seed for the kernel no-zero sampling");
  curve->add_option("--report", cfg.report, "JSON header copy");

  auto* mapc = app.add_subcommand("map", "Taylor coefficients of the conformal map at 0");
  common(mapc);
  mapopts(mapc);
  mapc->add_option("--order", cfg.order, "series order")->check(CLI::Range(1, 100000));

  auto* harm = app.add_subcommand("harmonic", "coefficient table of a harmonic function");
  common(harm);
  mapopts(harm);
  specopts(harm);

  auto* verify = app.add_subcommand("verify", "Laplacian, vanishing and boundary checks");
  common(verify);
  mapopts(verify);
  specopts(verify);
  verify->add_option("--order", cfg.order, "truncation order of the boundary series")->check(CLI::Range(1, 100000));
  verify->add_option("--points", cfg.points, "curve samples for the boundary check")->check(CLI::Range(64, 10000000));

  std::string table;
  auto* interp = app.add_subcommand("interpolate", "recover a_n from the boundary rows of a table");
  common(interp);
  mapopts(interp);
  interp->add_option("--table", table, "table CSV as written by `harmonic`")->required()->check(CLI::ExistingFile);
  interp->add_option("--order", cfg.order, "number of coefficients N")->required()->check(CLI::Range(1, 100000));

  std::string prefix;
  auto* nodal = app.add_subcommand("nodal", "sign grid as graymap and CSV");
  common(nodal);
  mapopts(nodal);
  specopts(nodal);
  nodal->add_option("--prefix", prefix, "writes PREFIX.pgm and PREFIX.csv");

  int asymp_n = 1, table_window = 0;
  std::vector<int> ms{10, 50, 200};
  std::string samples = "1:1;1:2;2:1";
  auto* asymp = app.add_subcommand("asymp", "scaling of the Laplace transform against the continuous limit");
  common(asymp);
  asymp->add_option("--backend", cfg.backend, "explicit|smallstep|bipolar|fit|auto")
      ->check(CLI::IsMember({"explicit", "smallstep", "bipolar", "fit", "auto"}));
  asymp->add_option("--n", asymp_n, "basis index")->check(CLI::Range(1, 1000));
  asymp->add_option("--m", ms, "scales")->delimiter(',');
  asymp->add_option("--samples", samples, "x:y pairs separated by ';'");
  asymp->add_option("--window", table_window, "also sum a window table of this size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(cfg);
    if (*curve) return cmd_curve(cfg);
    if (*mapc) return cmd_map(cfg);
    if (*harm) return cmd_harmonic(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*interp) return cmd_interpolate(cfg, table);
    if (*nodal) return cmd_nodal(cfg, prefix);
    if (*asymp) return cmd_asymp(cfg, asymp_n, ms, samples, table_window);
  } catch (const Error& e) {
    std::cerr << e.json() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Runtime"}, {"codes", json::array()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 2;
}
