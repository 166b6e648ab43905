#ifndef QHARM_ASYMPTOTICS_HPP
#define QHARM_ASYMPTOTICS_HPP

#include <utility>
#include <vector>

#include "qharm/conformal_maps.hpp"
#include "qharm/harmonic.hpp"
#include "qharm/walk_model.hpp"

namespace qharm {

// Im((x/sin(theta) + y cot(theta) + i y)^(n pi/theta)), principal branch
double continuous_harmonic(int n, double theta, double x, double y);

// Laplace transform of continuous_harmonic at (x, y), closed form
double continuous_laplace(int n, double theta, double x, double y);

struct LaplaceValue {
  double value = 0.0;
  double tail = 0.0;  // bound on the part of the sum outside the window
};

// sum over the window of h(i,j) exp(-(i x + j y)) with a tail bound from the envelope
// |h(i,j)| <= C (i+j)^gamma fitted on the outer rim; TailDominates above tail_limit * |sum|
template <class T>
LaplaceValue table_laplace(const HarmonicTable<T>& h, double x, double y, double gamma, double tail_limit = 0.01);

// The same transform from the generating function: exp(-(x+y)) H(exp(-x), exp(-y))
double generating_laplace(const StepSet& m, const ConformalMap& map, const HarmonicSpec& spec, double x, double y);

struct ScalingOptions {
  int window = 0;  // > 0 also sums the window table as a cross-check
};

struct ScalingRow {
  int m = 0;
  std::vector<double> ratios;        // per sample, nan for excluded samples
  std::vector<double> table_ratios;  // window route, nan where the tail dominates
  double spread = 0.0;               // (max - min) / |mean| over the kept samples
  double mean = 0.0;
  double table_gap = 0.0;            // max relative gap between the two routes where both exist
};

struct ScalingReport {
  int n = 0;
  double theta = 0.0;
  std::vector<std::pair<double, double>> samples;
  std::vector<ScalingRow> rows;
  bool monotone = true;  // spread nonincreasing in m
  double c = 0.0;        // mean ratio at the largest m
};

// R(m; x, y) = Lh(x/m, y/m) / (m^(n pi/theta + 2) L h^sigma(x, y)) for h = h_n
ScalingReport scaling_convergence(const StepSet& m, const ConformalMap& map, int n,
                                  const std::vector<std::pair<double, double>>& samples, const std::vector<int>& m_list,
                                  const ScalingOptions& opt = {});

}  // namespace qharm

#endif
