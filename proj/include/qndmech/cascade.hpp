#pragma once

// Exact second-moment solver for cascaded linear systems
//
//   dx_j/dt = -d_j x_j + sum_{i<j} M_ji(t) x_i + sum_s b_sj xi_s(t),
//
// where every coupling is a constant plus a sinusoid and the xi_s are
// independent unit white noises. Variables must be listed so that couplings
// only point forward (from lower to higher index), which makes the adjoint
// equations solvable one variable at a time in closed form.

#include "qndmech/exp_poly.hpp"
#include "qndmech/gaussian.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qnd {

struct CascadeCoupling {
  int to = 0;
  int from = 0;
  double constant = 0.0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
  double freq = 0.0;  // angular frequency of the modulation in forward time
};

struct CascadeSource {
  std::string name;
  std::vector<std::pair<int, double>> entries;  // (variable, amplitude)
};

struct CascadeSystem {
  std::vector<std::string> names;
  std::vector<double> decay;
  std::vector<CascadeCoupling> couplings;
  std::vector<CascadeSource> sources;
  std::vector<int> outputs;

  int size() const { return static_cast<int>(names.size()); }
  int add_variable(const std::string& name, double rate);
  void couple(int to, int from, double constant, double cos_amp = 0.0, double sin_amp = 0.0,
              double freq = 0.0);
};

struct CascadeSolution {
  Mat transfer;            // outputs x variables, x_out(T) = transfer * x(0) + noise
  std::vector<Mat> grams;  // per source, outputs x outputs, int k k^T for unit intensity
  std::size_t max_terms = 0;
};

/// Solves on [0, horizon]. Internally rescales time so that the horizon is 1.
CascadeSolution solve_cascade(const CascadeSystem& system, double horizon);

}  // namespace qnd
