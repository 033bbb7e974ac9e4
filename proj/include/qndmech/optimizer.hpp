#pragma once

// Maximisation of the logarithmic negativity over (tau, K1, K2, Kf, S) under a
// ceiling g1, g2 <= g_max on the enhanced couplings.
//
// Internal coordinates: log10(kappa tau), u1, u2 in [0, 1] with
// K_i = u_i g_max sqrt(2 kappa tau) (g_max in units of kappa), the feedforward
// ratio rho = Kf sqrt(eta) / K1 and the squeezing in dB. The coupling ceiling
// is then the box face u_i = 1.

#include "qndmech/params.hpp"
#include "qndmech/transfer.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qnd {

struct SearchSpace {
  ProtocolParams hardware;  // kappa, gamma, omega_m, n_th, eta are used
  ModelOptions model{ModelKind::FullCavity, false, BathVariant::Exact};
  double g_max = 0.0;  // units of kappa
  double kappa_tau_min = 1.0;
  double kappa_tau_max = 1e4;
  double squeezing_db_min = 0.0;
  double squeezing_db_max = 12.7;
  double kf_ratio_min = 0.0;
  double kf_ratio_max = 2.0;
  int seeds = 200;
  int refinements = 4;
  int max_iterations = 3000;
  std::uint64_t seed = 1;
  std::optional<ProtocolParams> warm_start;

  void validate() const;
};

using SearchPoint = std::array<double, 5>;

struct TraceEntry {
  SearchPoint x;
  double value = 0.0;  // -ln(2 nu_-) before clamping; NaN when infeasible
  bool feasible = false;
};

struct OptimizationResult {
  ProtocolParams best;
  double best_ln = 0.0;
  SearchPoint best_x{};
  int evaluations = 0;
  bool feasible = false;
  std::vector<TraceEntry> trace;
};

/// Protocol parameters for a point of the search space; nullopt if outside it.
std::optional<ProtocolParams> decode_point(const SearchSpace& space, const SearchPoint& x);

/// Latin-hypercube seeding followed by Nelder-Mead refinement of the best seeds.
OptimizationResult optimize(const SearchSpace& space);

/// One optimisation per ceiling, each warm-started from the previous optimum.
std::vector<OptimizationResult> optimize_ladder(SearchSpace space, const std::vector<double>& g_max);

struct GridAxis {
  std::string name;  // squeezing_db, K1, K2, Kf, eta, n_th, kappa_tau, tau_us
  std::vector<double> values;
};

struct SweepRow {
  std::vector<double> coords;
  double ln = 0.0;
};

/// Dense evaluation, last axis fastest. Rejects grids above 1e7 points.
std::vector<SweepRow> sweep(const ProtocolParams& base, const ModelOptions& model,
                            const std::vector<GridAxis>& axes);

/// Applies one named axis value; gains are held fixed as K when tau changes.
void set_sweep_parameter(ProtocolParams& p, const std::string& name, double value);

}  // namespace qnd
