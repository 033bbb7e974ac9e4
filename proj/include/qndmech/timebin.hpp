#pragma once

// Time-bin simulator. The travelling pulse is cut into N bins of length
// tau/N; each bin is a fresh squeezed-vacuum mode that collides with cavity 1,
// crosses the lossy link, collides with cavity 2 and is folded into the
// detected temporal mode. Only one bin is alive at a time, so the state never
// grows beyond 6 modes: m1, c1, m2, c2, current bin, accumulated mode.
//
// Both cavities are run in their own local time with the same bin index; the
// two interactions touch disjoint subsystems, so this is equivalent to
// sending the whole pulse through cavity 1 before it reaches cavity 2.

#include "qndmech/params.hpp"
#include "qndmech/transfer.hpp"

#include <vector>

namespace qnd {

enum class Integrator {
  Strang,     // half coherent step, collision, half coherent step (second order)
  FirstOrder  // coherent step then collision
};

struct SimConfig {
  ProtocolParams params;
  int n_bins = 256;
  bool rwa = true;
  bool bath = false;
  Integrator integrator = Integrator::Strang;
  /// Detection filter sampled uniformly over the pulse; empty means flat.
  std::vector<double> filter;
  /// Checks physicality after every bin (aborts with the bin index).
  bool check_every_step = false;
};

/// Runs at N and 2N bins and reports the 2N result with |E(N) - E(2N)|.
SimResult simulate(const SimConfig& config);

/// Doubles N from config.n_bins until the estimate is at most tolerance or
/// max_bins is reached. The returned estimate is never hidden.
SimResult simulate_converged(SimConfig config, double tolerance, int max_bins = 1 << 20);

/// Single run at exactly config.n_bins without a convergence estimate.
SimResult simulate_once(const SimConfig& config);

struct FirstMoments {
  /// Rows (q1, p1, q2, p2) after the protocol; columns are unit initial
  /// displacements of (q1, p1, X1, Y1, q2, p2, X2, Y2).
  Eigen::Matrix<double, 4, 8> transfer;
  Mat4 mechanical() const;
};

FirstMoments extract_first_moments(const SimConfig& config);

}  // namespace qnd
