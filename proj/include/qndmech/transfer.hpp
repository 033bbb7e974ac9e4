#pragma once

// Affine Gaussian channels on the two mechanical modes (q1, p1, q2, p2)
// produced by one run of the pulsed protocol: squeezed pulse through cavity 1,
// lossy link, cavity 2, homodyne of the flat output mode and feedforward onto q1.

#include "qndmech/gaussian.hpp"
#include "qndmech/params.hpp"

#include <string>
#include <vector>

namespace qnd {

enum class ModelKind { AdiabaticIdeal, FullCavity, NonRWA };

/// How mechanical damping is accounted for when the bath is enabled.
///   Exact:  mean decay e^{-gamma t/2} and bath noise resolved in time.
///   Linear: no decay; each quadrature gains gamma * t_exposed * (2 n_th + 1) / 2
///           after the pulse (mode 1 is exposed for 2 tau, mode 2 for tau).
enum class BathVariant { Exact, Linear };

struct ModelOptions {
  ModelKind kind = ModelKind::AdiabaticIdeal;
  bool bath = false;
  BathVariant bath_variant = BathVariant::Exact;
};

struct CoefficientEntry {
  std::string source;
  std::string target;
  double coefficient = 0.0;
};

struct TransferModel {
  Mat4 A = Mat4::Identity();
  Mat4 N = Mat4::Zero();
  std::vector<CoefficientEntry> coefficients;
};

struct SimResult {
  Mat4 mech_cov = Mat4::Zero();
  double ln = 0.0;
  PhysicalityReport physicality;
  std::vector<CoefficientEntry> coefficients;
  // Filled by the time-bin simulator only.
  double convergence_estimate = 0.0;
  int n_bins = 0;
};

TransferModel adiabatic_transfer(const ProtocolParams& p, bool bath = false,
                                 BathVariant variant = BathVariant::Exact);
TransferModel full_cavity_transfer(const ProtocolParams& p, bool bath = false,
                                   BathVariant variant = BathVariant::Exact);
/// Counter-rotating terms kept. Bath and loss are accepted as well.
TransferModel nonrwa_transfer(const ProtocolParams& p, bool bath = false,
                              BathVariant variant = BathVariant::Exact);
TransferModel build_transfer(const ProtocolParams& p, const ModelOptions& options);

/// int_s^tau e^{-kappa t} sin(2 omega_m t) dt.
double backaction_integral(double kappa, double omega_m, double s, double tau);

/// -ln( sqrt(1 + K2^2/S^2) / (2 K1 K2) ); may be negative.
double approx_ln(const ProtocolParams& p);
/// Bath-corrected estimate for K1 = K2 = K with Gamma = 2 gamma tau n_th.
double adiabatic_bath_ln(const ProtocolParams& p);
/// Squeezing |K2 / (K1 - Kf sqrt(eta))| that maximises the adiabatic estimate.
double optimal_squeezing(const ProtocolParams& p);

/// V_out = A V_in A^T + N and its logarithmic negativity. A non-physical output
/// is flagged in the result (ln is NaN) rather than thrown.
SimResult ln_from_transfer(const TransferModel& model, const GaussianState& initial);

/// Shorthand: build the model and evaluate it on the two-mode vacuum.
double model_ln(const ProtocolParams& p, const ModelOptions& options);

}  // namespace qnd
