#pragma once

#include <cmath>
#include <string>

namespace qnd {

/// Physical and protocol parameters. Rates are angular (rad/s), tau in seconds.
/// Only the couplings and the feedforward gain are stored; the pulse-area
/// gains K1, K2 and the feedforward rate g_f are always derived on demand.
struct ProtocolParams {
  double kappa = 0.0;       // cavity amplitude decay rate
  double gamma = 0.0;       // mechanical damping rate
  double omega_m = 0.0;     // mechanical frequency
  double g1 = 0.0;          // enhanced coupling, cavity 1 (X p type)
  double g2 = 0.0;          // enhanced coupling, cavity 2 (Y q type)
  double tau = 0.0;         // pulse duration
  double squeezing = 1.0;   // amplitude factor S: X -> S X, Y -> Y / S
  double eta = 1.0;         // transmittivity between the cavities
  double n_th = 0.0;        // bath occupation
  double feedforward = 0.0; // K_f

  double K1() const { return g1 * std::sqrt(2.0 * tau / kappa); }
  double K2() const { return g2 * std::sqrt(2.0 * tau / kappa); }
  double gf() const { return feedforward * std::sqrt(kappa / (2.0 * tau)); }
  /// Thermal decoherence per pulse, 2 gamma tau n_th.
  double Gamma() const { return 2.0 * gamma * tau * n_th; }
  double kappa_tau() const { return kappa * tau; }

  /// Sets g1, g2 so that the derived gains equal K1, K2 at the current kappa, tau.
  void set_gains(double K1, double K2);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Optomechanical hardware point used throughout the figures:
/// kappa/2pi = 221.5 MHz, gamma/2pi = 328 Hz, tau = 4.5 us.
ProtocolParams optomechanical_preset();

double squeezing_from_db(double db);
double squeezing_to_db(double factor);

}  // namespace qnd
