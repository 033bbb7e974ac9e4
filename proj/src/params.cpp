#include "qndmech/params.hpp"

#include <numbers>
#include <stdexcept>

namespace qnd {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid parameter: " + what);
}

}  // namespace

void ProtocolParams::set_gains(double K1, double K2) {
  const double scale = std::sqrt(kappa / (2.0 * tau));
  g1 = K1 * scale;
  g2 = K2 * scale;
}

void ProtocolParams::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be non-negative");
  require(std::isfinite(omega_m) && omega_m >= 0.0, "omega_m must be non-negative");
  require(std::isfinite(g1) && g1 >= 0.0, "g1 must be non-negative");
  require(std::isfinite(g2) && g2 >= 0.0, "g2 must be non-negative");
  require(std::isfinite(squeezing) && squeezing > 0.0, "squeezing must be positive");
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  require(std::isfinite(n_th) && n_th >= 0.0, "n_th must be non-negative");
  require(std::isfinite(feedforward), "feedforward must be finite");
}

ProtocolParams optomechanical_preset() {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ProtocolParams p;
  p.kappa = two_pi * 221.5e6;
  p.gamma = two_pi * 328.0;
  p.tau = 4.5e-6;
  return p;
}

double squeezing_from_db(double db) { return std::pow(10.0, db / 20.0); }
double squeezing_to_db(double factor) { return 20.0 * std::log10(factor); }

}  // namespace qnd
