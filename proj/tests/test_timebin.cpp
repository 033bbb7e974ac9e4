#include "qndmech/timebin.hpp"
#include "qndmech/transfer.hpp"

#include <doctest.h>

#include <cmath>

using namespace qnd;

namespace {

SimConfig config(double kappa_tau, double K1, double K2, double S, double eta = 1.0) {
  SimConfig c;
  c.params = optomechanical_preset();
  c.params.gamma = 0.0;
  c.params.tau = kappa_tau / c.params.kappa;
  c.params.set_gains(K1, K2);
  c.params.squeezing = S;
  c.params.eta = eta;
  c.params.feedforward = K1 / std::sqrt(eta);
  return c;
}

}  // namespace

TEST_CASE("time bins reproduce the full cavity model") {
  for (double eta : {1.0, 0.7}) {
    SimConfig c = config(20.0, 1.0, 3.0, 2.0, eta);
    const auto r = simulate_converged(c, 1e-6);
    CHECK(r.convergence_estimate <= 1e-6);
    CHECK(r.ln == doctest::Approx(model_ln(c.params, {ModelKind::FullCavity})).epsilon(1e-5));
    const Mat4 ref = [&] {
      const auto m = full_cavity_transfer(c.params);
      return Mat4(0.5 * m.A * m.A.transpose() + m.N);
    }();
    CHECK((r.mech_cov - ref).cwiseAbs().maxCoeff() < 1e-4 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("time bins with a thermal bath") {
  SimConfig c = config(20.0, 2.0, 2.0, 2.0, 0.9);
  c.params.gamma = 0.02 / c.params.tau;
  c.params.n_th = 3.0;
  c.bath = true;
  const auto r = simulate_converged(c, 1e-6);
  CHECK(r.ln == doctest::Approx(model_ln(c.params, {ModelKind::FullCavity, true})).epsilon(1e-5));
}

TEST_CASE("time bins beyond the rotating-wave approximation") {
  SimConfig c = config(10.0, 1.0, 4.0, 2.0);
  c.params.omega_m = c.params.kappa / 0.5;
  c.rwa = false;
  c.n_bins = 512;
  const auto r = simulate_converged(c, 1e-6);
  CHECK(r.ln == doctest::Approx(model_ln(c.params, {ModelKind::NonRWA})).epsilon(1e-5));
  CHECK(std::abs(r.ln - model_ln(c.params, {ModelKind::FullCavity})) > 1e-3);
}

TEST_CASE("integrator orders") {
  SimConfig c = config(20.0, 1.0, 3.0, 2.0);
  const double exact = model_ln(c.params, {ModelKind::FullCavity});
  auto error = [&](Integrator integrator, int n) {
    c.integrator = integrator;
    c.n_bins = n;
    return std::abs(simulate_once(c).ln - exact);
  };
  // Halving the step cuts the error by about 2 (first order) or 4 (Strang).
  CHECK(error(Integrator::FirstOrder, 256) / error(Integrator::FirstOrder, 512) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(error(Integrator::Strang, 256) / error(Integrator::Strang, 512) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("first-moment probes") {
  SimConfig c = config(30.0, 1.5, 2.0, 1.0);
  c.n_bins = 8192;
  const auto fm = extract_first_moments(c);
  const auto model = full_cavity_transfer(c.params);
  CHECK((fm.mechanical() - model.A).cwiseAbs().maxCoeff() < 1e-5);
  const double e = std::exp(-30.0);
  const double K1 = c.params.K1(), K2 = c.params.K2(), Kf = c.params.feedforward;
  CHECK(fm.transfer(0, 4) == doctest::Approx(K2 * Kf * (1.0 - (1.0 - e) / 30.0)).epsilon(1e-5));
  CHECK(fm.transfer(3, 1) == doctest::Approx(-K1 * K2 * (1.0 + e - 2.0 / 30.0 * (1.0 - e))).epsilon(1e-5));
}

TEST_CASE("physicality holds after every bin") {
  SimConfig c = config(5.0, 3.0, 3.0, 4.0, 0.8);
  c.check_every_step = true;
  c.n_bins = 64;
  CHECK_NOTHROW(simulate_once(c));
}

TEST_CASE("filters and configuration errors") {
  SimConfig c = config(20.0, 1.0, 3.0, 2.0);
  c.n_bins = 256;
  const double flat = simulate_once(c).ln;
  c.filter.assign(256, 1.0);
  CHECK(simulate_once(c).ln == doctest::Approx(flat).epsilon(1e-12));
  c.filter.assign(3, 0.0);
  CHECK_THROWS(simulate_once(c));
  c.filter.clear();
  c.n_bins = 0;
  CHECK_THROWS(simulate_once(c));
}
