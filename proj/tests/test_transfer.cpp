#include "qndmech/gaussian.hpp"
#include "qndmech/transfer.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace qnd;

namespace {

ProtocolParams base(double kappa_tau, double K1, double K2, double S, double eta = 1.0) {
  ProtocolParams p = optomechanical_preset();
  p.gamma = 0.0;
  p.tau = kappa_tau / p.kappa;
  p.set_gains(K1, K2);
  p.squeezing = S;
  p.eta = eta;
  p.feedforward = K1 / std::sqrt(eta);
  return p;
}

Mat4 output_cov(const TransferModel& m) { return 0.5 * m.A * m.A.transpose() + m.N; }

double coefficient(const TransferModel& m, const std::string& source, const std::string& target) {
  for (const auto& e : m.coefficients)
    if (e.source == source && e.target == target) return e.coefficient;
  return std::numeric_limits<double>::quiet_NaN();
}

// The idealised protocol assembled from elementary Gaussian operations:
// squeezed light, QND with mode 1, loss, QND with mode 2, homodyne + feedforward.
Mat gate_sequence(const ProtocolParams& p) {
  GaussianState s = make_vacuum(4);  // m1, m2, light, loss port
  s = apply_symplectic(s, squeeze_map(p.squeezing, 2));
  s = apply_symplectic(s, qnd_map(-p.K1(), 2, Quadrature::Q, 0, Quadrature::Q));
  s = apply_symplectic(s, beamsplitter_map(p.eta, 2, 3));
  s = apply_symplectic(s, qnd_map(p.K2(), 1, Quadrature::Q, 2, Quadrature::Q));
  s = feedforward_displace(s, 2, Quadrature::Q, p.feedforward, 0, Quadrature::Q);
  return partial_trace(s, {0, 1}).cov;
}

}  // namespace

TEST_CASE("adiabatic model equals the elementary gate sequence") {
  for (double eta : {1.0, 0.8, 0.4})
    for (double S : {1.0, 2.5, 10.0})
      for (auto [K1, K2] : {std::pair{1.0, 8.0}, {3.0, 0.5}, {2.0, 2.0}}) {
        ProtocolParams p = base(1e3, K1, K2, S, eta);
        p.feedforward = 0.7 * K1;
        CHECK((output_cov(adiabatic_transfer(p)) - gate_sequence(p)).cwiseAbs().maxCoeff() < 1e-12);
      }
}

TEST_CASE("feedforward cancels the amplitude input") {
  for (double eta : {1.0, 0.9, 0.5}) {
    const ProtocolParams p = base(1e3, 2.0, 3.0, 4.0, eta);
    CHECK(std::abs(coefficient(adiabatic_transfer(p), "x_in", "q1")) < 1e-12);
  }
}

TEST_CASE("full cavity closed form") {
  for (double T : {0.5, 3.0, 40.0, 2000.0}) {
    const ProtocolParams p = base(T, 1.3, 2.1, 2.0);
    const auto m = full_cavity_transfer(p);
    const double e = std::exp(-T), K1 = p.K1(), K2 = p.K2(), Kf = p.feedforward;
    CHECK(m.A(0, 2) == doctest::Approx(K2 * Kf * (1.0 - (1.0 - e) / T)).epsilon(1e-12));
    CHECK(m.A(3, 1) == doctest::Approx(-K1 * K2 * (1.0 + e - 2.0 / T * (1.0 - e))).epsilon(1e-12));
    CHECK(coefficient(m, "X2(0)", "q1") == doctest::Approx(2.0 * p.gf() / p.kappa * (1.0 - e)).epsilon(1e-12));
    CHECK(physicality_check(output_cov(m)).pass);
  }
}

TEST_CASE("full cavity tends to the adiabatic model") {
  const ProtocolParams p = base(1e9, 1.0, 8.0, 3.0, 0.8);
  CHECK((output_cov(full_cavity_transfer(p)) - output_cov(adiabatic_transfer(p))).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("cascade engine agrees with the closed form") {
  for (double eta : {1.0, 0.6}) {
    ProtocolParams p = base(25.0, 1.0, 4.0, 2.0, eta);
    const Mat4 closed = output_cov(full_cavity_transfer(p));
    // Exact-bath path runs the engine; a negligible gamma leaves only its numerics.
    p.gamma = 1e-13 / p.tau;
    const Mat4 engine = output_cov(full_cavity_transfer(p, true));
    CHECK((closed - engine).cwiseAbs().maxCoeff() < 1e-10 * closed.cwiseAbs().maxCoeff());
    // Far from the sideband limit the counter-rotating terms average out.
    ProtocolParams q = base(25.0, 1.0, 4.0, 2.0, eta);
    q.omega_m = 1e5 * q.kappa;
    CHECK((closed - output_cov(nonrwa_transfer(q))).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("back-action integral") {
  const double k = 2.0, w = 7.0, s = 0.3, t = 1.9;
  const int n = 20000;
  const double h = (t - s) / n;
  double ref = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = s + i * h;
    ref += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * std::exp(-k * x) * std::sin(2.0 * w * x);
  }
  ref *= h / 3.0;
  CHECK(backaction_integral(k, w, s, t) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("bath variants") {
  ProtocolParams p = base(1e3, 2.0, 2.0, 3.0);
  p.gamma = 1e-4 / p.tau;
  p.n_th = 10.0;
  const auto none = adiabatic_transfer(p);
  const auto lin = adiabatic_transfer(p, true, BathVariant::Linear);
  const double unit = p.gamma * p.tau * (p.n_th + 0.5);
  CHECK((lin.N - none.N)(0, 0) == doctest::Approx(2.0 * unit + 0.0).epsilon(1e-12));
  CHECK((lin.N - none.N)(1, 1) == doctest::Approx(2.0 * unit).epsilon(1e-12));
  CHECK((lin.N - none.N)(2, 2) == doctest::Approx(unit).epsilon(1e-12));
  const double e_exact = model_ln(p, {ModelKind::AdiabaticIdeal, true, BathVariant::Exact});
  CHECK(e_exact < model_ln(p, {}));
  CHECK(e_exact == doctest::Approx(model_ln(p, {ModelKind::AdiabaticIdeal, true, BathVariant::Linear})).epsilon(0.05));
}

TEST_CASE("closed-form estimates") {
  ProtocolParams p = base(1e3, 2.0, 2.0, 3.0);
  CHECK(adiabatic_bath_ln(p) == doctest::Approx(approx_ln(p)).epsilon(1e-15));
  p.gamma = 1.0 / p.tau;
  p.n_th = 0.01;
  CHECK(adiabatic_bath_ln(p) < approx_ln(p));
  p.set_gains(1.0, 2.0);
  CHECK_THROWS_AS(adiabatic_bath_ln(p), std::invalid_argument);
  p.feedforward = 0.5;
  CHECK(optimal_squeezing(p) == doctest::Approx(4.0));
}

TEST_CASE("non-physical output is flagged") {
  TransferModel m;
  m.N = -0.4 * Mat4::Identity();
  const auto r = ln_from_transfer(m, make_vacuum(2));
  CHECK_FALSE(r.physicality.pass);
  CHECK(std::isnan(r.ln));
}

TEST_CASE("parameter validation") {
  ProtocolParams p = base(10.0, 1.0, 1.0, 1.0);
  p.eta = 1.2;
  CHECK_THROWS_AS(model_ln(p, {}), std::invalid_argument);
  p = base(10.0, 1.0, 1.0, 1.0);
  p.squeezing = 0.0;
  CHECK_THROWS_AS(model_ln(p, {ModelKind::FullCavity}), std::invalid_argument);
  p = base(10.0, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(model_ln(p, {ModelKind::NonRWA}), std::invalid_argument);  // omega_m unset
}

TEST_CASE("full cavity approaches the adiabatic model as 1/(kappa tau)") {
  double previous = 0.0;
  for (double T : {1e3, 1e4, 1e5}) {
    const ProtocolParams p = base(T, 1.0, 8.0, 4.315);
    const double d = (full_cavity_transfer(p).A - adiabatic_transfer(p).A).cwiseAbs().maxCoeff();
    // Leading correction of the p1 -> p2 coupling is 2 K1 K2 / (kappa tau).
    CHECK(d * T == doctest::Approx(2.0 * 1.0 * 8.0).epsilon(1e-3));
    if (previous > 0.0) CHECK(previous / d == doctest::Approx(10.0).epsilon(1e-3));
    previous = d;
  }
}
