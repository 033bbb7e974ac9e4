#include "qndmech/transfer.hpp"

#include "qndmech/cascade.hpp"
#include "qndmech/exp_poly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qnd {

namespace {

constexpr int kQ1 = 0, kP1 = 1, kQ2 = 2, kP2 = 3, kF = 4;
const char* const kMechNames[] = {"q1", "p1", "q2", "p2"};

// Channel on (q1, p1, q2, p2, F) before feedforward. F is the flat-mode X
// quadrature of the second cavity's output and starts at zero.
struct PreChannel {
  Mat A = Mat::Zero(5, 4);
  Mat N = Mat::Zero(5, 5);
  std::vector<std::pair<std::string, Vec>> columns;  // cavity initial variables
  std::vector<std::pair<std::string, Mat>> noises;   // per-source covariance
};

void symmetrize_n(Mat4& m) { m = (0.5 * (m + m.transpose())).eval(); }

double occupation_half(const ProtocolParams& p) { return p.n_th + 0.5; }

// Mode 1 keeps decaying while the second pulse runs, then q1 += Kf F.
TransferModel finalize(PreChannel pre, const ProtocolParams& p, bool bath) {
  Mat D = Mat::Identity(5, 5);
  if (bath) {
    const double decay = std::exp(-0.5 * p.gamma * p.tau);
    D(kQ1, kQ1) = D(kP1, kP1) = decay;
  }
  Mat L = Mat::Identity(5, 5);
  L(kQ1, kF) = p.feedforward;
  const Mat LD = L * D;

  Mat N5 = D * pre.N * D.transpose();
  if (bath) {
    const double added = (1.0 - std::exp(-p.gamma * p.tau)) * occupation_half(p);
    N5(kQ1, kQ1) += added;
    N5(kP1, kP1) += added;
  }
  N5 = L * N5 * L.transpose();

  TransferModel m;
  m.A = (LD * pre.A).topRows(4);
  m.N = N5.topLeftCorner(4, 4);
  symmetrize_n(m.N);

  for (const auto& [name, col] : pre.columns) {
    const Vec c = LD * col;
    for (int r = 0; r < 4; ++r)
      if (std::abs(c(r)) > 0.0) m.coefficients.push_back({name, kMechNames[r], c(r)});
  }
  for (const auto& [name, cov] : pre.noises) {
    const Mat c = LD * cov * LD.transpose();
    for (int r = 0; r < 4; ++r)
      if (c(r, r) > 0.0)
        m.coefficients.push_back({name + " (rms)", kMechNames[r], std::sqrt(2.0 * c(r, r))});
  }
  return m;
}

void add_linear_bath(TransferModel& m, const ProtocolParams& p) {
  const double rate = p.gamma * occupation_half(p);
  for (int r = 0; r < 2; ++r) m.N(r, r) += rate * 2.0 * p.tau;
  for (int r = 2; r < 4; ++r) m.N(r, r) += rate * p.tau;
}

void add_column(PreChannel& pre, const std::string& name, Vec col) {
  pre.N += 0.5 * col * col.transpose();
  pre.columns.emplace_back(name, std::move(col));
}

void add_noise(PreChannel& pre, const std::string& name, Mat cov) {
  pre.N += cov;
  pre.noises.emplace_back(name, std::move(cov));
}

// Solves an engine whose outputs are (q1, p1, q2, p2, F) and whose first
// four state variables listed in `mech` are the mechanical quadratures.
PreChannel assemble_engine(const CascadeSystem& sys, double horizon, const int (&mech)[4],
                           const std::vector<int>& cavity_vars, const std::vector<double>& mult) {
  const CascadeSolution sol = solve_cascade(sys, horizon);
  PreChannel pre;
  for (int c = 0; c < 4; ++c) pre.A.col(c) = sol.transfer.col(mech[c]);
  for (int v : cavity_vars) add_column(pre, sys.names[v] + "(0)", sol.transfer.col(v));
  for (std::size_t s = 0; s < sys.sources.size(); ++s)
    add_noise(pre, sys.sources[s].name, mult[s] * sol.grams[s]);
  return pre;
}

// Cavity model in units of 1/kappa; counter-rotating terms scaled by `crt`.
PreChannel cavity_engine(const ProtocolParams& p, bool bath, double crt) {
  const double T = p.kappa_tau();
  const double G1 = p.g1 / p.kappa, G2 = p.g2 / p.kappa;
  const double w = 2.0 * p.omega_m / p.kappa;
  const double se = std::sqrt(p.eta), sl = std::sqrt(1.0 - p.eta);
  const double md = bath ? 0.5 * p.gamma / p.kappa : 0.0;
  const double rt = std::sqrt(T);

  CascadeSystem s;
  const int X1 = s.add_variable("X1", 1.0);
  const int q1 = s.add_variable("q1", md);
  const int p1 = s.add_variable("p1", md);
  const int Y1 = s.add_variable("Y1", 1.0);
  const int Y2 = s.add_variable("Y2", 1.0);
  const int q2 = s.add_variable("q2", md);
  const int p2 = s.add_variable("p2", md);
  const int X2 = s.add_variable("X2", 1.0);
  const int F = s.add_variable("F", 0.0);

  s.couple(q1, X1, -G1, crt * G1, 0.0, w);
  s.couple(p1, X1, 0.0, 0.0, crt * G1, w);
  s.couple(Y1, q1, 0.0, 0.0, crt * G1, w);
  s.couple(Y1, p1, G1, -crt * G1, 0.0, w);
  s.couple(Y2, Y1, 2.0 * se);
  s.couple(q2, Y2, 0.0, 0.0, crt * G2, w);
  s.couple(p2, Y2, -G2, -crt * G2, 0.0, w);
  s.couple(X2, q2, G2, crt * G2, 0.0, w);
  s.couple(X2, p2, 0.0, 0.0, crt * G2, w);
  s.couple(X2, X1, 2.0 * se);
  s.couple(F, X2, std::sqrt(2.0) / rt);
  s.couple(F, X1, -se * std::sqrt(2.0) / rt);

  const double S2 = p.squeezing * p.squeezing;
  std::vector<double> mult;
  s.sources.push_back({"x_in", {{X1, std::sqrt(2.0)}, {X2, -std::sqrt(2.0) * se}, {F, se / rt}}});
  mult.push_back(0.5 * S2);
  s.sources.push_back({"y_in", {{Y1, std::sqrt(2.0)}, {Y2, -std::sqrt(2.0) * se}}});
  mult.push_back(0.5 / S2);
  if (p.eta < 1.0) {
    s.sources.push_back({"x_loss", {{X2, std::sqrt(2.0) * sl}, {F, -sl / rt}}});
    mult.push_back(0.5);
    s.sources.push_back({"y_loss", {{Y2, std::sqrt(2.0) * sl}}});
    mult.push_back(0.5);
  }
  if (bath && p.gamma > 0.0) {
    const double m = p.gamma / p.kappa * occupation_half(p);
    for (int v : {q1, p1, q2, p2}) {
      s.sources.push_back({"bath_" + s.names[v], {{v, 1.0}}});
      mult.push_back(m);
    }
  }
  s.outputs = {q1, p1, q2, p2, F};
  const int mech[4] = {q1, p1, q2, p2};
  return assemble_engine(s, T, mech, {X1, Y1, Y2, X2}, mult);
}

// Adiabatically eliminated cavities with a time-resolved bath; units of tau.
PreChannel adiabatic_bath_engine(const ProtocolParams& p) {
  const double K1 = p.K1(), K2 = p.K2();
  const double se = std::sqrt(p.eta), sl = std::sqrt(1.0 - p.eta);
  const double md = 0.5 * p.gamma * p.tau;

  CascadeSystem s;
  const int q1 = s.add_variable("q1", md);
  const int p1 = s.add_variable("p1", md);
  const int q2 = s.add_variable("q2", md);
  const int p2 = s.add_variable("p2", md);
  const int F = s.add_variable("F", 0.0);
  s.couple(p2, p1, -K1 * K2 * se);
  s.couple(F, q2, K2);

  const double S2 = p.squeezing * p.squeezing;
  std::vector<double> mult;
  s.sources.push_back({"x_in", {{q1, -K1}, {F, se}}});
  mult.push_back(0.5 * S2);
  s.sources.push_back({"y_in", {{p2, -K2 * se}}});
  mult.push_back(0.5 / S2);
  s.sources.push_back({"x_loss", {{F, sl}}});
  mult.push_back(0.5);
  s.sources.push_back({"y_loss", {{p2, -K2 * sl}}});
  mult.push_back(0.5);
  const double m = p.gamma * p.tau * occupation_half(p);
  for (int v : {q1, p1, q2, p2}) {
    s.sources.push_back({"bath_" + s.names[v], {{v, 1.0}}});
    mult.push_back(m);
  }
  s.outputs = {q1, p1, q2, p2, F};
  const int mech[4] = {q1, p1, q2, p2};
  return assemble_engine(s, 1.0, mech, {}, mult);
}

// Variance of int_0^T k(v) xi(v) dv for unit white noise of intensity 1/2.
double kernel_variance(const ExpPoly& k, double horizon) {
  return 0.5 * inner_product(k, k, horizon).real();
}

ExpPoly kernel(double flat, double decaying, double ramp) {
  // flat + decaying e^{-v} + ramp v e^{-v}
  return ExpPoly::constant(flat) + ExpPoly::term(decaying, 0, 1.0) + ExpPoly::term(ramp, 1, 1.0);
}

}  // namespace

TransferModel adiabatic_transfer(const ProtocolParams& p, bool bath, BathVariant variant) {
  p.validate();
  if (bath && variant == BathVariant::Exact && p.gamma > 0.0)
    return finalize(adiabatic_bath_engine(p), p, true);

  const double K1 = p.K1(), K2 = p.K2(), Kf = p.feedforward, S = p.squeezing;
  const double se = std::sqrt(p.eta), sl = std::sqrt(1.0 - p.eta);
  TransferModel m;
  m.A(kQ1, kQ2) = K2 * Kf;
  m.A(kP2, kP1) = -K1 * K2 * se;
  const double cx = -S * (K1 - Kf * se), cxl = Kf * sl;
  const double cy = -K2 * se / S, cyl = -K2 * sl;
  m.N(kQ1, kQ1) = 0.5 * (cx * cx + cxl * cxl);
  m.N(kP2, kP2) = 0.5 * (cy * cy + cyl * cyl);
  m.coefficients = {{"x_in", "q1", cx}, {"x_loss", "q1", cxl}, {"y_in", "p2", cy},
                    {"y_loss", "p2", cyl}};
  if (bath) add_linear_bath(m, p);
  return m;
}

TransferModel full_cavity_transfer(const ProtocolParams& p, bool bath, BathVariant variant) {
  p.validate();
  const double T = p.kappa_tau();
  if (T < 1e-6) throw std::invalid_argument("invalid parameter: kappa*tau below 1e-6");
  if (bath && variant == BathVariant::Exact && p.gamma > 0.0)
    return finalize(cavity_engine(p, true, 0.0), p, true);

  const double K1 = p.K1(), K2 = p.K2(), Kf = p.feedforward, S = p.squeezing;
  const double se = std::sqrt(p.eta), sl = std::sqrt(1.0 - p.eta);
  const double E1 = std::exp(-T), rt = std::sqrt(T);
  const double G1 = K1 / std::sqrt(2.0 * T), G2 = K2 / std::sqrt(2.0 * T);
  const double kse = Kf * se;

  TransferModel m;
  m.A(kQ1, kQ2) = K2 * Kf * (1.0 - (1.0 - E1) / T);
  m.A(kP2, kP1) = -se * K1 * K2 * (1.0 + E1 - 2.0 * (1.0 - E1) / T);

  const double cX1 = kse * std::sqrt(2.0 / T) * ((1.0 - E1) - 2.0 * T * E1) - G1 * (1.0 - E1);
  const double cX2 = Kf * std::sqrt(2.0 / T) * (1.0 - E1);
  const double cY1 = -se * 2.0 * G2 * (1.0 - E1 * (1.0 + T));
  const double cY2 = -G2 * (1.0 - E1);

  const ExpPoly kx = kernel(-(K1 - kse), K1, -4.0 * kse) * cplx(S / rt);
  const ExpPoly kxl = kernel(1.0, -2.0, 0.0) * cplx(Kf * sl / rt);
  const ExpPoly ky = kernel(1.0, -1.0, -2.0) * cplx(-K2 * se / (S * rt));
  const ExpPoly kyl = kernel(1.0, -1.0, 0.0) * cplx(-K2 * sl / rt);
  const double vx = kernel_variance(kx, T), vxl = sl > 0.0 ? kernel_variance(kxl, T) : 0.0;
  const double vy = kernel_variance(ky, T), vyl = sl > 0.0 ? kernel_variance(kyl, T) : 0.0;

  m.N(kQ1, kQ1) = 0.5 * (cX1 * cX1 + cX2 * cX2) + vx + vxl;
  m.N(kP2, kP2) = 0.5 * (cY1 * cY1 + cY2 * cY2) + vy + vyl;
  m.coefficients = {{"X1(0)", "q1", cX1},
                    {"X2(0)", "q1", cX2},
                    {"Y1(0)", "p2", cY1},
                    {"Y2(0)", "p2", cY2},
                    {"x_in (rms)", "q1", std::sqrt(2.0 * vx)},
                    {"x_loss (rms)", "q1", std::sqrt(2.0 * vxl)},
                    {"y_in (rms)", "p2", std::sqrt(2.0 * vy)},
                    {"y_loss (rms)", "p2", std::sqrt(2.0 * vyl)}};
  if (bath) add_linear_bath(m, p);
  return m;
}

TransferModel nonrwa_transfer(const ProtocolParams& p, bool bath, BathVariant variant) {
  p.validate();
  if (!(p.omega_m > 0.0)) throw std::invalid_argument("invalid parameter: omega_m must be positive");
  if (p.kappa_tau() < 1e-6) throw std::invalid_argument("invalid parameter: kappa*tau below 1e-6");
  const bool exact_bath = bath && variant == BathVariant::Exact && p.gamma > 0.0;
  TransferModel m = finalize(cavity_engine(p, exact_bath, 1.0), p, exact_bath);
  if (bath && !exact_bath) add_linear_bath(m, p);
  return m;
}

TransferModel build_transfer(const ProtocolParams& p, const ModelOptions& o) {
  switch (o.kind) {
    case ModelKind::AdiabaticIdeal: return adiabatic_transfer(p, o.bath, o.bath_variant);
    case ModelKind::FullCavity: return full_cavity_transfer(p, o.bath, o.bath_variant);
    case ModelKind::NonRWA: return nonrwa_transfer(p, o.bath, o.bath_variant);
  }
  throw std::invalid_argument("unknown model kind");
}

double backaction_integral(double kappa, double omega_m, double s, double tau) {
  // Antiderivative of e^{-k t} sin(w t): -e^{-k t} (k sin wt + w cos wt) / (k^2 + w^2).
  const double w = 2.0 * omega_m;
  auto prim = [&](double t) {
    return -std::exp(-kappa * t) * (kappa * std::sin(w * t) + w * std::cos(w * t)) /
           (kappa * kappa + w * w);
  };
  return prim(tau) - prim(s);
}

double approx_ln(const ProtocolParams& p) {
  const double K1 = p.K1(), K2 = p.K2(), S = p.squeezing;
  return -std::log(std::sqrt(1.0 + K2 * K2 / (S * S)) / (2.0 * K1 * K2));
}

double adiabatic_bath_ln(const ProtocolParams& p) {
  const double K1 = p.K1(), K2 = p.K2();
  if (std::abs(K1 - K2) > 1e-12 * std::max(1.0, std::abs(K1)))
    throw std::invalid_argument("bath estimate requires K1 == K2");
  const double K = K1, S = p.squeezing, G = p.Gamma();
  const double k4 = 1.0 + G * K * K * K * K;
  return -std::log(std::sqrt(k4 + K * K / (S * S) * k4) / (2.0 * K * K));
}

double optimal_squeezing(const ProtocolParams& p) {
  const double d = p.K1() - p.feedforward * std::sqrt(p.eta);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(p.K2() / d);
}

SimResult ln_from_transfer(const TransferModel& model, const GaussianState& initial) {
  if (initial.modes() != 2) throw GaussianError("ln_from_transfer expects a two-mode state");
  SimResult r;
  Mat4 v = model.A * initial.cov * model.A.transpose() + model.N;
  symmetrize_n(v);
  r.mech_cov = v;
  r.coefficients = model.coefficients;
  r.physicality = physicality_check(v, 1e-10 * std::max(1.0, v.cwiseAbs().maxCoeff()));
  r.ln = r.physicality.pass ? log_negativity(v) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double model_ln(const ProtocolParams& p, const ModelOptions& options) {
  return ln_from_transfer(build_transfer(p, options), make_vacuum(2)).ln;
}

}  // namespace qnd
