#include "qndmech/timebin.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qnd {

namespace {

// Slots in the 12-dimensional streaming state.
constexpr int kQ1 = 0, kP1 = 1, kX1 = 2, kY1 = 3, kQ2 = 4, kP2 = 5, kX2 = 6, kY2 = 7;
constexpr int kBx = 8, kBy = 9, kAx = 10, kAy = 11;

using Cov = Eigen::Matrix<double, 12, 12>;
using Means = Eigen::Matrix<double, 12, 8>;
using M4 = Eigen::Matrix4d;

struct Stream {
  Cov V;
  Means mu;

  void apply(const std::array<int, 4>& idx, const M4& S) {
    Eigen::Matrix<double, 4, 12> rows;
    Eigen::Matrix<double, 4, 8> mrows;
    for (int a = 0; a < 4; ++a) {
      rows.row(a).setZero();
      mrows.row(a).setZero();
      for (int b = 0; b < 4; ++b) {
        if (S(a, b) == 0.0) continue;
        rows.row(a) += S(a, b) * V.row(idx[b]);
        mrows.row(a) += S(a, b) * mu.row(idx[b]);
      }
    }
    for (int a = 0; a < 4; ++a) {
      V.row(idx[a]) = rows.row(a);
      mu.row(idx[a]) = mrows.row(a);
    }
    Eigen::Matrix<double, 12, 4> cols;
    for (int b = 0; b < 4; ++b) cols.col(b) = V.col(idx[b]);
    for (int a = 0; a < 4; ++a) {
      V.col(idx[a]).setZero();
      for (int b = 0; b < 4; ++b)
        if (S(a, b) != 0.0) V.col(idx[a]) += S(a, b) * cols.col(b);
    }
  }

  void scale(int i, double f) {
    V.row(i) *= f;
    V.col(i) *= f;
    mu.row(i) *= f;
  }

  // Damping of one mode towards a thermal state: x -> e^{-r/2} x plus noise.
  void thermalize(int mode_slot, double rate_dt, double occupation_half) {
    if (rate_dt <= 0.0) return;
    const double f = std::exp(-0.5 * rate_dt);
    const double added = -std::expm1(-rate_dt) * occupation_half;
    for (int i : {mode_slot, mode_slot + 1}) {
      scale(i, f);
      V(i, i) += added;
    }
  }

  void reset_bin(double S) {
    for (int i : {kBx, kBy}) {
      V.row(i).setZero();
      V.col(i).setZero();
      mu.row(i).setZero();
    }
    V(kBx, kBx) = 0.5 * S * S;
    V(kBy, kBy) = 0.5 / (S * S);
  }
};

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

// Coherent coupling of one cavity to its mechanical mode on slots (q, p, X, Y),
// generator M(u) = M0 + Mc cos(w u) + Ms sin(w u). The generator is nilpotent
// of order three (field -> mechanics -> field), so the time-ordered exponential
// ends at the second-order term.
struct Coupling {
  M4 M0 = M4::Zero(), Mc = M4::Zero(), Ms = M4::Zero();
  double w = 0.0;

  // Basis functions 1, cos, sin: integrals and inner antiderivatives on [a, b].
  double f(int k, double u) const {
    return k == 0 ? 1.0 : (k == 1 ? std::cos(w * u) : std::sin(w * u));
  }
  double inner(int k, double a, double u) const {
    if (k == 0) return u - a;
    const double half = 0.5 * w * (u - a), mid = 0.5 * w * (u + a);
    const double s = 2.0 * std::sin(half) / w;
    return k == 1 ? std::cos(mid) * s : std::sin(mid) * s;
  }

  M4 propagator(double a, double b) const {
    const M4* mats[3] = {&M0, &Mc, &Ms};
    const bool modulated = w != 0.0 && (!Mc.isZero() || !Ms.isZero());
    const int nk = modulated ? 3 : 1;
    M4 phi = M4::Identity();
    for (int k = 0; k < nk; ++k) phi += inner(k, a, b) * *mats[k];
    if (!modulated) return phi + 0.5 * (b - a) * (b - a) * M0 * M0;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < nk; ++j) {
        const M4 prod = *mats[i] * *mats[j];
        if (prod.isZero()) continue;
        double acc = 0.0;
        for (int n = 0; n < 8; ++n) {
          const double u = c + h * kGLx[n];
          acc += kGLw[n] * f(i, u) * inner(j, a, u);
        }
        phi += h * acc * prod;
      }
    return phi;
  }
};

Coupling cavity1_coupling(double G, double r, double w) {
  // slots: 0 q1, 1 p1, 2 X1, 3 Y1
  Coupling c;
  c.w = w;
  c.M0(0, 2) = -G;
  c.Mc(0, 2) = r * G;
  c.Ms(1, 2) = r * G;
  c.Ms(3, 0) = r * G;
  c.M0(3, 1) = G;
  c.Mc(3, 1) = -r * G;
  return c;
}

Coupling cavity2_coupling(double G, double r, double w) {
  // slots: 0 q2, 1 p2, 2 X2, 3 Y2
  Coupling c;
  c.w = w;
  c.Ms(0, 3) = r * G;
  c.M0(1, 3) = -G;
  c.Mc(1, 3) = -r * G;
  c.M0(2, 0) = G;
  c.Mc(2, 0) = r * G;
  c.Ms(2, 1) = r * G;
  return c;
}

// Beamsplitter collision between a cavity and the current bin, followed by a
// sign flip of the bin so that it carries sqrt(2 kappa) Q - Q_in.
M4 collision(double dt) {
  const double c = std::exp(-dt), s = std::sqrt(-std::expm1(-2.0 * dt));
  M4 m = M4::Zero();
  m(0, 0) = m(1, 1) = c;
  m(0, 2) = m(1, 3) = s;
  m(2, 0) = m(3, 1) = s;
  m(2, 2) = m(3, 3) = -c;
  return m;
}

double filter_weight(const std::vector<double>& filter, int k, int n) {
  if (filter.empty()) return 1.0;
  const auto m = static_cast<int>(filter.size());
  const int j = std::min(m - 1, static_cast<int>((k + 0.5) / n * m));
  return filter[j];
}

void check_physical(const Cov& V, int bin) {
  const PhysicalityReport rep = physicality_check(Mat(V), 1e-10 * std::max(1.0, V.cwiseAbs().maxCoeff()));
  if (!rep.pass)
    throw std::runtime_error("non-physical covariance after bin " + std::to_string(bin) +
                             " (eigenvalue " + std::to_string(rep.min_eigenvalue) + ")");
}

Stream run(const SimConfig& cfg) {
  const ProtocolParams& p = cfg.params;
  p.validate();
  if (cfg.n_bins < 4) throw std::invalid_argument("n_bins must be at least 4");
  if (!cfg.rwa && !(p.omega_m > 0.0))
    throw std::invalid_argument("invalid parameter: omega_m must be positive without RWA");

  const int n = cfg.n_bins;
  const double T = p.kappa_tau();
  const double dt = T / n;
  const double r = cfg.rwa ? 0.0 : 1.0;
  const double w = cfg.rwa ? 0.0 : 2.0 * p.omega_m / p.kappa;
  const Coupling cav1 = cavity1_coupling(p.g1 / p.kappa, r, w);
  const Coupling cav2 = cavity2_coupling(p.g2 / p.kappa, r, w);
  const M4 hit = collision(dt);
  const double se = std::sqrt(p.eta), loss_var = 0.5 * (1.0 - p.eta);
  const double bath_dt = cfg.bath ? p.gamma / p.kappa * dt : 0.0;
  const double occ = p.n_th + 0.5;

  const std::array<int, 4> sys1 = {kQ1, kP1, kX1, kY1}, sys2 = {kQ2, kP2, kX2, kY2};
  const std::array<int, 4> col1 = {kX1, kY1, kBx, kBy}, col2 = {kX2, kY2, kBx, kBy};
  const std::array<int, 4> fold = {kAx, kAy, kBx, kBy};

  Stream st;
  st.V = 0.5 * Cov::Identity();
  st.mu.setZero();
  st.mu.topRows(8) = Eigen::Matrix<double, 8, 8>::Identity();
  st.reset_bin(p.squeezing);

  // Time-independent propagators are reused when the RWA is on.
  const bool strang = cfg.integrator == Integrator::Strang;
  const double h = strang ? 0.5 * dt : dt;
  const M4 fixed1 = cav1.propagator(0.0, h), fixed2 = cav2.propagator(0.0, h);

  double norm2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t0 = k * dt, tm = t0 + h, t1 = t0 + dt;
    auto coherent = [&](const Coupling& c, const M4& fixed, const std::array<int, 4>& idx,
                        double a, double b) { st.apply(idx, cfg.rwa ? fixed : c.propagator(a, b)); };

    const double bath_pre = strang ? 0.5 * bath_dt : 0.0;
    st.thermalize(kQ1, bath_pre, occ);
    coherent(cav1, fixed1, sys1, t0, tm);
    st.apply(col1, hit);
    if (strang) coherent(cav1, fixed1, sys1, tm, t1);
    st.thermalize(kQ1, bath_dt - bath_pre, occ);

    if (p.eta < 1.0) {
      st.scale(kBx, se);
      st.scale(kBy, se);
      st.V(kBx, kBx) += loss_var;
      st.V(kBy, kBy) += loss_var;
    }

    st.thermalize(kQ2, bath_pre, occ);
    coherent(cav2, fixed2, sys2, t0, tm);
    st.apply(col2, hit);
    if (strang) coherent(cav2, fixed2, sys2, tm, t1);
    st.thermalize(kQ2, bath_dt - bath_pre, occ);

    const double wk = filter_weight(cfg.filter, k, n);
    if (wk != 0.0) {
      const double prev = std::sqrt(norm2);
      norm2 += wk * wk;
      const double a = std::sqrt(norm2);
      M4 bs = M4::Zero();
      bs(0, 0) = bs(1, 1) = prev / a;
      bs(0, 2) = bs(1, 3) = wk / a;
      bs(2, 0) = bs(3, 1) = -wk / a;
      bs(2, 2) = bs(3, 3) = prev / a;
      st.apply(fold, bs);
    }
    st.reset_bin(p.squeezing);
    if (cfg.check_every_step) check_physical(st.V, k);
  }
  if (norm2 == 0.0) throw std::invalid_argument("detection filter is identically zero");

  // Mode 1 stays coupled to its bath while the second pulse runs.
  if (cfg.bath) st.thermalize(kQ1, p.gamma * p.tau, occ);

  // Feedforward q1 += Kf X_acc.
  M4 ff = M4::Identity();
  ff(0, 2) = p.feedforward;
  st.apply({kQ1, kP1, kAx, kAy}, ff);
  return st;
}

Mat4 mechanical_block(const Cov& V) {
  const int idx[4] = {kQ1, kP1, kQ2, kP2};
  Mat4 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) = V(idx[a], idx[b]);
  return (0.5 * (out + out.transpose())).eval();
}

}  // namespace

SimResult simulate_once(const SimConfig& config) {
  const Stream st = run(config);
  SimResult res;
  res.mech_cov = mechanical_block(st.V);
  res.n_bins = config.n_bins;
  res.physicality = physicality_check(res.mech_cov, 1e-10 * std::max(1.0, res.mech_cov.cwiseAbs().maxCoeff()));
  if (!res.physicality.pass)
    throw std::runtime_error("non-physical mechanical covariance (eigenvalue " +
                             std::to_string(res.physicality.min_eigenvalue) + ")");
  res.ln = log_negativity(res.mech_cov);
  return res;
}

SimResult simulate(const SimConfig& config) {
  const SimResult coarse = simulate_once(config);
  SimConfig fine_cfg = config;
  fine_cfg.n_bins = 2 * config.n_bins;
  SimResult fine = simulate_once(fine_cfg);
  fine.convergence_estimate = std::abs(fine.ln - coarse.ln);
  return fine;
}

SimResult simulate_converged(SimConfig config, double tolerance, int max_bins) {
  SimResult prev = simulate_once(config);
  for (;;) {
    config.n_bins *= 2;
    SimResult next = simulate_once(config);
    next.convergence_estimate = std::abs(next.ln - prev.ln);
    if (next.convergence_estimate <= tolerance || 2 * config.n_bins > max_bins) return next;
    prev = std::move(next);
  }
}

Mat4 FirstMoments::mechanical() const {
  Mat4 m;
  m << transfer.col(0), transfer.col(1), transfer.col(4), transfer.col(5);
  return m;
}

FirstMoments extract_first_moments(const SimConfig& config) {
  const Stream st = run(config);
  FirstMoments fm;
  const int idx[4] = {kQ1, kP1, kQ2, kP2};
  for (int a = 0; a < 4; ++a) fm.transfer.row(a) = st.mu.row(idx[a]);
  return fm;
}

}  // namespace qnd
