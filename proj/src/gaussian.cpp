#include "qndmech/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

namespace qnd {

namespace {

void check_mode(const GaussianState& state, int mode, const char* what) {
  if (mode < 0 || mode >= state.modes()) {
    throw GaussianError(std::string(what) + ": mode " + std::to_string(mode) +
                        " out of range for " + std::to_string(state.modes()) + "-mode state");
  }
}

std::vector<int> expand_indices(const std::vector<int>& modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

// Embeds a local 2k x 2k matrix acting on `modes` into an n-mode identity.
Mat embed(const Mat& local, const std::vector<int>& modes, int n_modes) {
  Mat full = Mat::Identity(2 * n_modes, 2 * n_modes);
  const auto idx = expand_indices(modes);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) full(idx[r], idx[c]) = local(r, c);
  return full;
}

}  // namespace

void symmetrize(Mat& m) { m = 0.5 * (m + m.transpose()).eval(); }

Mat symplectic_form(int modes) {
  Mat omega = Mat::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

double symplectic_residual(const Mat& S) {
  if (S.rows() != S.cols() || S.rows() % 2 != 0)
    throw GaussianError("symplectic_residual: matrix must be square with even dimension");
  const Mat omega = symplectic_form(static_cast<int>(S.rows() / 2));
  return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff();
}

GaussianState make_vacuum(int modes) {
  if (modes < 1) throw GaussianError("make_vacuum: need at least one mode");
  return {Vec::Zero(2 * modes), 0.5 * Mat::Identity(2 * modes, 2 * modes)};
}

GaussianState make_thermal(double n_th) {
  if (!(n_th >= 0.0)) throw GaussianError("make_thermal: occupation must be non-negative");
  return {Vec::Zero(2), (n_th + 0.5) * Mat::Identity(2, 2)};
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticMap& map) {
  const auto k = static_cast<Eigen::Index>(map.target_modes.size());
  if (map.matrix.rows() != 2 * k || map.matrix.cols() != 2 * k)
    throw GaussianError("apply_symplectic: matrix size does not match target modes");
  std::set<int> unique(map.target_modes.begin(), map.target_modes.end());
  if (static_cast<Eigen::Index>(unique.size()) != k)
    throw GaussianError("apply_symplectic: repeated target mode");
  for (int m : map.target_modes) check_mode(state, m, "apply_symplectic");
  const double residual = symplectic_residual(map.matrix);
  if (residual > 1e-12)
    throw GaussianError("apply_symplectic: matrix is not symplectic (residual " +
                        std::to_string(residual) + ")");

  const Mat S = embed(map.matrix, map.target_modes, state.modes());
  GaussianState out{S * state.means, S * state.cov * S.transpose()};
  symmetrize(out.cov);
  return out;
}

GaussianState apply_channel(const GaussianState& state, const GaussianChannel& channel,
                            const std::vector<int>& target_modes) {
  const auto k = static_cast<Eigen::Index>(target_modes.size());
  if (channel.A.rows() != 2 * k || channel.A.cols() != 2 * k || channel.N.rows() != 2 * k ||
      channel.N.cols() != 2 * k)
    throw GaussianError("apply_channel: channel size does not match target modes");
  for (int m : target_modes) check_mode(state, m, "apply_channel");

  const Mat A = embed(channel.A, target_modes, state.modes());
  Mat N = Mat::Zero(state.cov.rows(), state.cov.cols());
  const auto idx = expand_indices(target_modes);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) N(idx[r], idx[c]) = channel.N(r, c);

  GaussianState out{A * state.means, A * state.cov * A.transpose() + N};
  symmetrize(out.cov);
  return out;
}

SymplecticMap squeeze_map(double factor, int mode) {
  if (!(factor > 0.0)) throw GaussianError("squeeze_map: factor must be positive");
  Mat s = Mat::Zero(2, 2);
  s(0, 0) = factor;
  s(1, 1) = 1.0 / factor;
  return {s, {mode}};
}

SymplecticMap qnd_map(double gain, int control_mode, Quadrature control_quad, int target_mode,
                      Quadrature target_quad) {
  if (control_mode == target_mode) throw GaussianError("qnd_map: control and target coincide");

  // Local ordering: control mode = slots 0,1; target mode = slots 2,3.
  const int c = static_cast<int>(control_quad);
  const int a = 2 + static_cast<int>(target_quad);
  const int u = 2 + (1 - static_cast<int>(target_quad));

  // Hamiltonian proportional to (control quad) x (target conjugate); its
  // generator Omega H is nilpotent, so the propagator is exactly I + lambda G.
  Mat H = Mat::Zero(4, 4);
  H(c, u) = H(u, c) = 1.0;
  const Mat G = symplectic_form(2) * H;
  const double lambda = gain / G(a, c);
  Mat S = Mat::Identity(4, 4) + lambda * G;
  return {S, {control_mode, target_mode}};
}

SymplecticMap beamsplitter_map(double transmittivity, int signal_mode, int vacuum_mode) {
  if (!(transmittivity >= 0.0 && transmittivity <= 1.0))
    throw GaussianError("beamsplitter_map: transmittivity outside [0, 1]");
  if (signal_mode == vacuum_mode) throw GaussianError("beamsplitter_map: modes coincide");
  const double t = std::sqrt(transmittivity);
  const double r = std::sqrt(1.0 - transmittivity);
  Mat S = Mat::Zero(4, 4);
  for (int q = 0; q < 2; ++q) {
    S(q, q) = t;
    S(q, 2 + q) = r;
    S(2 + q, q) = -r;
    S(2 + q, 2 + q) = t;
  }
  return {S, {signal_mode, vacuum_mode}};
}

GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep_modes) {
  if (keep_modes.empty()) throw GaussianError("partial_trace: empty keep set");
  for (int m : keep_modes) check_mode(state, m, "partial_trace");
  const auto idx = expand_indices(keep_modes);
  const auto n = static_cast<Eigen::Index>(idx.size());
  GaussianState out{Vec(n), Mat(n, n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    out.means(r) = state.means(idx[r]);
    for (Eigen::Index c = 0; c < n; ++c) out.cov(r, c) = state.cov(idx[r], idx[c]);
  }
  return out;
}

GaussianState homodyne_condition(const GaussianState& state, int mode, Quadrature quad,
                                 double outcome) {
  check_mode(state, mode, "homodyne_condition");
  if (state.modes() < 2) throw GaussianError("homodyne_condition: no modes would remain");

  std::vector<int> rest;
  for (int m = 0; m < state.modes(); ++m)
    if (m != mode) rest.push_back(m);
  const auto rest_idx = expand_indices(rest);
  const auto n = static_cast<Eigen::Index>(rest_idx.size());

  Mat VA(n, n), C(n, 2);
  Vec muA(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    muA(r) = state.means(rest_idx[r]);
    for (Eigen::Index c = 0; c < n; ++c) VA(r, c) = state.cov(rest_idx[r], rest_idx[c]);
    for (int c = 0; c < 2; ++c) C(r, c) = state.cov(rest_idx[r], 2 * mode + c);
  }
  Mat Vm = state.cov.block(2 * mode, 2 * mode, 2, 2);
  Mat Pi = Mat::Zero(2, 2);
  Pi(static_cast<int>(quad), static_cast<int>(quad)) = 1.0;
  const Mat projected = Pi * Vm * Pi;

  // Moore-Penrose inverse with singular values below 1e-14 * largest (and an
  // absolute 1e-14 floor) discarded; a noiseless quadrature carries no update.
  Eigen::JacobiSVD<Mat> svd(projected, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = std::max(1e-14 * sv(0), 1e-14);
  Mat pinv = Mat::Zero(2, 2);
  for (int k = 0; k < 2; ++k)
    if (sv(k) > cutoff)
      pinv += svd.matrixV().col(k) * (1.0 / sv(k)) * svd.matrixU().col(k).transpose();

  Vec residual = Vec::Zero(2);
  residual(static_cast<int>(quad)) = outcome - state.means(quadrature_index(mode, quad));

  GaussianState out{muA + C * pinv * residual, VA - C * pinv * C.transpose()};
  symmetrize(out.cov);
  return out;
}

GaussianState feedforward_displace(const GaussianState& state, int source_mode,
                                   Quadrature source_quad, double gain, int target_mode,
                                   Quadrature target_quad) {
  check_mode(state, source_mode, "feedforward_displace");
  check_mode(state, target_mode, "feedforward_displace");
  if (source_mode == target_mode) throw GaussianError("feedforward_displace: modes coincide");
  const auto gate = qnd_map(gain, source_mode, source_quad, target_mode, target_quad);
  const auto joint = apply_symplectic(state, gate);
  std::vector<int> keep;
  for (int m = 0; m < state.modes(); ++m)
    if (m != source_mode) keep.push_back(m);
  return partial_trace(joint, keep);
}

PhysicalityReport physicality_check(const Mat& cov, double tolerance) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0)
    throw GaussianError("physicality_check: covariance must be square with even dimension");
  const Mat omega = symplectic_form(static_cast<int>(cov.rows() / 2));
  const Eigen::MatrixXcd h =
      cov.cast<std::complex<double>>() + std::complex<double>(0.0, 0.5) * omega.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  const double min_ev = solver.eigenvalues().minCoeff();
  return {min_ev >= -tolerance, min_ev};
}

double min_symplectic_eigenvalue_pt(const Mat& cov) {
  if (cov.rows() != 4 || cov.cols() != 4)
    throw GaussianError("log_negativity: expected a 4x4 two-mode covariance");
  // Partial transpose: flip the sign of mode 2's p quadrature.
  Mat4 flip = Mat4::Identity();
  flip(3, 3) = -1.0;
  const Mat4 v = flip * cov * flip;
  const double det_a = v.block<2, 2>(0, 0).determinant();
  const double det_b = v.block<2, 2>(2, 2).determinant();
  const double det_c = v.block<2, 2>(0, 2).determinant();
  const double det_v = v.determinant();
  const double sigma = det_a + det_b + 2.0 * det_c;
  const double disc = std::sqrt(std::max(0.0, sigma * sigma - 4.0 * det_v));
  // nu_-^2 = (sigma - disc) / 2 written without the cancellation.
  const double nu_sq = (sigma + disc) > 0.0 ? 2.0 * det_v / (sigma + disc) : 0.0;
  return std::sqrt(std::max(0.0, nu_sq));
}

double log_negativity(const Mat& cov) {
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  const auto report = physicality_check(cov, 1e-10 * scale);
  if (!report.pass)
    throw GaussianError("log_negativity: covariance is not physical (min eigenvalue " +
                        std::to_string(report.min_eigenvalue) + ")");
  const double nu = min_symplectic_eigenvalue_pt(cov);
  if (nu <= 0.0) throw GaussianError("log_negativity: degenerate covariance");
  return std::max(0.0, -std::log(2.0 * nu));
}

}  // namespace qnd
