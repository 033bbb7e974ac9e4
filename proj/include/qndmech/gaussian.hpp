#pragma once

// Gaussian-state algebra on dense covariance matrices.
//
// Conventions used everywhere in qndmech:
//   * quadratures are interleaved per mode: (q1, p1, q2, p2, ...); optical
//     modes use the same slots for (X, Y);
//   * [q, p] = i, so a vacuum quadrature has variance 1/2;
//   * the symplectic form is block-diagonal with [[0, 1], [-1, 0]] per mode.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace qnd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Mat4 = Eigen::Matrix4d;

enum class Quadrature { Q = 0, P = 1 };

inline int quadrature_index(int mode, Quadrature quad) {
  return 2 * mode + static_cast<int>(quad);
}

class GaussianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GaussianState {
  Vec means;
  Mat cov;

  int modes() const { return static_cast<int>(means.size() / 2); }
};

struct SymplecticMap {
  Mat matrix;
  std::vector<int> target_modes;
};

/// Affine Gaussian channel V -> A V A^T + N, means -> A means.
struct GaussianChannel {
  Mat A;
  Mat N;
};

struct PhysicalityReport {
  bool pass = false;
  double min_eigenvalue = 0.0;
};

Mat symplectic_form(int modes);

/// max-norm of S Omega S^T - Omega.
double symplectic_residual(const Mat& S);

GaussianState make_vacuum(int modes);
GaussianState make_thermal(double n_th);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticMap& map);
GaussianState apply_channel(const GaussianState& state, const GaussianChannel& channel,
                            const std::vector<int>& target_modes);

SymplecticMap squeeze_map(double factor, int mode);

/// target_quad += gain * control_quad, completed to a symplectic map by the
/// back-action gain * (target conjugate) on the control's conjugate.
SymplecticMap qnd_map(double gain, int control_mode, Quadrature control_quad, int target_mode,
                      Quadrature target_quad);

SymplecticMap beamsplitter_map(double transmittivity, int signal_mode, int vacuum_mode);

/// Conditional state of the unmeasured modes after homodyning one quadrature.
GaussianState homodyne_condition(const GaussianState& state, int mode, Quadrature quad,
                                 double outcome = 0.0);

/// Measure-and-displace averaged over outcomes: target_quad += gain * source_quad,
/// then the source mode is traced out.
GaussianState feedforward_displace(const GaussianState& state, int source_mode,
                                   Quadrature source_quad, double gain, int target_mode,
                                   Quadrature target_quad);

GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep_modes);

/// Logarithmic negativity of a two-mode covariance matrix, max(0, -ln 2 nu_-).
double log_negativity(const Mat& cov);

/// Smallest symplectic eigenvalue of the partial transpose (mode 2 p flipped).
double min_symplectic_eigenvalue_pt(const Mat& cov);

PhysicalityReport physicality_check(const Mat& cov, double tolerance = 1e-10);

void symmetrize(Mat& m);

}  // namespace qnd
