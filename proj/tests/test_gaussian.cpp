#include "qndmech/gaussian.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qnd;

namespace {

// Two-mode squeezed vacuum written out directly.
Mat tmsv(double r) {
  const double c = std::cosh(2.0 * r) / 2.0, s = std::sinh(2.0 * r) / 2.0;
  Mat v = Mat::Zero(4, 4);
  v(0, 0) = v(1, 1) = v(2, 2) = v(3, 3) = c;
  v(0, 2) = v(2, 0) = s;
  v(1, 3) = v(3, 1) = -s;
  return v;
}

}  // namespace

TEST_CASE("vacuum and thermal states") {
  const auto v = make_vacuum(2);
  CHECK(v.cov.isApprox(0.5 * Mat::Identity(4, 4)));
  CHECK(log_negativity(v.cov) == 0.0);
  CHECK(make_thermal(3.0).cov(0, 0) == doctest::Approx(3.5));
  CHECK(physicality_check(v.cov).pass);
  CHECK_FALSE(physicality_check(0.4 * Mat::Identity(4, 4)).pass);
}

TEST_CASE("two-mode squeezed vacuum has log-negativity 2r") {
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(log_negativity(tmsv(r)) == doctest::Approx(2.0 * r).epsilon(1e-12));
    CHECK(min_symplectic_eigenvalue_pt(tmsv(r)) == doctest::Approx(0.5 * std::exp(-2.0 * r)));
    // Same state from single-mode squeezers and a balanced beamsplitter.
    auto s = make_vacuum(2);
    s = apply_symplectic(s, squeeze_map(std::exp(r), 0));
    s = apply_symplectic(s, squeeze_map(std::exp(-r), 1));
    s = apply_symplectic(s, beamsplitter_map(0.5, 0, 1));
    CHECK(log_negativity(s.cov) == doctest::Approx(2.0 * r).epsilon(1e-10));
  }
}

TEST_CASE("elementary maps are symplectic") {
  CHECK(symplectic_residual(squeeze_map(3.0, 0).matrix) < 1e-15);
  CHECK(symplectic_residual(beamsplitter_map(0.3, 0, 1).matrix) < 1e-15);
  for (auto cq : {Quadrature::Q, Quadrature::P})
    for (auto tq : {Quadrature::Q, Quadrature::P}) {
      const auto m = qnd_map(2.5, 0, cq, 1, tq);
      CHECK(symplectic_residual(m.matrix) < 1e-14);
      // target_quad += gain * control_quad
      CHECK(m.matrix(2 + static_cast<int>(tq), static_cast<int>(cq)) == doctest::Approx(2.5));
    }
  CHECK(symplectic_residual(2.0 * Mat::Identity(2, 2)) > 1.0);
  CHECK_THROWS_AS(squeeze_map(0.0, 0), GaussianError);
  CHECK_THROWS_AS(beamsplitter_map(1.5, 0, 1), GaussianError);
  CHECK_THROWS_AS(qnd_map(1.0, 1, Quadrature::Q, 1, Quadrature::P), GaussianError);
}

TEST_CASE("homodyne conditioning is the Schur complement") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = n(rng);
  GaussianState s{Vec::Zero(6), 0.5 * Mat::Identity(6, 6) + a * a.transpose()};
  s.means << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  const auto out = homodyne_condition(s, 1, Quadrature::P, 1.3);

  const std::vector<int> rest = {0, 1, 4, 5};
  Mat expected(4, 4);
  Vec mean(4);
  for (int r = 0; r < 4; ++r) {
    mean(r) = s.means(rest[r]) + s.cov(rest[r], 3) / s.cov(3, 3) * (1.3 - s.means(3));
    for (int c = 0; c < 4; ++c)
      expected(r, c) = s.cov(rest[r], rest[c]) - s.cov(rest[r], 3) * s.cov(3, rest[c]) / s.cov(3, 3);
  }
  CHECK((out.cov - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((out.means - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("feedforward at the optimal gain reproduces conditioning") {
  // X of the light correlates only with q of mode 0; other correlations are
  // carried by classical noise on (p0, q1, p1).
  Mat v = 0.5 * Mat::Identity(6, 6);
  v(0, 0) = 2.0;
  Mat b(3, 3);
  b << 1.0, 0.4, -0.3, 0.4, 0.8, 0.2, -0.3, 0.2, 0.6;
  const int idx[3] = {1, 2, 3};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v(idx[r], idx[c]) += b(r, c);
  GaussianState s{Vec::Zero(6), v};
  s = apply_symplectic(s, squeeze_map(2.0, 2));
  s = apply_symplectic(s, qnd_map(1.7, 0, Quadrature::Q, 2, Quadrature::Q));

  const double gain = -s.cov(0, 4) / s.cov(4, 4);
  const auto conditioned = homodyne_condition(s, 2, Quadrature::Q);
  const auto fed = feedforward_displace(s, 2, Quadrature::Q, gain, 0, Quadrature::Q);
  CHECK((conditioned.cov - fed.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace and partial transpose") {
  auto s = make_vacuum(3);
  s.cov.topLeftCorner(4, 4) = tmsv(0.3);
  const auto kept = partial_trace(s, {0, 1});
  CHECK(log_negativity(kept.cov) == doctest::Approx(0.6));
  CHECK_THROWS_AS(partial_trace(s, {5}), GaussianError);
  // A classically correlated state is not entangled.
  Mat c = 0.5 * Mat::Identity(4, 4);
  c(0, 0) = c(2, 2) = 2.0;
  c(0, 2) = c(2, 0) = 1.5;
  CHECK(log_negativity(c) == 0.0);
}
