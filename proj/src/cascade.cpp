#include "qndmech/cascade.hpp"

#include <cmath>
#include <stdexcept>

namespace qnd {

int CascadeSystem::add_variable(const std::string& name, double rate) {
  names.push_back(name);
  decay.push_back(rate);
  return size() - 1;
}

void CascadeSystem::couple(int to, int from, double constant, double cos_amp, double sin_amp,
                           double freq) {
  couplings.push_back({to, from, constant, cos_amp, sin_amp, freq});
}

CascadeSolution solve_cascade(const CascadeSystem& system, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("cascade horizon must be positive");
  const int n = system.size();
  for (const auto& c : system.couplings)
    if (c.from >= c.to || c.to >= n || c.from < 0)
      throw std::invalid_argument("cascade coupling must point forward");

  // Rescale to unit horizon: rates and couplings scale with T, white-noise
  // amplitudes with sqrt(T).
  const double T = horizon;
  const double sq = std::sqrt(T);
  std::vector<std::vector<std::pair<int, ExpPoly>>> incoming(n);  // per j: (i, M_ij)
  for (const auto& c : system.couplings)
    incoming[c.from].emplace_back(
        c.to, ExpPoly::sinusoid(c.constant * T, c.cos_amp * T, c.sin_amp * T, c.freq * T, 1.0));

  const int n_out = static_cast<int>(system.outputs.size());
  std::vector<std::vector<ExpPoly>> psi(n_out, std::vector<ExpPoly>(n));
  CascadeSolution sol;
  sol.transfer = Mat::Zero(n_out, n);

  for (int r = 0; r < n_out; ++r) {
    const int o = system.outputs[r];
    for (int j = n - 1; j >= 0; --j) {
      ExpPoly drive;
      for (const auto& [i, m] : incoming[j])
        if (!psi[r][i].empty()) drive += psi[r][i] * m;
      ExpPoly f;
      if (!drive.empty()) f = drive.decay_convolve(system.decay[j] * T, 1.0);
      if (j == o) f += ExpPoly::term(1.0, 0, system.decay[j] * T);
      f.simplify(1.0);
      sol.max_terms = std::max(sol.max_terms, f.terms().size());
      sol.transfer(r, j) = f(1.0).real();
      psi[r][j] = std::move(f);
    }
  }

  for (const auto& src : system.sources) {
    std::vector<ExpPoly> kernel(n_out);
    for (int r = 0; r < n_out; ++r) {
      for (const auto& [j, amp] : src.entries) kernel[r] += psi[r][j] * cplx(amp * sq);
      kernel[r].simplify(1.0);
    }
    Mat g(n_out, n_out);
    for (int a = 0; a < n_out; ++a)
      for (int b = a; b < n_out; ++b) g(a, b) = g(b, a) = inner_product(kernel[a], kernel[b], 1.0).real();
    sol.grams.push_back(std::move(g));
  }
  return sol;
}

}  // namespace qnd
