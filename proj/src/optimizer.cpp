#include "qndmech/optimizer.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qnd {

namespace {

constexpr double kPenalty = 1e6;

struct Box {
  SearchPoint lo, hi;
};

Box box_of(const SearchSpace& s) {
  return {{std::log10(s.kappa_tau_min), 0.0, 0.0, s.kf_ratio_min, s.squeezing_db_min},
          {std::log10(s.kappa_tau_max), 1.0, 1.0, s.kf_ratio_max, s.squeezing_db_max}};
}

// Unclamped -ln(2 nu_-): keeps a slope where the entanglement is zero.
double raw_ln(const ProtocolParams& p, const ModelOptions& model) {
  const SimResult r = ln_from_transfer(build_transfer(p, model), make_vacuum(2));
  if (!r.physicality.pass) return std::numeric_limits<double>::quiet_NaN();
  return -std::log(2.0 * min_symplectic_eigenvalue_pt(r.mech_cov));
}

struct Objective {
  const SearchSpace* space;
  Box box;
  std::vector<TraceEntry>* trace;

  double operator()(const SearchPoint& x) const {
    double outside = 0.0;
    for (int i = 0; i < 5; ++i)
      outside += std::max(0.0, box.lo[i] - x[i]) + std::max(0.0, x[i] - box.hi[i]);
    TraceEntry e{x, std::numeric_limits<double>::quiet_NaN(), false};
    double cost = kPenalty * (1.0 + outside);
    if (outside == 0.0) {
      if (const auto p = decode_point(*space, x)) {
        const double v = raw_ln(*p, space->model);
        if (std::isfinite(v)) {
          e.value = v;
          e.feasible = true;
          cost = -v;
        }
      }
    }
    trace->push_back(e);
    return cost;
  }
};

double gsl_cost(const gsl_vector* v, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  SearchPoint x;
  for (int i = 0; i < 5; ++i) x[i] = gsl_vector_get(v, i);
  return (*obj)(x);
}

std::pair<SearchPoint, double> nelder_mead(const Objective& obj, SearchPoint start, int max_iter) {
  gsl_multimin_function f{&gsl_cost, 5, const_cast<Objective*>(&obj)};
  gsl_vector* x = gsl_vector_alloc(5);
  gsl_vector* step = gsl_vector_alloc(5);
  const SearchPoint steps = {0.25, 0.1, 0.1, 0.05, 1.0};
  for (int i = 0; i < 5; ++i) {
    gsl_vector_set(x, i, start[i]);
    // Step inwards so that the initial simplex stays inside the box.
    const double room_up = obj.box.hi[i] - start[i];
    gsl_vector_set(step, i, room_up >= steps[i] ? steps[i] : -steps[i]);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5);
  gsl_multimin_fminimizer_set(m, &f, x, step);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-9) == GSL_SUCCESS) break;
  }
  SearchPoint best;
  for (int i = 0; i < 5; ++i) best[i] = gsl_vector_get(m->x, i);
  const double fbest = m->fval;
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return {best, fbest};
}

std::vector<SearchPoint> latin_hypercube(const Box& box, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SearchPoint> pts(n);
  for (int d = 0; d < 5; ++d) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      const double frac = (perm[i] + unit(rng)) / n;
      pts[i][d] = box.lo[d] + frac * (box.hi[d] - box.lo[d]);
    }
  }
  return pts;
}

std::optional<SearchPoint> encode(const SearchSpace& s, const ProtocolParams& p) {
  const double kt = p.kappa_tau();
  const double kmax = s.g_max * std::sqrt(2.0 * kt);
  if (!(kmax > 0.0)) return std::nullopt;
  const double K1 = p.K1(), K2 = p.K2();
  const double rho = K1 > 0.0 ? p.feedforward * std::sqrt(p.eta) / K1 : 1.0;
  SearchPoint x = {std::log10(kt), K1 / kmax, K2 / kmax, rho, squeezing_to_db(p.squeezing)};
  const Box b = box_of(s);
  for (int i = 0; i < 5; ++i)
    if (x[i] < b.lo[i] || x[i] > b.hi[i]) return std::nullopt;
  return x;
}

}  // namespace

void SearchSpace::validate() const {
  hardware.validate();
  if (!(g_max >= 0.0) || !std::isfinite(g_max)) throw std::invalid_argument("g_max must be non-negative");
  if (!(kappa_tau_min > 0.0 && kappa_tau_min <= kappa_tau_max && std::isfinite(kappa_tau_max)))
    throw std::invalid_argument("kappa_tau bounds must be positive and ordered");
  if (!(squeezing_db_min <= squeezing_db_max)) throw std::invalid_argument("squeezing bounds not ordered");
  if (!(kf_ratio_min <= kf_ratio_max)) throw std::invalid_argument("feedforward ratio bounds not ordered");
  if (seeds < 1 || refinements < 1 || max_iterations < 1)
    throw std::invalid_argument("seeds, refinements and iterations must be positive");
}

std::optional<ProtocolParams> decode_point(const SearchSpace& s, const SearchPoint& x) {
  const Box b = box_of(s);
  for (int i = 0; i < 5; ++i)
    if (!(x[i] >= b.lo[i] && x[i] <= b.hi[i])) return std::nullopt;
  ProtocolParams p = s.hardware;
  const double kt = std::pow(10.0, x[0]);
  p.tau = kt / p.kappa;
  const double kmax = s.g_max * std::sqrt(2.0 * kt);
  p.set_gains(x[1] * kmax, x[2] * kmax);
  p.feedforward = p.eta > 0.0 ? x[3] * p.K1() / std::sqrt(p.eta) : x[3] * p.K1();
  p.squeezing = squeezing_from_db(x[4]);
  // Guard against round-off pushing a coupling above the ceiling.
  const double gcap = s.g_max * p.kappa * (1.0 + 1e-12);
  if (p.g1 > gcap || p.g2 > gcap) return std::nullopt;
  return p;
}

OptimizationResult optimize(const SearchSpace& space) {
  space.validate();
  gsl_set_error_handler_off();
  OptimizationResult res;
  const Box box = box_of(space);
  Objective obj{&space, box, &res.trace};
  std::mt19937_64 rng(space.seed);

  std::vector<std::pair<double, SearchPoint>> ranked;
  auto consider = [&](const SearchPoint& x) { ranked.emplace_back(obj(x), x); };
  if (space.warm_start)
    if (const auto x = encode(space, *space.warm_start)) consider(*x);
  for (const auto& x : latin_hypercube(box, space.seeds, rng)) {
    consider(x);
    // The optimum sits on the coupling ceiling; also seed its projection there.
    SearchPoint edge = x;
    edge[1] = edge[2] = 1.0;
    consider(edge);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (ranked.empty() || ranked.front().first >= kPenalty)
    throw std::runtime_error("optimizer: no feasible point in the search space");

  double best_cost = ranked.front().first;
  SearchPoint best_x = ranked.front().second;
  const int n_refine = std::min<int>(space.refinements, static_cast<int>(ranked.size()));
  for (int k = 0; k < n_refine; ++k) {
    auto [x, f] = nelder_mead(obj, ranked[k].second, space.max_iterations);
    // A restart from the simplex optimum avoids premature collapse.
    auto [x2, f2] = nelder_mead(obj, x, space.max_iterations);
    if (f2 < f) {
      x = x2;
      f = f2;
    }
    if (f < best_cost) {
      best_cost = f;
      best_x = x;
    }
  }

  res.best_x = best_x;
  res.best = *decode_point(space, best_x);
  res.best_ln = std::max(0.0, -best_cost);
  res.feasible = true;
  res.evaluations = static_cast<int>(res.trace.size());
  return res;
}

std::vector<OptimizationResult> optimize_ladder(SearchSpace space, const std::vector<double>& g_max) {
  std::vector<OptimizationResult> out;
  for (double g : g_max) {
    space.g_max = g;
    out.push_back(optimize(space));
    if (g > 0.0) space.warm_start = out.back().best;
  }
  return out;
}

void set_sweep_parameter(ProtocolParams& p, const std::string& name, double value) {
  if (name == "squeezing_db") {
    p.squeezing = squeezing_from_db(value);
  } else if (name == "K1") {
    p.set_gains(value, p.K2());
  } else if (name == "K2") {
    p.set_gains(p.K1(), value);
  } else if (name == "Kf") {
    p.feedforward = value;
  } else if (name == "eta") {
    p.eta = value;
  } else if (name == "n_th") {
    p.n_th = value;
  } else if (name == "kappa_tau" || name == "tau_us") {
    const double K1 = p.K1(), K2 = p.K2();
    p.tau = name == "kappa_tau" ? value / p.kappa : value * 1e-6;
    p.set_gains(K1, K2);
  } else {
    throw std::invalid_argument("unknown sweep axis: " + name);
  }
}

std::vector<SweepRow> sweep(const ProtocolParams& base, const ModelOptions& model,
                            const std::vector<GridAxis>& axes) {
  double total = 1.0;
  for (const auto& a : axes) {
    if (a.values.empty()) throw std::invalid_argument("sweep axis " + a.name + " has no values");
    total *= static_cast<double>(a.values.size());
  }
  if (total > 1e7) throw std::invalid_argument("sweep grid exceeds 1e7 points");

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < static_cast<std::size_t>(total); ++n) {
    ProtocolParams p = base;
    SweepRow row;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double v = axes[a].values[idx[a]];
      set_sweep_parameter(p, axes[a].name, v);
      row.coords.push_back(v);
    }
    row.ln = model_ln(p, model);
    rows.push_back(std::move(row));
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return rows;
}

}  // namespace qnd
