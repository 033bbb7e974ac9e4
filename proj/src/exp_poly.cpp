#include "qndmech/exp_poly.hpp"

#include <algorithm>
#include <cmath>

namespace qnd {

namespace {

// Below this |rate * horizon| the closed forms cancel badly and a power series
// is used instead.
constexpr double kSeriesThreshold = 0.5;

bool same_rate(cplx a, cplx b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Largest value of v^n exp(-Re(rate) v) on [0, T].
double term_scale(int power, cplx rate, double horizon) {
  const double a = rate.real();
  if (power == 0) return a >= 0.0 ? 1.0 : std::exp(-a * horizon);
  double v = horizon;
  if (a > 0.0) v = std::min(horizon, power / a);
  return std::pow(v, power) * std::exp(-a * v);
}

}  // namespace

cplx exp_moment(int n, cplx rate, double horizon) {
  const cplx x = rate * horizon;
  const double tn1 = std::pow(horizon, n + 1);
  if (std::abs(x) < 1.0) {
    // T^{n+1} sum_m (-x)^m / (m! (n + m + 1))
    cplx sum = 0.0;
    cplx power = 1.0;  // (-x)^m / m!
    for (int m = 0; m < 200; ++m) {
      const cplx term = power / static_cast<double>(n + m + 1);
      sum += term;
      if (m > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
      power *= -x / static_cast<double>(m + 1);
    }
    return tn1 * sum;
  }
  // n! / rate^{n+1} (1 - e^{-x} sum_{k<=n} x^k / k!)
  cplx partial = 0.0;
  cplx xk = 1.0;
  for (int k = 0; k <= n; ++k) {
    partial += xk;
    xk *= x / static_cast<double>(k + 1);
  }
  const cplx decay = x.real() > 700.0 ? cplx(0.0) : std::exp(-x);
  return factorial(n) / std::pow(rate, n + 1) * (1.0 - decay * partial);
}

ExpPoly ExpPoly::constant(cplx c) { return term(c, 0, 0.0); }

ExpPoly ExpPoly::term(cplx c, int power, cplx rate) {
  ExpPoly p;
  if (c != cplx(0.0)) p.terms_.push_back({c, power, rate});
  return p;
}

ExpPoly ExpPoly::sinusoid(double a, double b, double c, double w, double horizon) {
  ExpPoly p = constant(a);
  if ((b != 0.0 || c != 0.0) && w != 0.0) {
    const cplx phase = std::polar(1.0, w * horizon);
    p += term(phase * cplx(b, -c) * 0.5, 0, cplx(0.0, w));
    p += term(std::conj(phase) * cplx(b, c) * 0.5, 0, cplx(0.0, -w));
  } else if (w == 0.0) {
    p += constant(b);
  }
  return p;
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

ExpPoly& ExpPoly::operator*=(cplx s) {
  if (s == cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= s;
  return *this;
}

ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
  ExpPoly out;
  out.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_)
    for (const auto& tb : b.terms_)
      out.terms_.push_back({ta.coeff * tb.coeff, ta.power + tb.power, ta.rate + tb.rate});
  return out;
}

ExpPoly ExpPoly::decay_convolve(double rate, double horizon) const {
  ExpPoly out;
  for (const auto& t : terms_) {
    const cplx lambda = t.rate - rate;
    if (std::abs(lambda) * horizon < kSeriesThreshold) {
      // int_0^v v'^n e^{-lambda v'} dv' = sum_m (-lambda)^m v^{n+m+1} / (m! (n+m+1))
      cplx power = 1.0;
      const double tiny = 1e-18;
      for (int m = 0; m < 200; ++m) {
        const int deg = t.power + m + 1;
        out.terms_.push_back({t.coeff * power / static_cast<double>(deg), deg, cplx(rate)});
        power *= -lambda / static_cast<double>(m + 1);
        if (std::abs(power) * std::pow(horizon, m + 1) < tiny) break;
      }
      continue;
    }
    // n!/lambda^{n+1} - sum_k n!/(k! lambda^{n+1-k}) v^k e^{-lambda v}, times e^{-r v}.
    const int n = t.power;
    const double nf = factorial(n);
    out.terms_.push_back({t.coeff * nf / std::pow(lambda, n + 1), 0, cplx(rate)});
    double kf = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) kf *= k;
      out.terms_.push_back({-t.coeff * nf / (kf * std::pow(lambda, n + 1 - k)), k, t.rate});
    }
  }
  out.simplify(horizon);
  return out;
}

cplx ExpPoly::operator()(double v) const {
  cplx sum = 0.0;
  for (const auto& t : terms_) sum += t.coeff * std::pow(v, t.power) * std::exp(-t.rate * v);
  return sum;
}

cplx ExpPoly::definite_integral(double horizon) const {
  cplx sum = 0.0;
  for (const auto& t : terms_) sum += t.coeff * exp_moment(t.power, t.rate, horizon);
  return sum;
}

void ExpPoly::simplify(double horizon) {
  if (terms_.empty()) return;
  std::sort(terms_.begin(), terms_.end(), [](const ExpPolyTerm& a, const ExpPolyTerm& b) {
    if (a.power != b.power) return a.power < b.power;
    if (a.rate.real() != b.rate.real()) return a.rate.real() < b.rate.real();
    return a.rate.imag() < b.rate.imag();
  });

  std::vector<ExpPolyTerm> merged;
  merged.reserve(terms_.size());
  std::size_t block_start = 0;  // first merged term with the current power
  for (const auto& t : terms_) {
    if (merged.empty() || merged.back().power != t.power) block_start = merged.size();
    bool absorbed = false;
    // Walk back through terms of equal power whose real rate is within tolerance.
    for (std::size_t k = merged.size(); k-- > block_start;) {
      const double scale = std::max({1.0, std::abs(merged[k].rate), std::abs(t.rate)});
      if (t.rate.real() - merged[k].rate.real() > 1e-12 * scale) break;
      if (same_rate(merged[k].rate, t.rate)) {
        merged[k].coeff += t.coeff;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(t);
  }

  double largest = 0.0;
  std::vector<double> scales(merged.size());
  for (std::size_t k = 0; k < merged.size(); ++k) {
    scales[k] = std::abs(merged[k].coeff) * term_scale(merged[k].power, merged[k].rate, horizon);
    largest = std::max(largest, scales[k]);
  }
  terms_.clear();
  for (std::size_t k = 0; k < merged.size(); ++k)
    if (scales[k] > 1e-17 * largest && scales[k] > 0.0) terms_.push_back(merged[k]);
}

cplx inner_product(const ExpPoly& f, const ExpPoly& g, double horizon) {
  cplx sum = 0.0;
  for (const auto& a : f.terms())
    for (const auto& b : g.terms())
      sum += a.coeff * b.coeff * exp_moment(a.power + b.power, a.rate + b.rate, horizon);
  return sum;
}

}  // namespace qnd
