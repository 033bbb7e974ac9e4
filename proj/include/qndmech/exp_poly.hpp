#pragma once

// Exponential polynomials on a finite horizon [0, T]:
//
//   f(v) = sum_k c_k v^{n_k} exp(-mu_k v),   Re mu_k >= 0 in practice.
//
// The set is closed under sums, products, integration from 0 and convolution
// with a decaying exponential, which is all a linear cascade of damped
// oscillators driven by sinusoidally modulated couplings needs. Products of
// real functions are carried with complex coefficients and conjugate rates.

#include <complex>
#include <vector>

namespace qnd {

using cplx = std::complex<double>;

struct ExpPolyTerm {
  cplx coeff;
  int power = 0;
  cplx rate;
};

/// int_0^T v^n exp(-rate v) dv, stable for small and large |rate T|.
cplx exp_moment(int n, cplx rate, double horizon);

class ExpPoly {
 public:
  ExpPoly() = default;

  static ExpPoly constant(cplx c);
  static ExpPoly term(cplx c, int power, cplx rate);
  /// a + b cos(w (T - v)) + c sin(w (T - v)), i.e. a sinusoid of forward time
  /// t = T - v rewritten in the backward variable v.
  static ExpPoly sinusoid(double a, double b, double c, double w, double horizon);

  bool empty() const { return terms_.empty(); }
  const std::vector<ExpPolyTerm>& terms() const { return terms_; }

  ExpPoly& operator+=(const ExpPoly& other);
  ExpPoly& operator*=(cplx s);
  friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) { return a += b; }
  friend ExpPoly operator*(ExpPoly a, cplx s) { return a *= s; }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b);

  /// exp(-r v) int_0^v exp(r v') f(v') dv'.
  ExpPoly decay_convolve(double rate, double horizon) const;
  ExpPoly integral_from_zero(double horizon) const { return decay_convolve(0.0, horizon); }

  cplx operator()(double v) const;
  cplx definite_integral(double horizon) const;

  /// Merges terms with equal power and rate; drops terms negligible on [0, T].
  void simplify(double horizon);

 private:
  std::vector<ExpPolyTerm> terms_;
};

/// int_0^T f(v) g(v) dv without materialising the product.
cplx inner_product(const ExpPoly& f, const ExpPoly& g, double horizon);

}  // namespace qnd
