#ifndef MODALREG_MATH_HPP
#define MODALREG_MATH_HPP

// Special functions and elementary log-density kernels. Every kernel is a
// template over the scalar type so the same code path serves plain doubles
// and forward-mode duals (see dual.hpp).

#include <cmath>
#include <limits>
#include <numbers>

namespace modalreg {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogPi = 1.1447298858494001741;
inline constexpr double kLogTwo = std::numbers::ln2;
inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;

inline double value_of(double x) { return x; }

/// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// d/dx ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double digamma(double x);

/// ln Gamma(a + 1/2) - ln Gamma(a), without the cancellation of the plain
/// difference at large a.
double log_gamma_half_ratio(double a);
/// Its derivative, digamma(a + 1/2) - digamma(a).
double log_gamma_half_ratio_slope(double a);

/// Log of the standard Student-t density with `delta` degrees of freedom at
/// zero: lgamma((delta+1)/2) - lgamma(delta/2) - 0.5 ln(delta pi).
template <class T>
T log_t_kernel_at_zero(const T& delta) {
  using std::log;
  return log_gamma_half_ratio(0.5 * delta) - 0.5 * (log(delta) + kLogPi);
}

/// Student-t shape term -((delta+1)/2) ln(1 + x^2/delta). Adding
/// log_t_kernel_at_zero gives the full log density.
template <class T, class X>
T log_t_shape(const X& x, const T& delta) {
  using std::log1p;
  return -(0.5 * delta + 0.5) * log1p(x * x / delta);
}

/// Checked double version, see StudentKernelArgs.
struct StudentKernelArgs {
  double x;
  double delta;
};

double log_t_kernel(StudentKernelArgs args);

/// Gumbel (maximum) log density -ln(sigma) - z - exp(-z), z = (y-theta)/sigma.
double log_gumbel_pdf(double y, double theta, double sigma);

/// Unchecked generic form on a standardized argument, without the -ln(sigma).
template <class T>
T log_gumbel_standard(const T& z) {
  using std::exp;
  return -z - exp(-z);
}

/// log(exp(a) + exp(b)) that tolerates -inf in either argument.
template <class T>
T log_sum_exp(const T& a, const T& b) {
  using std::exp;
  using std::log1p;
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a > b) return a + log1p(exp(b - a));
  return b + log1p(exp(a - b));
}

/// ln(1 / (1 + exp(-u))) without overflow.
template <class T>
T log_inv_logit(const T& u) {
  using std::exp;
  using std::log1p;
  if (u > 0.0) return -log1p(exp(-u));
  return u - log1p(exp(u));
}

}  // namespace modalreg

#endif  // MODALREG_MATH_HPP
