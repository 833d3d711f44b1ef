#ifndef MODALREG_DISTRIBUTIONS_HPP
#define MODALREG_DISTRIBUTIONS_HPP

// Members of the general unimodal (GUD) family plus the two baseline
// likelihoods. Each family has
//   - a plain parameter struct (constrained space, double),
//   - a kernel template that precomputes the parameter-only terms once and then
//     evaluates ln f(y | theta) per observation; the regression model
//     instantiates it with dual numbers to get gradients.
//
// Type I members (FG, logNM) combine the two components with log-sum-exp.
// Type II members (DTP, TPSC, ALD) pick the branch by y < theta.

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <variant>

#include "modalreg/math.hpp"

namespace modalreg {

using Rng = std::mt19937_64;

struct FgParams {
  double w;
  double theta;
  double sigma1;
  double sigma2;
};

/// DTP Student-t. The mixture weight is always derived (dtp_weight).
struct DtpParams {
  double theta;
  double sigma1;
  double sigma2;
  double delta1;
  double delta2;
};

struct TpscParams {
  double w;
  double theta;
  double sigma;
  double delta;
};

struct LogNmParams {
  double w;
  double theta;
  double mu1;
  double nu1;
  double mu2;
  double nu2;
};

struct NormalParams {
  double theta;
  double sigma;
};

/// Asymmetric Laplace with check-function loss; p = 0.5 is median regression.
struct AldParams {
  double theta;
  double sigma;
  double p = 0.5;
};

using LikelihoodParams =
    std::variant<FgParams, DtpParams, TpscParams, LogNmParams, NormalParams, AldParams>;

// ---------------------------------------------------------------------------
// Kernels

template <class T>
class FgKernel {
 public:
  FgKernel(const T& log_w, const T& log_1mw, const T& sigma1, const T& sigma2)
      : left_(log_w - log_of(sigma1)),
        right_(log_1mw - log_of(sigma2)),
        inv1_(1.0 / sigma1),
        inv2_(1.0 / sigma2) {}

  T operator()(const T& theta, double y) const {
    const T left = left_ + log_gumbel_standard((theta - y) * inv1_);
    const T right = right_ + log_gumbel_standard((y - theta) * inv2_);
    return log_sum_exp(left, right);
  }

  std::pair<T, T> components(const T& theta, double y) const {
    return {left_ + log_gumbel_standard((theta - y) * inv1_),
            right_ + log_gumbel_standard((y - theta) * inv2_)};
  }

 private:
  static T log_of(const T& x) {
    using std::log;
    return log(x);
  }
  T left_, right_, inv1_, inv2_;
};

/// ln w for the DTP weight, computed without forming w.
template <class T>
T dtp_log_weight(const T& sigma1, const T& sigma2, const T& delta1, const T& delta2) {
  using std::log;
  const T a = log(sigma1) + log_t_kernel_at_zero(delta2);
  const T b = log(sigma2) + log_t_kernel_at_zero(delta1);
  return a - log_sum_exp(a, b);
}

template <class T>
class DtpKernel {
 public:
  DtpKernel(const T& sigma1, const T& sigma2, const T& delta1, const T& delta2)
      : inv1_(1.0 / sigma1), inv2_(1.0 / sigma2), delta1_(delta1), delta2_(delta2) {
    using std::log;
    const T g1 = log_t_kernel_at_zero(delta1);
    const T g2 = log_t_kernel_at_zero(delta2);
    // 2 w g(0|d1) / s1 == 2 (1-w) g(0|d2) / s2: both branches share one constant.
    const T denom = log_sum_exp(log(sigma1) + g2, log(sigma2) + g1);
    const_ = kLogTwo + g1 + g2 - denom;
    log_w_ = log(sigma1) + g2 - denom;
    log_1mw_ = log(sigma2) + g1 - denom;
  }

  T operator()(const T& theta, double y) const {
    if (y < value_of(theta)) return const_ + log_t_shape((y - theta) * inv1_, delta1_);
    return const_ + log_t_shape((y - theta) * inv2_, delta2_);
  }

  std::pair<T, T> components(const T& theta, double y) const {
    const T ninf(kNegInf);
    if (y < value_of(theta)) return {(*this)(theta, y), ninf};
    return {ninf, (*this)(theta, y)};
  }

  const T& log_w() const { return log_w_; }
  const T& log_1mw() const { return log_1mw_; }

 private:
  T inv1_, inv2_, delta1_, delta2_;
  T const_;
  T log_w_, log_1mw_;
};

template <class T>
class TpscKernel {
 public:
  TpscKernel(const T& log_w, const T& log_1mw, const T& sigma, const T& delta) : delta_(delta) {
    using std::exp;
    using std::log;
    const T half_logit = 0.5 * (log_w - log_1mw);
    // scales sigma sqrt(w/(1-w)) and sigma sqrt((1-w)/w)
    inv1_ = exp(-half_logit) / sigma;
    inv2_ = exp(half_logit) / sigma;
    const_ = kLogTwo + 0.5 * (log_w + log_1mw) - log(sigma) + log_t_kernel_at_zero(delta);
  }

  T operator()(const T& theta, double y) const {
    if (y < value_of(theta)) return const_ + log_t_shape((y - theta) * inv1_, delta_);
    return const_ + log_t_shape((y - theta) * inv2_, delta_);
  }

  std::pair<T, T> components(const T& theta, double y) const {
    const T ninf(kNegInf);
    if (y < value_of(theta)) return {(*this)(theta, y), ninf};
    return {ninf, (*this)(theta, y)};
  }

 private:
  T delta_, inv1_, inv2_, const_;
};

template <class T>
class LogNmKernel {
 public:
  LogNmKernel(const T& log_w, const T& log_1mw, const T& mu1, const T& nu1, const T& mu2,
              const T& nu2)
      : mu1_(mu1), mu2_(mu2) {
    using std::exp;
    using std::log;
    shift1_ = exp(mu1 - nu1 * nu1);
    shift2_ = exp(mu2 - nu2 * nu2);
    c1_ = log_w - log(nu1) - kHalfLogTwoPi;
    c2_ = log_1mw - log(nu2) - kHalfLogTwoPi;
    h1_ = 0.5 / (nu1 * nu1);
    h2_ = 0.5 / (nu2 * nu2);
  }

  T operator()(const T& theta, double y) const {
    const auto [a, b] = components(theta, y);
    return log_sum_exp(a, b);
  }

  std::pair<T, T> components(const T& theta, double y) const {
    const T d = y - theta;
    return {lognormal(shift1_ - d, c1_, mu1_, h1_), lognormal(shift2_ + d, c2_, mu2_, h2_)};
  }

 private:
  static T lognormal(const T& z, const T& c, const T& mu, const T& h) {
    using std::log;
    if (!(z > 0.0)) return T(kNegInf);
    const T lz = log(z);
    const T r = lz - mu;
    return c - lz - h * r * r;
  }
  T mu1_, mu2_, shift1_, shift2_, c1_, c2_, h1_, h2_;
};

template <class T>
class NormalKernel {
 public:
  explicit NormalKernel(const T& sigma) : inv_(1.0 / sigma) {
    using std::log;
    const_ = -log(sigma) - kHalfLogTwoPi;
  }
  T operator()(const T& theta, double y) const {
    const T z = (y - theta) * inv_;
    return const_ - 0.5 * z * z;
  }

 private:
  T inv_, const_;
};

template <class T>
class AldKernel {
 public:
  AldKernel(const T& sigma, double p) : p_(p), inv_(1.0 / sigma) {
    using std::log;
    const_ = std::log(p * (1.0 - p)) - log(sigma);
  }
  T operator()(const T& theta, double y) const {
    const T z = (y - theta) * inv_;
    if (y < value_of(theta)) return const_ + (1.0 - p_) * z;  // rho_p(z) = z (p - 1)
    return const_ - p_ * z;
  }

 private:
  double p_;
  T inv_, const_;
};

// ---------------------------------------------------------------------------
// Checked public API on constrained parameters.

/// Throws std::domain_error when the parameter block violates its invariants.
void validate(const LikelihoodParams& params);

/// ln f(y | params).
double log_pdf(const LikelihoodParams& params, double y);

/// ln(w f1(y)) and ln((1-w) f2(y)); -inf where a component has no support.
std::pair<double, double> component_log_pdfs(const LikelihoodParams& params, double y);

/// Continuity-preserving DTP weight.
double dtp_weight(double sigma1, double sigma2, double delta1, double delta2);

/// Effective mixing weight of the left component (p for ALD, 0.5 for normal).
double mixture_weight(const LikelihoodParams& params);

/// The mode; theta for every family.
double mode_of(const LikelihoodParams& params);

/// Same parameters with the mode moved to `theta`.
LikelihoodParams with_theta(const LikelihoodParams& params, double theta);

/// Density height at the mode, f_Z(0); the theta field is ignored.
double fz_at_zero(const LikelihoodParams& params);

/// One draw via Z ~ Bernoulli(w), then the chosen component.
double sample(const LikelihoodParams& params, Rng& rng);

/// Fernandez-Steel gamma = sqrt(w / (1 - w)) and its inverse.
double tpsc_gamma_from_w(double w);
double tpsc_w_from_gamma(double gamma);

std::string family_name(const LikelihoodParams& params);

}  // namespace modalreg

#endif  // MODALREG_DISTRIBUTIONS_HPP
