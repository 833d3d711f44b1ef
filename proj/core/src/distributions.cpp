#include "modalreg/distributions.hpp"

#include <stdexcept>

namespace modalreg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* family, const char* message) {
  if (!ok) throw std::domain_error(std::string(family) + ": " + message);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

double student_t(double delta, Rng& rng) {
  std::normal_distribution<double> normal;
  std::gamma_distribution<double> chi2_half(0.5 * delta, 2.0);
  const double z = normal(rng);
  return z / std::sqrt(chi2_half(rng) / delta);
}

// Draw from the symmetric parent and keep it only on the requested side of
// zero; acceptance probability is exactly 1/2.
double half_student_t(double delta, bool left, Rng& rng) {
  for (;;) {
    const double t = student_t(delta, rng);
    if (left ? t < 0.0 : t >= 0.0) return t;
  }
}

bool bernoulli(double w, Rng& rng) {
  if (w >= 1.0) return true;
  if (w <= 0.0) return false;
  return std::bernoulli_distribution(w)(rng);
}

double standard_gumbel_max(Rng& rng) {
  // inverse CDF of exp(-exp(-z)); keep u away from 0 so log(-log u) is finite
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  return -std::log(-std::log(u));
}

}  // namespace

void validate(const LikelihoodParams& params) {
  std::visit(Overloaded{
                 [](const FgParams& p) {
                   require(p.w >= 0.0 && p.w <= 1.0, "FG", "w must lie in [0, 1]");
                   require(std::isfinite(p.theta), "FG", "theta must be finite");
                   require(positive(p.sigma1) && positive(p.sigma2), "FG",
                           "sigma1, sigma2 must be > 0");
                 },
                 [](const DtpParams& p) {
                   require(std::isfinite(p.theta), "DTP-t", "theta must be finite");
                   require(positive(p.sigma1) && positive(p.sigma2), "DTP-t",
                           "sigma1, sigma2 must be > 0");
                   require(positive(p.delta1) && positive(p.delta2), "DTP-t",
                           "delta1, delta2 must be > 0");
                 },
                 [](const TpscParams& p) {
                   require(p.w > 0.0 && p.w < 1.0, "TPSC-t", "w must lie in (0, 1)");
                   require(std::isfinite(p.theta), "TPSC-t", "theta must be finite");
                   require(positive(p.sigma), "TPSC-t", "sigma must be > 0");
                   require(positive(p.delta), "TPSC-t", "delta must be > 0");
                 },
                 [](const LogNmParams& p) {
                   require(p.w >= 0.0 && p.w <= 1.0, "logNM", "w must lie in [0, 1]");
                   require(std::isfinite(p.theta), "logNM", "theta must be finite");
                   require(std::isfinite(p.mu1) && std::isfinite(p.mu2), "logNM",
                           "mu1, mu2 must be finite");
                   require(positive(p.nu1) && positive(p.nu2), "logNM", "nu1, nu2 must be > 0");
                 },
                 [](const NormalParams& p) {
                   require(std::isfinite(p.theta), "normal", "theta must be finite");
                   require(positive(p.sigma), "normal", "sigma must be > 0");
                 },
                 [](const AldParams& p) {
                   require(std::isfinite(p.theta), "ALD", "theta must be finite");
                   require(positive(p.sigma), "ALD", "sigma must be > 0");
                   require(p.p > 0.0 && p.p < 1.0, "ALD", "p must lie in (0, 1)");
                 },
             },
             params);
}

std::pair<double, double> component_log_pdfs(const LikelihoodParams& params, double y) {
  validate(params);
  if (!std::isfinite(y)) throw std::domain_error("log_pdf: y must be finite");
  return std::visit(
      Overloaded{
          [y](const FgParams& p) {
            return FgKernel<double>(std::log(p.w), std::log1p(-p.w), p.sigma1, p.sigma2)
                .components(p.theta, y);
          },
          [y](const DtpParams& p) {
            return DtpKernel<double>(p.sigma1, p.sigma2, p.delta1, p.delta2)
                .components(p.theta, y);
          },
          [y](const TpscParams& p) {
            return TpscKernel<double>(std::log(p.w), std::log1p(-p.w), p.sigma, p.delta)
                .components(p.theta, y);
          },
          [y](const LogNmParams& p) {
            return LogNmKernel<double>(std::log(p.w), std::log1p(-p.w), p.mu1, p.nu1, p.mu2,
                                       p.nu2)
                .components(p.theta, y);
          },
          [y](const NormalParams& p) {
            // a single symmetric component, split as 0.5 / 0.5
            const double l = NormalKernel<double>(p.sigma)(p.theta, y) - kLogTwo;
            return std::pair{l, l};
          },
          [y](const AldParams& p) {
            const double l = AldKernel<double>(p.sigma, p.p)(p.theta, y);
            if (y < p.theta) return std::pair{l, kNegInf};
            return std::pair{kNegInf, l};
          },
      },
      params);
}

double log_pdf(const LikelihoodParams& params, double y) {
  validate(params);
  if (!std::isfinite(y)) throw std::domain_error("log_pdf: y must be finite");
  return std::visit(
      Overloaded{
          [y](const FgParams& p) {
            return FgKernel<double>(std::log(p.w), std::log1p(-p.w), p.sigma1, p.sigma2)(p.theta,
                                                                                         y);
          },
          [y](const DtpParams& p) {
            return DtpKernel<double>(p.sigma1, p.sigma2, p.delta1, p.delta2)(p.theta, y);
          },
          [y](const TpscParams& p) {
            return TpscKernel<double>(std::log(p.w), std::log1p(-p.w), p.sigma, p.delta)(p.theta,
                                                                                         y);
          },
          [y](const LogNmParams& p) {
            return LogNmKernel<double>(std::log(p.w), std::log1p(-p.w), p.mu1, p.nu1, p.mu2,
                                       p.nu2)(p.theta, y);
          },
          [y](const NormalParams& p) { return NormalKernel<double>(p.sigma)(p.theta, y); },
          [y](const AldParams& p) { return AldKernel<double>(p.sigma, p.p)(p.theta, y); },
      },
      params);
}

double dtp_weight(double sigma1, double sigma2, double delta1, double delta2) {
  require(positive(sigma1) && positive(sigma2) && positive(delta1) && positive(delta2),
          "dtp_weight", "all arguments must be > 0");
  return std::exp(dtp_log_weight(sigma1, sigma2, delta1, delta2));
}

double mixture_weight(const LikelihoodParams& params) {
  validate(params);
  return std::visit(Overloaded{
                        [](const FgParams& p) { return p.w; },
                        [](const DtpParams& p) {
                          return dtp_weight(p.sigma1, p.sigma2, p.delta1, p.delta2);
                        },
                        [](const TpscParams& p) { return p.w; },
                        [](const LogNmParams& p) { return p.w; },
                        [](const NormalParams&) { return 0.5; },
                        [](const AldParams& p) { return p.p; },
                    },
                    params);
}

double mode_of(const LikelihoodParams& params) {
  return std::visit([](const auto& p) { return p.theta; }, params);
}

LikelihoodParams with_theta(const LikelihoodParams& params, double theta) {
  return std::visit(
      [theta](auto p) -> LikelihoodParams {
        p.theta = theta;
        return p;
      },
      params);
}

double fz_at_zero(const LikelihoodParams& params) {
  return std::exp(log_pdf(with_theta(params, 0.0), 0.0));
}

double sample(const LikelihoodParams& params, Rng& rng) {
  validate(params);
  return std::visit(
      Overloaded{
          [&rng](const FgParams& p) {
            const double g = standard_gumbel_max(rng);
            // left component is the Gumbel for the minimum
            if (bernoulli(p.w, rng)) return p.theta - p.sigma1 * g;
            return p.theta + p.sigma2 * g;
          },
          [&rng](const DtpParams& p) {
            const double w = dtp_weight(p.sigma1, p.sigma2, p.delta1, p.delta2);
            if (bernoulli(w, rng)) return p.theta + p.sigma1 * half_student_t(p.delta1, true, rng);
            return p.theta + p.sigma2 * half_student_t(p.delta2, false, rng);
          },
          [&rng](const TpscParams& p) {
            const double gamma = tpsc_gamma_from_w(p.w);
            if (bernoulli(p.w, rng)) {
              return p.theta + p.sigma * gamma * half_student_t(p.delta, true, rng);
            }
            return p.theta + p.sigma / gamma * half_student_t(p.delta, false, rng);
          },
          [&rng](const LogNmParams& p) {
            std::normal_distribution<double> normal;
            if (bernoulli(p.w, rng)) {
              const double x = std::exp(p.mu1 + p.nu1 * normal(rng));
              return p.theta - (x - std::exp(p.mu1 - p.nu1 * p.nu1));
            }
            const double x = std::exp(p.mu2 + p.nu2 * normal(rng));
            return p.theta + (x - std::exp(p.mu2 - p.nu2 * p.nu2));
          },
          [&rng](const NormalParams& p) {
            return p.theta + p.sigma * std::normal_distribution<double>()(rng);
          },
          [&rng](const AldParams& p) {
            // left tail has mass p and rate (1-p)/sigma, right tail rate p/sigma
            std::exponential_distribution<double> expo(1.0);
            const bool left = bernoulli(p.p, rng);
            const double e = expo(rng);
            if (left) return p.theta - p.sigma * e / (1.0 - p.p);
            return p.theta + p.sigma * e / p.p;
          },
      },
      params);
}

double tpsc_gamma_from_w(double w) {
  require(w > 0.0 && w < 1.0, "tpsc_gamma_from_w", "w must lie in (0, 1)");
  return std::sqrt(w / (1.0 - w));
}

double tpsc_w_from_gamma(double gamma) {
  require(positive(gamma), "tpsc_w_from_gamma", "gamma must be > 0");
  return gamma * gamma / (1.0 + gamma * gamma);
}

std::string family_name(const LikelihoodParams& params) {
  return std::visit(Overloaded{
                        [](const FgParams&) { return std::string("fg"); },
                        [](const DtpParams&) { return std::string("dtp-t"); },
                        [](const TpscParams&) { return std::string("tpsc-t"); },
                        [](const LogNmParams&) { return std::string("lognm"); },
                        [](const NormalParams&) { return std::string("normal"); },
                        [](const AldParams&) { return std::string("ald"); },
                    },
                    params);
}

}  // namespace modalreg
