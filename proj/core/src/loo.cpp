#include "modalreg/loo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "modalreg/math.hpp"
#include "modalreg/stats.hpp"

namespace modalreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_sum_exp_all(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

LogLikMatrix pointwise_loglik(const PosteriorDraws& draws, const ModelSpec& spec,
                              const Dataset& data) {
  RegressionModel model(spec, data);
  if (draws.dim != model.dim()) {
    throw std::invalid_argument("pointwise_loglik: draws have " + std::to_string(draws.dim) +
                                " parameters but the model has " + std::to_string(model.dim()));
  }
  if (draws.names != model.layout().names()) {
    throw std::invalid_argument("pointwise_loglik: parameter names do not match the model");
  }
  const std::size_t total = draws.chains * draws.samples;
  LogLikMatrix out;
  out.values.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(data.n()));
  for (std::size_t s = 0; s < total; ++s) {
    const std::span<const double> c(draws.values.data() + s * draws.dim, draws.dim);
    const auto row = model.pointwise_log_likelihood(c);
    for (std::size_t i = 0; i < row.size(); ++i) {
      out.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = row[i];
    }
  }
  return out;
}

GpdFit fit_gpd(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit_gpd: need at least 2 exceedances");
  constexpr double prior = 3.0;
  const std::size_t m = 30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const double xstar = x[static_cast<std::size_t>(std::floor(n / 4.0 + 0.5)) - 1];
  const double xmax = x[n - 1];

  std::vector<double> theta(m), log_lik(m);
  for (std::size_t j = 0; j < m; ++j) {
    theta[j] = 1.0 / xmax + (1.0 - std::sqrt(m / (j + 0.5))) / prior / xstar;
    // profile log-likelihood
    const double a = -theta[j];
    double k = 0.0;
    for (double v : x) k += std::log1p(a * v);
    k /= static_cast<double>(n);
    log_lik[j] = static_cast<double>(n) * (std::log(a / k) - k - 1.0);
  }
  const double lse = log_sum_exp_all(log_lik);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < m; ++j) theta_hat += theta[j] * std::exp(log_lik[j] - lse);

  double k = 0.0;
  for (double v : x) k += std::log1p(-theta_hat * v);
  k /= static_cast<double>(n);
  const double sigma = -k / theta_hat;
  constexpr double a = 10.0;
  k = k * n / (n + a) + a * 0.5 / (n + a);
  if (std::isnan(k)) k = std::numeric_limits<double>::infinity();
  return {k, sigma};
}

PsisWeights psis_smooth(std::span<const double> log_ratios) {
  const std::size_t s = log_ratios.size();
  if (s < 2) throw std::invalid_argument("psis: need at least 2 draws");
  const double max_raw = *std::max_element(log_ratios.begin(), log_ratios.end());
  std::vector<double> lw(log_ratios.begin(), log_ratios.end());
  for (auto& v : lw) v -= max_raw;

  const double sd = static_cast<double>(s);
  const auto tail_len = static_cast<std::size_t>(std::ceil(std::min(0.2 * sd, 3.0 * std::sqrt(sd))));
  double k = kNaN;
  if (tail_len >= 5 && tail_len < s) {
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lw[a] < lw[b]; });
    const std::size_t first = s - tail_len;
    const double lo = lw[order[first]];
    const double hi = lw[order[s - 1]];
    if (std::abs(hi - lo) >= std::numeric_limits<double>::epsilon() / 100.0) {
      const double cutoff = lw[order[first - 1]];
      const double exp_cutoff = std::exp(cutoff);
      std::vector<double> exceed(tail_len);
      for (std::size_t t = 0; t < tail_len; ++t) exceed[t] = std::exp(lw[order[first + t]]) - exp_cutoff;
      const GpdFit fit = fit_gpd(exceed);
      k = fit.k;
      if (std::isfinite(fit.k)) {
        for (std::size_t t = 0; t < tail_len; ++t) {
          const double p = (static_cast<double>(t) + 0.5) / static_cast<double>(tail_len);
          const double q = fit.sigma * std::expm1(-fit.k * std::log1p(-p)) / fit.k;
          lw[order[first + t]] = std::log(q + exp_cutoff);
        }
      }
    }
  }
  for (auto& v : lw) {
    v = std::min(v, 0.0) + max_raw;
  }
  return {lw, k};
}

LooResult psis_loo(const LogLikMatrix& ll) {
  const Eigen::Index s = ll.values.rows();
  const Eigen::Index n = ll.values.cols();
  if (s < 2) throw std::invalid_argument("psis_loo: need at least 2 draws");
  if (n < 1) throw std::invalid_argument("psis_loo: no observations");
  LooResult out;
  out.pointwise.resize(static_cast<std::size_t>(n));
  out.pareto_k.resize(static_cast<std::size_t>(n));
  std::vector<double> col(static_cast<std::size_t>(s)), ratios(col.size()), terms(col.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    bool any_neg_inf = false;
    bool all_neg_inf = true;
    for (Eigen::Index r = 0; r < s; ++r) {
      const double v = ll.values(r, i);
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("psis_loo: NaN or +inf log-likelihood in column " +
                                    std::to_string(i));
      }
      col[static_cast<std::size_t>(r)] = v;
      any_neg_inf = any_neg_inf || v == kNegInf;
      all_neg_inf = all_neg_inf && v == kNegInf;
    }
    if (all_neg_inf) {
      throw std::invalid_argument("psis_loo: every draw gives zero density to observation " +
                                  std::to_string(i));
    }
    const auto idx = static_cast<std::size_t>(i);
    if (any_neg_inf) {
      // an infinite importance ratio: the harmonic-mean estimate is zero
      out.pointwise[idx] = kNegInf;
      out.pareto_k[idx] = kNaN;
      continue;
    }
    for (std::size_t r = 0; r < col.size(); ++r) ratios[r] = -col[r];
    const PsisWeights w = psis_smooth(ratios);
    for (std::size_t r = 0; r < col.size(); ++r) terms[r] = w.log_weights[r] + col[r];
    out.pointwise[idx] = log_sum_exp_all(terms) - log_sum_exp_all(w.log_weights);
    out.pareto_k[idx] = w.pareto_k;
  }
  out.elpd = std::accumulate(out.pointwise.begin(), out.pointwise.end(), 0.0);
  out.se = std::sqrt(static_cast<double>(n) * variance(out.pointwise));
  return out;
}

}  // namespace modalreg
