#include "modalreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <unsupported/Eigen/FFT>

#include "modalreg/stats.hpp"

namespace modalreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_shape(const ChainMatrix& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw std::invalid_argument("diagnostics: chains differ in length");
  }
}

// Constant or non-finite input has no defined R-hat or ESS.
bool undefined(const ChainMatrix& chains) {
  const double first = chains.front().empty() ? 0.0 : chains.front().front();
  bool constant = true;
  for (const auto& c : chains) {
    for (double v : c) {
      if (!std::isfinite(v)) return true;
      if (v != first) constant = false;
    }
  }
  return constant;
}

// Biased autocovariance (divide by n) at every lag, via zero-padded FFT.
std::vector<double> autocovariance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  const double mu = mean(x);
  std::vector<double> padded(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - mu;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& f : freq) f = std::norm(f);
  std::vector<double> ac;
  fft.inv(ac, freq);
  ac.resize(n);
  for (auto& v : ac) v /= static_cast<double>(n);
  return ac;
}

}  // namespace

double rhat_basic(const ChainMatrix& chains) {
  check_shape(chains);
  if (chains.size() < 2 || undefined(chains)) return kNaN;
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean(c));
    vars.push_back(variance(c));
  }
  const double between = n * variance(means);
  const double within = mean(vars);
  return std::sqrt((between / within + n - 1.0) / n);
}

double ess_basic(const ChainMatrix& chains) {
  check_shape(chains);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  if (n < 4 || undefined(chains)) return kNaN;

  std::vector<std::vector<double>> acov;
  std::vector<double> chain_mean, chain_var;
  for (const auto& c : chains) {
    acov.push_back(autocovariance(c));
    chain_mean.push_back(mean(c));
    chain_var.push_back(acov.back()[0] * static_cast<double>(n) / (static_cast<double>(n) - 1.0));
  }
  const double mean_var = mean(chain_var);
  double var_plus = mean_var * (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  if (m > 1) var_plus += variance(chain_mean);

  auto rho_at = [&](std::size_t t) {
    double s = 0.0;
    for (const auto& a : acov) s += a[t];
    return 1.0 - (mean_var - s / static_cast<double>(m)) / var_plus;
  };

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double even = 1.0;
  double odd = rho_at(1);
  rho[1] = odd;
  std::size_t t = 0;
  while (t + 5 < n && !std::isnan(even + odd) && even + odd > 0.0) {
    t += 2;
    even = rho_at(t);
    odd = rho_at(t + 1);
    if (even + odd >= 0.0) {
      rho[t] = even;
      rho[t + 1] = odd;
    }
  }
  const std::size_t max_t = t;
  if (even > 0.0) rho[max_t] = even;

  // initial monotone sequence
  t = 0;
  while (t + 4 <= max_t) {
    t += 2;
    if (rho[t] + rho[t + 1] > rho[t - 2] + rho[t - 1]) {
      rho[t] = 0.5 * (rho[t - 2] + rho[t - 1]);
      rho[t + 1] = rho[t];
    }
  }
  const double total = static_cast<double>(m * n);
  double tau = -1.0 + rho[max_t];
  for (std::size_t k = 0; k < max_t; ++k) tau += 2.0 * rho[k];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

ChainMatrix split_chains(const ChainMatrix& chains) {
  check_shape(chains);
  const std::size_t n = chains.front().size();
  if (n < 2) return chains;
  const std::size_t half = n / 2;
  ChainMatrix out;
  for (const auto& c : chains) {
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

ChainMatrix z_scale(const ChainMatrix& chains) {
  check_shape(chains);
  std::vector<std::pair<double, std::size_t>> all;
  for (const auto& c : chains) {
    for (double v : c) all.emplace_back(v, all.size());
  }
  std::sort(all.begin(), all.end());
  const double s = static_cast<double>(all.size());
  std::vector<double> z(all.size());
  boost::math::normal_distribution<double> normal;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    const double value = boost::math::quantile(normal, (avg_rank - 0.375) / (s + 0.25));
    for (std::size_t k = i; k < j; ++k) z[all[k].second] = value;
    i = j;
  }
  ChainMatrix out = chains;
  std::size_t idx = 0;
  for (auto& c : out) {
    for (auto& v : c) v = z[idx++];
  }
  return out;
}

double rhat(const ChainMatrix& chains) {
  check_shape(chains);
  if (undefined(chains)) return kNaN;
  const auto split = split_chains(chains);
  const double bulk = rhat_basic(z_scale(split));
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const double med = median(pooled);
  ChainMatrix folded = split;
  for (auto& c : folded) {
    for (auto& v : c) v = std::abs(v - med);
  }
  const double tail = rhat_basic(z_scale(folded));
  return std::max(bulk, tail);
}

double ess_bulk(const ChainMatrix& chains) {
  check_shape(chains);
  if (undefined(chains)) return kNaN;
  return ess_basic(z_scale(split_chains(chains)));
}

double ess_tail(const ChainMatrix& chains) {
  check_shape(chains);
  if (undefined(chains)) return kNaN;
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  std::sort(pooled.begin(), pooled.end());
  auto ess_below = [&](double q) {
    ChainMatrix ind = chains;
    for (auto& c : ind) {
      for (auto& v : c) v = v <= q ? 1.0 : 0.0;
    }
    return ess_basic(split_chains(ind));
  };
  const double lo = ess_below(quantile_sorted(pooled, 0.05));
  const double hi = ess_below(quantile_sorted(pooled, 0.95));
  if (std::isnan(lo)) return hi;
  if (std::isnan(hi)) return lo;
  return std::min(lo, hi);
}

Diagnostics compute_diagnostics(const PosteriorDraws& draws) {
  if (draws.chains < 2) throw std::invalid_argument("compute_diagnostics: need at least 2 chains");
  if (draws.samples < 4) throw std::invalid_argument("compute_diagnostics: need at least 4 draws per chain");
  if (draws.values.size() != draws.chains * draws.samples * draws.dim ||
      draws.names.size() != draws.dim) {
    throw std::invalid_argument("compute_diagnostics: draws array does not match its dimensions");
  }
  Diagnostics out;
  out.names = draws.names;
  for (std::size_t j = 0; j < draws.dim; ++j) {
    ChainMatrix chains;
    for (std::size_t c = 0; c < draws.chains; ++c) chains.push_back(draws.chain_values(c, j));
    out.params.push_back({rhat(chains), ess_bulk(chains), ess_tail(chains)});
  }
  return out;
}

}  // namespace modalreg
