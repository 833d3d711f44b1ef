#ifndef MODALREG_SAMPLER_HPP
#define MODALREG_SAMPLER_HPP

// No-U-Turn sampler with multinomial trajectory sampling, the generalized
// U-turn check, dual-averaging step size adaptation and a diagonal mass
// matrix estimated over expanding warmup windows.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace modalreg {

struct SamplerConfig {
  int chains = 4;
  int warmup = 10000;
  int samples = 10000;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  int max_treedepth = 10;
  double init_radius = 2.0;
  int threads = 0;  // 0: one thread per hardware core

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// Log density and gradient at an unconstrained point. Must write the
/// gradient into the second argument and may return -inf.
using LogDensityGrad = std::function<double(std::span<const double>, std::span<double>)>;

/// Maps an unconstrained point to the reported (usually constrained) values.
using OutputTransform = std::function<std::vector<double>(std::span<const double>)>;

/// Draws stored chain-major: value(c, s, j) = values[(c * samples + s) * dim + j].
struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t chains = 0;
  std::size_t samples = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::uint64_t seed = 0;
  std::vector<int> divergences;      // per chain, post-warmup
  std::vector<int> treedepth_hits;   // per chain, post-warmup
  std::vector<double> stepsize;      // adapted step size per chain
  std::vector<std::vector<double>> inv_metric;  // adapted diagonal per chain
  std::vector<double> mean_accept;   // post-warmup mean acceptance statistic per chain

  double value(std::size_t chain, std::size_t draw, std::size_t j) const {
    return values[(chain * samples + draw) * dim + j];
  }
  /// One parameter, one chain, in draw order.
  std::vector<double> chain_values(std::size_t chain, std::size_t j) const;
  /// One parameter, all chains concatenated.
  std::vector<double> pooled(std::size_t j) const;
  /// Column index of a named parameter.
  std::size_t index_of(const std::string& name) const;
  int total_divergences() const;
};

class SamplerError : public std::runtime_error {
 public:
  SamplerError(int chain, const std::string& what)
      : std::runtime_error("chain " + std::to_string(chain) + ": " + what), chain_(chain) {}
  int chain() const { return chain_; }

 private:
  int chain_;
};

/// Runs config.chains independent chains of NUTS on `log_density` over a
/// `dim`-dimensional unconstrained space. Chain c uses a generator seeded with
/// config.seed + c, so results do not depend on the thread count.
/// Throws SamplerError when a chain cannot find a finite starting point in 100
/// attempts.
PosteriorDraws run_nuts(const LogDensityGrad& log_density, std::size_t dim,
                        const SamplerConfig& config, std::vector<std::string> names = {},
                        const OutputTransform& output = {});

}  // namespace modalreg

#endif  // MODALREG_SAMPLER_HPP
