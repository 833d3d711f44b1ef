#ifndef MODALREG_LOO_HPP
#define MODALREG_LOO_HPP

// Pointwise log-likelihood extraction and Pareto-smoothed importance
// sampling leave-one-out (PSIS-LOO) estimates of the ELPD.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modalreg/dataset.hpp"
#include "modalreg/model.hpp"
#include "modalreg/sampler.hpp"

namespace modalreg {

/// S x n: entry (s, i) is ln p(y_i | draw s).
struct LogLikMatrix {
  Eigen::MatrixXd values;
  std::string source;
};

struct LooResult {
  double elpd = 0.0;
  double se = 0.0;
  std::vector<double> pointwise;
  std::vector<double> pareto_k;  // NaN where the tail fit is undefined
};

LogLikMatrix pointwise_loglik(const PosteriorDraws& draws, const ModelSpec& spec,
                              const Dataset& data);

struct GpdFit {
  double k;
  double sigma;
};

/// Profile-likelihood (Zhang-Stephens) fit of a generalized Pareto
/// distribution with location 0 to positive exceedances in ascending order,
/// with the weakly informative shrinkage of k toward 0.5.
GpdFit fit_gpd(std::span<const double> sorted_exceedances);

struct PsisWeights {
  std::vector<double> log_weights;  // unnormalized
  double pareto_k;
};

/// Smooths one vector of log importance ratios: the largest
/// ceil(min(0.2 S, 3 sqrt(S))) are replaced by GPD quantiles when that tail
/// holds at least 5 draws, then all weights are truncated at the largest raw
/// ratio.
PsisWeights psis_smooth(std::span<const double> log_ratios);

LooResult psis_loo(const LogLikMatrix& ll);

}  // namespace modalreg

#endif  // MODALREG_LOO_HPP
