#ifndef MODALREG_DIAGNOSTICS_HPP
#define MODALREG_DIAGNOSTICS_HPP

// Rank-normalized split R-hat and bulk/tail effective sample sizes.
// Undefined results (constant or non-finite draws) are reported as NaN.

#include <vector>

#include "modalreg/sampler.hpp"

namespace modalreg {

/// chains[c][i]: draw i of chain c. All chains must have the same length.
using ChainMatrix = std::vector<std::vector<double>>;

struct ParameterDiagnostics {
  double rhat;
  double ess_bulk;
  double ess_tail;
};

struct Diagnostics {
  std::vector<std::string> names;
  std::vector<ParameterDiagnostics> params;
};

/// Classic split-free R-hat sqrt(((n-1)/n W + B/n) / W) on the given chains.
double rhat_basic(const ChainMatrix& chains);
/// ESS via the Geyer initial monotone sequence on the given chains.
double ess_basic(const ChainMatrix& chains);

/// Each chain split into halves (odd lengths drop the middle draw).
ChainMatrix split_chains(const ChainMatrix& chains);
/// Average ranks over all draws mapped through the normal quantile of
/// (r - 3/8) / (S + 1/4).
ChainMatrix z_scale(const ChainMatrix& chains);

/// max(bulk R-hat, R-hat of the folded draws |x - median|).
double rhat(const ChainMatrix& chains);
double ess_bulk(const ChainMatrix& chains);
/// min of the ESS of the indicators x <= q05 and x <= q95.
double ess_tail(const ChainMatrix& chains);

/// Requires >= 2 chains of >= 4 draws.
Diagnostics compute_diagnostics(const PosteriorDraws& draws);

}  // namespace modalreg

#endif  // MODALREG_DIAGNOSTICS_HPP
