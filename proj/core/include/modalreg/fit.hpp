#ifndef MODALREG_FIT_HPP
#define MODALREG_FIT_HPP

#include "modalreg/model.hpp"
#include "modalreg/sampler.hpp"

namespace modalreg {

/// Checks the design has full column rank, then runs NUTS on the model's
/// unconstrained posterior and reports constrained draws named by the layout.
PosteriorDraws sample_posterior(const RegressionModel& model, const SamplerConfig& config);

}  // namespace modalreg

#endif  // MODALREG_FIT_HPP
