#include "modalreg/fit.hpp"

namespace modalreg {

PosteriorDraws sample_posterior(const RegressionModel& model, const SamplerConfig& config) {
  require_full_rank(model.data());
  const LogDensityGrad f = [&model](std::span<const double> u, std::span<double> g) {
    return model.log_posterior_gradient(u, g);
  };
  const OutputTransform out = [&model](std::span<const double> u) {
    return model.layout().constrain(u);
  };
  return run_nuts(f, model.dim(), config, model.layout().names(), out);
}

}  // namespace modalreg
