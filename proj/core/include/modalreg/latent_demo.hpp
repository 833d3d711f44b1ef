#ifndef MODALREG_LATENT_DEMO_HPP
#define MODALREG_LATENT_DEMO_HPP

// Data-augmentation Gibbs sampler for a TPSC-t location model, kept to show
// why the latent branch indicator makes the chain reducible: z_i = I(y_i < theta)
// is degenerate given theta, so theta can never cross an observation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modalreg/distributions.hpp"

namespace modalreg {

struct LatentDemoStep {
  double theta;
  int n_left;      // observations assigned to the left component (z_i = 1)
  bool z_changed;  // some z_i differs from the previous iteration
};

struct LatentDemoResult {
  std::vector<LatentDemoStep> trajectory;  // one entry per iteration
  double data_min = 0.0;
  double data_max = 0.0;
};

/// Shape of the model used for theta | z. The mode field is ignored.
inline constexpr TpscParams kLatentDemoModel{0.4, 0.0, 1.0, 5.0};

/// n draws from TPSC-t(theta = 0, w = 0.4, sigma = 1, delta = 5).
std::vector<double> simulate_latent_demo_data(int n, std::uint64_t seed);

/// Alternates z | theta (degenerate) and theta | z (stepping-out slice
/// sampling under a Normal(0, 100^2) prior with the branch constraints).
LatentDemoResult run_latent_augmentation_demo(std::span<const double> data, double theta_init,
                                              int iters, std::uint64_t seed,
                                              const TpscParams& model = kLatentDemoModel);

enum class DemoVerdict { stuck_above, stuck_below, within_range };
std::string to_string(DemoVerdict verdict);

/// Classifies the draws after the first `burn` iterations against the data range.
DemoVerdict classify(const LatentDemoResult& result, int burn);

}  // namespace modalreg

#endif  // MODALREG_LATENT_DEMO_HPP
