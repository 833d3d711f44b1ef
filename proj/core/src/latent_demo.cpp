#include "modalreg/latent_demo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modalreg {

std::vector<double> simulate_latent_demo_data(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latent demo: n must be >= 1");
  Rng rng(seed);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = sample(kLatentDemoModel, rng);
  return y;
}

namespace {

constexpr double kPriorSd = 100.0;

struct Conditional {
  std::span<const double> y;
  std::vector<char> z;
  TpscKernel<double> kernel;

  // ln p(theta | z, y) up to a constant; -inf where some y_i sits on the
  // wrong side of theta for its assigned component.
  double operator()(double theta) const {
    double lp = -0.5 * (theta / kPriorSd) * (theta / kPriorSd);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool left = y[i] < theta;
      if (left != static_cast<bool>(z[i])) return kNegInf;
      lp += kernel(theta, y[i]);
    }
    return lp;
  }
};

double slice_step(const Conditional& f, double x0, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double width = 1.0;
  constexpr int max_steps = 100;
  const double log_y = f(x0) + std::log(u(rng));
  double lo = x0 - width * u(rng);
  double hi = lo + width;
  for (int k = 0; k < max_steps && f(lo) > log_y; ++k) lo -= width;
  for (int k = 0; k < max_steps && f(hi) > log_y; ++k) hi += width;
  for (;;) {
    const double x1 = lo + (hi - lo) * u(rng);
    if (f(x1) > log_y) return x1;
    if (x1 < x0) {
      lo = x1;
    } else {
      hi = x1;
    }
    if (hi - lo < 1e-300) return x0;
  }
}

}  // namespace

LatentDemoResult run_latent_augmentation_demo(std::span<const double> data, double theta_init,
                                              int iters, std::uint64_t seed,
                                              const TpscParams& model) {
  if (data.empty()) throw std::invalid_argument("latent demo: data must be nonempty");
  if (iters < 1) throw std::invalid_argument("latent demo: iters must be >= 1");
  if (!std::isfinite(theta_init)) throw std::invalid_argument("latent demo: init must be finite");
  validate(model);
  for (double v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument("latent demo: data must be finite");
  }

  Rng rng(seed);
  Conditional cond{data, std::vector<char>(data.size(), 0),
                   TpscKernel<double>(std::log(model.w), std::log1p(-model.w), model.sigma,
                                      model.delta)};
  LatentDemoResult out;
  out.data_min = *std::min_element(data.begin(), data.end());
  out.data_max = *std::max_element(data.begin(), data.end());
  out.trajectory.reserve(static_cast<std::size_t>(iters));

  double theta = theta_init;
  std::vector<char> previous;
  for (int it = 0; it < iters; ++it) {
    // z | theta: P(z_i = 1) is 1 when y_i < theta and 0 otherwise
    int n_left = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      cond.z[i] = data[i] < theta ? 1 : 0;
      n_left += cond.z[i];
    }
    const bool changed = !previous.empty() && previous != cond.z;
    previous = cond.z;
    theta = slice_step(cond, theta, rng);
    out.trajectory.push_back({theta, n_left, changed});
  }
  return out;
}

std::string to_string(DemoVerdict verdict) {
  switch (verdict) {
    case DemoVerdict::stuck_above: return "stuck-above";
    case DemoVerdict::stuck_below: return "stuck-below";
    case DemoVerdict::within_range: return "within-range";
  }
  return "unknown";
}

DemoVerdict classify(const LatentDemoResult& result, int burn) {
  const auto begin = result.trajectory.begin() +
                     std::min<std::ptrdiff_t>(std::max(burn, 0),
                                              static_cast<std::ptrdiff_t>(result.trajectory.size()));
  if (begin == result.trajectory.end()) throw std::invalid_argument("classify: nothing after burn-in");
  const bool above = std::all_of(begin, result.trajectory.end(),
                                 [&](const LatentDemoStep& s) { return s.theta > result.data_max; });
  if (above) return DemoVerdict::stuck_above;
  const bool below = std::all_of(begin, result.trajectory.end(),
                                 [&](const LatentDemoStep& s) { return s.theta < result.data_min; });
  if (below) return DemoVerdict::stuck_below;
  return DemoVerdict::within_range;
}

}  // namespace modalreg
