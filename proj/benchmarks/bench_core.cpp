#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "modalreg/diagnostics.hpp"
#include "modalreg/distributions.hpp"
#include "modalreg/loo.hpp"
#include "modalreg/model.hpp"
#include "modalreg/posterior.hpp"
#include "modalreg/sim.hpp"

using namespace modalreg;

namespace {

std::vector<double> grid(int n) {
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = -8.0 + 16.0 * i / (n - 1);
  return y;
}

template <class P>
void density(benchmark::State& state, P params) {
  const LikelihoodParams p = params;
  const auto y = grid(1024);
  for (auto _ : state) {
    double s = 0.0;
    for (double v : y) s += log_pdf(p, v);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(y.size()));
}

void BM_Gradient(benchmark::State& state) {
  const auto family = static_cast<Family>(state.range(0));
  Rng rng(1);
  const Dataset data = gen_left_skewed(static_cast<int>(state.range(1)), rng);
  const RegressionModel model(ModelSpec::with_defaults(family), data);
  std::vector<double> u(model.dim(), 0.1), g(model.dim());
  for (auto _ : state) benchmark::DoNotOptimize(model.log_posterior_gradient(u, g));
  state.SetLabel(to_string(family));
}

PosteriorDraws ar1_draws(std::size_t chains, std::size_t samples, std::size_t dim) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  PosteriorDraws d;
  d.chains = chains;
  d.samples = samples;
  d.dim = dim;
  for (std::size_t j = 0; j < dim; ++j) d.names.push_back("p" + std::to_string(j));
  d.values.resize(chains * samples * dim);
  for (std::size_t c = 0; c < chains; ++c) {
    std::vector<double> x(dim, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t j = 0; j < dim; ++j) {
        x[j] = 0.6 * x[j] + z(rng);
        d.values[(c * samples + s) * dim + j] = x[j];
      }
    }
  }
  return d;
}

void BM_Diagnostics(benchmark::State& state) {
  const auto d = ar1_draws(4, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(compute_diagnostics(d));
}

void BM_Hdi(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln;
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (auto& v : s) v = ln(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hdi(s, 0.9));
}

void BM_PsisLoo(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  Eigen::MatrixXd ll(state.range(0), state.range(1));
  for (Eigen::Index i = 0; i < ll.size(); ++i) ll.data()[i] = -1.0 - 0.5 * z(rng) * z(rng);
  const LogLikMatrix m{ll, "bench"};
  for (auto _ : state) benchmark::DoNotOptimize(psis_loo(m));
}

}  // namespace

BENCHMARK_CAPTURE(density, fg, FgParams{0.4, 0.0, 1.0, 2.0});
BENCHMARK_CAPTURE(density, dtp_t, DtpParams{0.0, 1.0, 2.0, 3.0, 8.0});
BENCHMARK_CAPTURE(density, tpsc_t, TpscParams{0.4, 0.0, 1.0, 5.0});
BENCHMARK_CAPTURE(density, lognm, LogNmParams{0.5, 0.0, 0.0, 0.5, 0.2, 0.7});
BENCHMARK_CAPTURE(density, normal, NormalParams{0.0, 1.0});
BENCHMARK_CAPTURE(density, ald, AldParams{0.0, 1.0, 0.5});
BENCHMARK(BM_Gradient)
    ->Args({static_cast<int>(Family::tpsc_t), 30})
    ->Args({static_cast<int>(Family::tpsc_t), 300})
    ->Args({static_cast<int>(Family::fg), 300})
    ->Args({static_cast<int>(Family::lognm), 300})
    ->Args({static_cast<int>(Family::normal), 300});
BENCHMARK(BM_Diagnostics)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Hdi)->Arg(4000)->Arg(40000);
BENCHMARK(BM_PsisLoo)->Args({4000, 30})->Args({4000, 300});

BENCHMARK_MAIN();
