#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "modalreg/sim.hpp"

using namespace modalreg;

namespace {

double mixture_cdf(double e) {
  boost::math::normal_distribution<double> far(-50.0, 1.0), near(0.0, 1.0);
  return 0.05 * boost::math::cdf(far, e) + 0.95 * boost::math::cdf(near, e);
}

StudyConfig small_study(Study study) {
  StudyConfig cfg;
  cfg.study = study;
  cfg.n = 20;
  cfg.reps = 2;
  cfg.seed = 5;
  cfg.models = {Family::normal, Family::tpsc_t};
  cfg.sampler.chains = 2;
  cfg.sampler.warmup = 200;
  cfg.sampler.samples = 200;
  cfg.sampler.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("left-skewed error distribution") {
  Rng rng(1);
  const int n = 1000000;
  std::vector<double> e(n);
  for (auto& v : e) v = left_skewed_error(rng);
  double sum = 0.0;
  int below = 0;
  for (double v : e) {
    sum += v;
    below += v < -25.0;
  }
  // sd of the mixture is about sqrt(0.05 * 0.95 * 2500 + 1) ~ 10.9
  CHECK(std::abs(sum / n + 2.5) < 4.0 * 10.9 / std::sqrt(double(n)));
  CHECK(std::abs(double(below) / n - 0.05) < 0.001);

  std::sort(e.begin(), e.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = mixture_cdf(e[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  CHECK(d < 0.005);

  // the density of the mixture peaks at zero
  double best = -1.0, best_density = -1.0;
  for (int k = -200; k <= 200; ++k) {
    const double x = k / 100.0;
    const double dens = 0.95 * std::exp(-0.5 * x * x) + 0.05 * std::exp(-0.5 * (x + 50) * (x + 50));
    if (dens > best_density) {
      best_density = dens;
      best = x;
    }
  }
  CHECK(best == 0.0);
}

TEST_CASE("left-skewed design") {
  Rng rng(2);
  const Dataset d = gen_left_skewed(500, rng);
  REQUIRE(d.n() == 500);
  REQUIRE(d.p() == 2);
  CHECK(d.column_names == std::vector<std::string>{kInterceptName, "x"});
  for (std::size_t i = 0; i < d.n(); ++i) {
    CHECK(d.X(i, 0) == 1.0);
    CHECK(d.X(i, 1) >= 0.0);
    CHECK(d.X(i, 1) < 1.0);
  }
}

TEST_CASE("skew-normal error") {
  const SkewNormal sn;
  const double delta = 5.0 / std::sqrt(26.0);
  CHECK(sn.delta() == doctest::Approx(delta).epsilon(1e-15));
  CHECK(sn.mean() == doctest::Approx(-0.3754 + delta * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(sn.mean() == doctest::Approx(0.4069).epsilon(1e-3));

  // density 2 phi(z) Phi(alpha z) / omega
  boost::math::normal_distribution<double> std_normal;
  for (double x : {-1.0, -0.3, 0.0, 0.5, 2.0}) {
    const double z = x + 0.3754;
    const double expected = std::log(2.0 * boost::math::pdf(std_normal, z) * boost::math::cdf(std_normal, 5.0 * z));
    CHECK(sn.log_pdf(x) == doctest::Approx(expected).epsilon(1e-12));
  }

  double mode = 0.0, best = -1e300;
  for (int k = -1000; k <= 1000; ++k) {
    const double x = k / 1000.0;
    if (sn.log_pdf(x) > best) {
      best = sn.log_pdf(x);
      mode = x;
    }
  }
  CHECK(std::abs(mode) <= 0.01);

  Rng rng(3);
  const int n = 1000000;
  double s1 = 0.0;
  std::vector<double> e(n);
  for (auto& v : e) {
    v = sn.draw(rng);
    s1 += v;
  }
  const double m = s1 / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : e) {
    m2 += (v - m) * (v - m);
    m3 += (v - m) * (v - m) * (v - m);
  }
  m2 /= n;
  m3 /= n;
  CHECK(m3 / std::pow(m2, 1.5) > 0.0);
  const double sd = std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
  CHECK(std::abs(m - sn.mean()) < 4.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("right-skewed design") {
  Rng rng(4);
  const Dataset d = gen_right_skewed(400, rng);
  REQUIRE(d.p() == 3);
  CHECK(d.column_names == std::vector<std::string>{kInterceptName, "x1", "x2"});
  double resid = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) resid += d.y(i) - 1.0 - d.X(i, 1) - d.X(i, 2);
  CHECK(std::abs(resid / 400 - SkewNormal{}.mean()) < 0.2);
}

TEST_CASE("study configuration") {
  StudyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n = 30;
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.reps = 1;
  cfg.models.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_study("left-skewed") == Study::left_skewed);
  CHECK(to_string(Study::right_skewed) == "right-skewed");
  CHECK_THROWS_AS(parse_study("skewed"), std::invalid_argument);
  CHECK(replicate_seed(12, 5) == (12u ^ 5u));
}

TEST_CASE("left-skewed study is deterministic") {
  const auto cfg = small_study(Study::left_skewed);
  const auto a = run_study(cfg);
  const auto b = run_study(cfg);
  CHECK(a.failures.empty());
  std::ostringstream sa, sb, ra, rb;
  a.write_aggregate_csv(sa);
  b.write_aggregate_csv(sb);
  a.write_replicates_csv(ra);
  b.write_replicates_csv(rb);
  CHECK(sa.str() == sb.str());
  CHECK(ra.str() == rb.str());
  for (const char* model : {"normal", "tpsc-t"}) {
    for (const char* metric : {"coverage", "width", "elpd"}) {
      const auto& agg = a.aggregate(model, metric);
      CHECK(agg.count == 2);
      CHECK(std::isfinite(agg.mean));
    }
    CHECK(a.aggregate(model, "coverage").mean >= 0.0);
    CHECK(a.aggregate(model, "coverage").mean <= 1.0);
  }
  CHECK(sa.str().rfind("study,n,model,metric,mean,se,reps_used,reps_failed\n", 0) == 0);
}

TEST_CASE("right-skewed study reports coefficient metrics") {
  auto cfg = small_study(Study::right_skewed);
  cfg.models = {Family::tpsc_t};
  const auto r = run_study(cfg);
  for (const char* metric : {"beta0_mean", "beta1_mean", "beta2_mean", "beta1_covered", "beta2_width"}) {
    CHECK(r.aggregate("tpsc-t", metric).count == 2);
  }
  CHECK(std::abs(r.aggregate("tpsc-t", "beta1_mean").mean - 1.0) < 0.5);
  CHECK(r.aggregate("tpsc-t", "beta2_width").mean > 0.0);
  CHECK_THROWS(r.aggregate("tpsc-t", "coverage"));
}
