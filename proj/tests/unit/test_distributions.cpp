#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "modalreg/distributions.hpp"
#include "support/oracles.hpp"

using namespace modalreg;

namespace {

double cauchy_log_pdf(double y, double theta, double sigma) {
  const double z = (y - theta) / sigma;
  return -std::log(std::numbers::pi * sigma * (1.0 + z * z));
}

double normal_log_pdf(double y, double theta, double sigma) {
  const double z = (y - theta) / sigma;
  return -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

}  // namespace

TEST_CASE("log_pdf reference points") {
  CHECK(log_pdf(FgParams{0.5, 0.0, 1.0, 2.0}, 0.0) ==
        doctest::Approx(std::log(0.275909580878581741)).epsilon(1e-14));
  CHECK(log_pdf(TpscParams{0.5, 0.0, 1.0, 1.0}, 0.0) == doctest::Approx(-kLogPi).epsilon(1e-14));
  CHECK(log_pdf(LogNmParams{0.5, 0.0, 0.0, 1.0, 0.0, 1.0}, 0.0) ==
        doctest::Approx(-0.41893853320467274178).epsilon(1e-14));
  CHECK(log_pdf(DtpParams{0.0, 1.0, 1.0, 5.0, 5.0}, 0.0) ==
        doctest::Approx(log_t_kernel({0.0, 5.0})).epsilon(1e-14));
  CHECK(log_pdf(NormalParams{1.0, 1.0}, 1.0) == doctest::Approx(-kHalfLogTwoPi).epsilon(1e-15));
  // ALD at its mode: p (1 - p) / sigma
  CHECK(log_pdf(AldParams{0.0, 2.0, 0.5}, 0.0) == doctest::Approx(std::log(0.125)).epsilon(1e-15));
}

TEST_CASE("log_pdf rejects invalid parameters") {
  CHECK_THROWS_AS(log_pdf(FgParams{1.2, 0.0, 1.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(FgParams{0.5, 0.0, -1.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(TpscParams{0.0, 0.0, 1.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(TpscParams{1.0, 0.0, 1.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(DtpParams{0.0, 1.0, 1.0, 0.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(LogNmParams{0.5, 0.0, 0.0, 0.0, 0.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(AldParams{0.0, 1.0, 1.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf(NormalParams{0.0, 1.0}, std::nan("")), std::domain_error);
}

TEST_CASE("FG degenerate weights keep one branch") {
  const double y = 0.7;
  CHECK(log_pdf(FgParams{1.0, 0.0, 1.3, 2.0}, y) ==
        doctest::Approx(log_gumbel_pdf(-y, 0.0, 1.3)).epsilon(1e-14));
  CHECK(log_pdf(FgParams{0.0, 0.0, 1.3, 2.0}, y) ==
        doctest::Approx(log_gumbel_pdf(y, 0.0, 2.0)).epsilon(1e-14));
}

TEST_CASE("dtp_weight") {
  CHECK(dtp_weight(1, 1, 5, 5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dtp_weight(2, 1, 3, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(dtp_weight(1, 1, 1, 30) == doctest::Approx(0.554151661488143000).epsilon(1e-13));
  CHECK_THROWS_AS(dtp_weight(0, 1, 1, 1), std::domain_error);
  const double w = dtp_weight(0.3, 4.0, 0.9, 25.0);
  CHECK(w > 0.0);
  CHECK(w < 1.0);
}

TEST_CASE("mode_of returns theta") {
  CHECK(mode_of(FgParams{0.3, 2.5, 1, 1}) == 2.5);
  CHECK(mode_of(TpscParams{0.7, -4, 2, 3}) == -4);
  CHECK(mode_of(LogNmParams{0.5, 1.5, 0, 1, 1, 0.5}) == 1.5);
}

TEST_CASE("fz_at_zero") {
  CHECK(fz_at_zero(FgParams{0.5, 9.0, 1.0, 2.0}) == doctest::Approx(0.275909580878581741).epsilon(1e-14));
  CHECK(fz_at_zero(TpscParams{0.5, -3.0, 1.0, 1.0}) ==
        doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(fz_at_zero(DtpParams{2.0, 1.0, 1.0, 5.0, 5.0}) ==
        doctest::Approx(std::exp(log_t_kernel({0.0, 5.0}))).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double w = u(rng);
    const double s1 = 0.1 + 5.0 * u(rng);
    const double s2 = 0.1 + 5.0 * u(rng);
    const double fz = fz_at_zero(FgParams{w, 0.0, s1, s2});
    CHECK(fz == doctest::Approx(std::exp(-1.0) * (w / s1 + (1.0 - w) / s2)).epsilon(1e-13));
    CHECK(fz <= std::exp(-1.0) * (1.0 / s1 + 1.0 / s2) * (1.0 + 1e-15));
  }
}

TEST_CASE("TPSC reductions") {
  for (double sigma : {0.5, 1.0, 3.0}) {
    for (int i = -50; i <= 50; ++i) {
      const double y = 0.3 + sigma * i / 5.0;
      CHECK(std::abs(log_pdf(TpscParams{0.5, 0.3, sigma, 1.0}, y) - cauchy_log_pdf(y, 0.3, sigma)) <
            1e-12);
    }
  }
  // delta = 1e6: the t shape differs from the normal by about
  // z^4/(4 delta) - z^2/(2 delta) in log space, so compare densities
  for (int i = -500; i <= 500; ++i) {
    const double z = 5.0 * i / 500.0;
    const double y = -1.0 + 2.0 * z;
    const double lp = log_pdf(TpscParams{0.5, -1.0, 2.0, 1e6}, y);
    const double ln = normal_log_pdf(y, -1.0, 2.0);
    CHECK(std::abs(std::exp(lp) - std::exp(ln)) < 1e-4);
    const double bound = (z * z * z * z / 4.0 + z * z / 2.0 + 1.0) / 1e6;
    CHECK(std::abs(lp - ln) < bound);
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double w = 0.02 + 0.96 * u(rng);
    const double sigma = 0.1 + 4.0 * u(rng);
    const double delta = 0.5 + 30.0 * u(rng);
    const double theta = -3.0 + 6.0 * u(rng);
    const double y = theta - 10.0 + 20.0 * u(rng);
    const double s1 = sigma * std::sqrt(w / (1.0 - w));
    const double s2 = sigma * std::sqrt((1.0 - w) / w);
    CHECK(std::abs(log_pdf(TpscParams{w, theta, sigma, delta}, y) -
                   log_pdf(DtpParams{theta, s1, s2, delta, delta}, y)) < 1e-12);
  }
}

TEST_CASE("type II branches split at the mode") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double y = u(rng);
    for (const LikelihoodParams& p :
         {LikelihoodParams(DtpParams{0.5, 1.0, 2.0, 3.0, 7.0}),
          LikelihoodParams(TpscParams{0.3, 0.5, 1.5, 4.0})}) {
      const auto [a, b] = component_log_pdfs(p, y);
      if (y < 0.5) {
        CHECK(std::isfinite(a));
        CHECK(b == kNegInf);
      } else {
        CHECK(a == kNegInf);
        CHECK(std::isfinite(b));
      }
    }
  }
}

TEST_CASE("tpsc gamma helpers round trip") {
  CHECK(tpsc_gamma_from_w(0.5) == doctest::Approx(1.0));
  CHECK(tpsc_w_from_gamma(tpsc_gamma_from_w(0.37)) == doctest::Approx(0.37).epsilon(1e-14));
  CHECK_THROWS_AS(tpsc_gamma_from_w(1.0), std::domain_error);
}

TEST_CASE("sampling respects one-sided limits") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    REQUIRE(sample(TpscParams{1.0 - 1e-12, 0.0, 1.0, 5.0}, rng) < 0.0);
    REQUIRE(sample(TpscParams{1e-12, 0.0, 1.0, 5.0}, rng) >= 0.0);
    REQUIRE(sample(AldParams{2.0, 1.0, 0.5}, rng) != std::numeric_limits<double>::infinity());
  }
  CHECK_THROWS_AS(sample(TpscParams{1.0, 0.0, 1.0, 5.0}, rng), std::domain_error);
}

TEST_CASE("FG sampler matches its density") {
  Rng rng(2024);
  const LikelihoodParams p = FgParams{0.5, 0.0, 1.0, 1.0};
  std::vector<double> draws(100000);
  for (auto& d : draws) d = sample(p, rng);
  CHECK(oracle::ks_statistic(p, draws) < 0.01);
}

TEST_CASE("sampler and density agree, every family") {
  std::mt19937_64 prng(77);
  for (auto f : oracle::all_families()) {
    CAPTURE(oracle::tag_name(f));
    const auto p = oracle::random_params(f, prng);
    Rng rng(99);
    std::vector<double> draws(20000);
    for (auto& d : draws) d = sample(p, rng);
    CHECK(oracle::ks_statistic(p, draws) < 0.02);
    CHECK(std::abs(oracle::total_mass(p) - 1.0) < 1e-6);
  }
}

TEST_CASE("continuity at the mode") {
  std::mt19937_64 prng(4);
  for (auto f : oracle::all_families()) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto p = oracle::random_params(f, prng);
      const double theta = mode_of(p);
      const double s = oracle::max_scale(p);
      double prev = -1.0;
      for (double e : {1e-3, 1e-5, 1e-7}) {
        const double d = std::abs(log_pdf(p, theta - e * s) - log_pdf(p, theta + e * s));
        if (prev >= 0.0) CHECK(d <= 0.02 * prev + 1e-12);
        prev = d;
      }
      CHECK(prev < 1e-6);
    }
  }
}
