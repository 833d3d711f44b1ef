#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "modalreg/fit.hpp"
#include "modalreg/loo.hpp"
#include "modalreg/math.hpp"

using namespace modalreg;

namespace {

double normal_log_pdf(double y, double mu, double var) {
  return -0.5 * std::log(2 * std::numbers::pi * var) - 0.5 * (y - mu) * (y - mu) / var;
}

double log_mean_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().mean());
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

PosteriorDraws as_draws(std::vector<std::string> names, const Eigen::MatrixXd& rows) {
  PosteriorDraws d;
  d.names = std::move(names);
  d.chains = 1;
  d.samples = static_cast<std::size_t>(rows.rows());
  d.dim = static_cast<std::size_t>(rows.cols());
  for (Eigen::Index s = 0; s < rows.rows(); ++s) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) d.values.push_back(rows(s, j));
  }
  return d;
}

Eigen::MatrixXd heavy_tailed_ll(int s, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::student_t_distribution<double> t(3.0);
  std::normal_distribution<double> z;
  Eigen::MatrixXd ll(s, n);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < s; ++r) ll(r, i) = -1.0 - 0.8 * std::abs(t(rng)) + 0.1 * z(rng);
  }
  return ll;
}

}  // namespace

TEST_CASE("pointwise log-likelihood") {
  Dataset data{RowMatrix{{1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}, vec({0.5, 1.5, 2.5}), {"c", "x"}};
  const ModelSpec normal = ModelSpec::with_defaults(Family::normal);
  Eigen::MatrixXd rows(2, 3);
  rows << 0.5, 1.0, 1.0,
          0.0, 0.8, 2.0;
  const auto draws = as_draws({"beta0", "beta1", "sigma"}, rows);
  const auto ll = pointwise_loglik(draws, normal, data);
  REQUIRE(ll.values.rows() == 2);
  REQUIRE(ll.values.cols() == 3);
  for (int i = 0; i < 3; ++i) CHECK(ll.values(0, i) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  RegressionModel model(normal, data);
  for (int s = 0; s < 2; ++s) {
    const std::vector<double> c{rows(s, 0), rows(s, 1), rows(s, 2)};
    CHECK(ll.values.row(s).sum() == doctest::Approx(model.log_likelihood(c)).epsilon(1e-13));
  }

  const ModelSpec tpsc = ModelSpec::with_defaults(Family::tpsc_t);
  Eigen::MatrixXd cauchy(1, 5);
  cauchy << 0.5, 1.0, 0.5, 1.0, 1.0;
  const auto cd = as_draws({"beta0", "beta1", "w", "sigma", "delta"}, cauchy);
  const auto lc = pointwise_loglik(cd, tpsc, data);
  for (int i = 0; i < 3; ++i) CHECK(lc.values(0, i) == doctest::Approx(-std::log(std::numbers::pi)).epsilon(1e-13));

  const auto wrong = as_draws({"beta0", "sigma"}, Eigen::MatrixXd::Ones(1, 2));
  CHECK_THROWS_AS(pointwise_loglik(wrong, normal, data), std::invalid_argument);
  const auto renamed = as_draws({"a", "b", "c"}, rows);
  CHECK_THROWS_AS(pointwise_loglik(renamed, normal, data), std::invalid_argument);
}

TEST_CASE("psis-loo on small examples") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(200, 2, -1.25);
  auto r = psis_loo({constant, "c"});
  CHECK(r.pointwise[0] == doctest::Approx(-1.25).epsilon(1e-14));
  CHECK(std::isnan(r.pareto_k[0]));
  CHECK(r.elpd == doctest::Approx(-2.5));
  CHECK(r.se == 0.0);

  Eigen::MatrixXd two(2, 1);
  two << 0.0, 1.0;
  r = psis_loo({two, "two"});
  CHECK(r.pointwise[0] == doctest::Approx(std::log(2.0 * std::numbers::e / (std::numbers::e + 1.0))).epsilon(1e-14));
  CHECK(std::isnan(r.pareto_k[0]));

  CHECK_THROWS_AS(psis_loo({Eigen::MatrixXd::Zero(1, 3), "one"}), std::invalid_argument);
  Eigen::MatrixXd dead = Eigen::MatrixXd::Zero(10, 2);
  dead.col(1).setConstant(kNegInf);
  CHECK_THROWS_AS(psis_loo({dead, "dead"}), std::invalid_argument);
  dead(0, 1) = -3.0;
  r = psis_loo({dead, "partial"});
  CHECK(r.pointwise[1] == kNegInf);
}

TEST_CASE("psis-loo invariances") {
  const Eigen::MatrixXd ll = heavy_tailed_ll(1000, 6, 7);
  const auto base = psis_loo({ll, "base"});
  double sum = 0.0;
  for (double v : base.pointwise) sum += v;
  CHECK(base.elpd == doctest::Approx(sum).epsilon(1e-14));
  for (double k : base.pareto_k) CHECK(std::isfinite(k));

  std::vector<int> perm(1000);
  for (int i = 0; i < 1000; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  Eigen::MatrixXd shuffled(1000, 6);
  for (int r = 0; r < 1000; ++r) shuffled.row(r) = ll.row(perm[r]);
  const auto p = psis_loo({shuffled, "perm"});
  for (int i = 0; i < 6; ++i) {
    CHECK(p.pointwise[i] == doctest::Approx(base.pointwise[i]).epsilon(1e-13));
    CHECK(p.pareto_k[i] == doctest::Approx(base.pareto_k[i]).epsilon(1e-12));
  }

  Eigen::MatrixXd shifted = ll;
  shifted.col(2).array() += 3.5;
  const auto sh = psis_loo({shifted, "shift"});
  CHECK(sh.pointwise[2] - base.pointwise[2] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(sh.pointwise[0] == base.pointwise[0]);
}

TEST_CASE("generalized Pareto fit recovers the shape") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double k : {0.0, 0.3, 0.7}) {
    std::vector<double> x(2000);
    for (auto& v : x) {
      const double p = u(rng);
      v = k == 0.0 ? -std::log1p(-p) : 2.0 * std::expm1(-k * std::log1p(-p)) / k;
    }
    std::sort(x.begin(), x.end());
    const auto fit = fit_gpd(x);
    CHECK(std::abs(fit.k - k) < 0.1);
    CHECK(std::abs(fit.sigma - (k == 0.0 ? 1.0 : 2.0)) < 0.2 * (k == 0.0 ? 1.0 : 2.0));
  }
  CHECK_THROWS_AS(fit_gpd(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("conjugate normal model matches the closed-form leave-one-out density") {
  // y_i ~ N(mu, 1) with a flat prior: mu | y ~ N(ybar, 1/n), and
  // y_i | y_-i ~ N(mean of the others, 1 + 1/(n-1)).
  const int n = 20;
  const int s = 4000;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z;
  std::vector<double> y(n);
  for (auto& v : y) v = 0.7 + z(rng);
  double total = 0.0;
  for (double v : y) total += v;
  Eigen::MatrixXd ll(s, n);
  for (int r = 0; r < s; ++r) {
    const double mu = total / n + z(rng) / std::sqrt(double(n));
    for (int i = 0; i < n; ++i) ll(r, i) = normal_log_pdf(y[i], mu, 1.0);
  }
  double exact = 0.0;
  for (int i = 0; i < n; ++i) {
    exact += normal_log_pdf(y[i], (total - y[i]) / (n - 1), 1.0 + 1.0 / (n - 1));
  }
  const auto r = psis_loo({ll, "conjugate"});
  CHECK(std::abs(r.elpd - exact) < 2.0 * r.se);
  CHECK(std::abs(r.elpd - exact) < 0.05);
  for (double k : r.pareto_k) CHECK(k < 0.7);
}

TEST_CASE("normal regression matches brute-force leave-one-out refits") {
  const int n = 15;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RowMatrix X(n, 2);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = u(rng);
    y[i] = 1.0 + 2.0 * X(i, 1) + 0.5 * z(rng);
  }
  const Dataset data{X, vec(y), {"c", "x"}};
  const ModelSpec spec = ModelSpec::with_defaults(Family::normal);
  SamplerConfig cfg;
  cfg.chains = 2;
  cfg.warmup = 1000;
  cfg.samples = 2000;
  cfg.seed = 12;
  cfg.threads = 1;
  const auto full = sample_posterior(RegressionModel(spec, data), cfg);
  const auto psis = psis_loo(pointwise_loglik(full, spec, data));

  double exact = 0.0;
  for (int i = 0; i < n; ++i) {
    RowMatrix Xi(n - 1, 2);
    std::vector<double> yi;
    for (int r = 0, k = 0; r < n; ++r) {
      if (r == i) continue;
      Xi.row(k++) = X.row(r);
      yi.push_back(y[r]);
    }
    cfg.seed = 100 + static_cast<std::uint64_t>(i);
    const auto d = sample_posterior(RegressionModel(spec, Dataset{Xi, vec(yi), {"c", "x"}}), cfg);
    const Dataset held{X.row(i), vec({y[i]}), {"c", "x"}};
    const auto ll = pointwise_loglik(d, spec, held);
    exact += log_mean_exp(ll.values.col(0));
  }
  CHECK(std::abs(psis.elpd - exact) < 0.3);
}
