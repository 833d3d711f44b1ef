#include "modalreg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "modalreg/diagnostics.hpp"
#include "modalreg/fit.hpp"
#include "modalreg/loo.hpp"
#include "modalreg/posterior.hpp"
#include "modalreg/stats.hpp"

namespace modalreg {

double left_skewed_error(Rng& rng) {
  std::normal_distribution<double> z;
  if (std::bernoulli_distribution(0.05)(rng)) return -50.0 + z(rng);
  return z(rng);
}

Dataset gen_left_skewed(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_left_skewed: n must be >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = unif(rng);
    y[i] = 1.0 + x[i] + left_skewed_error(rng);
  }
  return make_dataset(y, {x}, {"x"}, true);
}

double SkewNormal::delta() const { return alpha / std::sqrt(1.0 + alpha * alpha); }

double SkewNormal::log_pdf(double x) const {
  const double z = (x - xi) / omega;
  const boost::math::normal_distribution<double> normal;
  return std::log(2.0 / omega) - 0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(boost::math::cdf(normal, alpha * z));
}

double SkewNormal::mean() const { return xi + omega * delta() * std::sqrt(2.0 / std::numbers::pi); }

double SkewNormal::draw(Rng& rng) const {
  std::normal_distribution<double> z;
  const double u0 = z(rng);
  const double u1 = z(rng);
  const double d = delta();
  return xi + omega * (d * std::abs(u0) + std::sqrt(1.0 - d * d) * u1);
}

Dataset gen_right_skewed(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_right_skewed: n must be >= 1");
  std::normal_distribution<double> z;
  const SkewNormal err;
  std::vector<double> x1(static_cast<std::size_t>(n)), x2(x1.size()), y(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    x1[i] = z(rng);
    x2[i] = z(rng);
    y[i] = 1.0 + x1[i] + x2[i] + err.draw(rng);
  }
  return make_dataset(y, {x1, x2}, {"x1", "x2"}, true);
}

std::string to_string(Study study) {
  return study == Study::left_skewed ? "left-skewed" : "right-skewed";
}

Study parse_study(const std::string& name) {
  if (name == "left-skewed" || name == "left_skewed") return Study::left_skewed;
  if (name == "right-skewed" || name == "right_skewed") return Study::right_skewed;
  throw std::invalid_argument("unknown study '" + name + "' (expected left-skewed or right-skewed)");
}

void StudyConfig::validate() const {
  if (n < 5) throw std::invalid_argument("study: n must be >= 5");
  if (reps < 1) throw std::invalid_argument("study: reps must be >= 1");
  if (models.empty()) throw std::invalid_argument("study: no models requested");
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("study: mass must lie in (0, 1)");
  sampler.validate();
}

const StudyAggregate& StudyResult::aggregate(const std::string& model,
                                             const std::string& metric) const {
  for (const auto& a : aggregates) {
    if (a.model == model && a.metric == metric) return a;
  }
  throw std::out_of_range("study result has no aggregate " + model + "/" + metric);
}

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void StudyResult::write_aggregate_csv(std::ostream& os) const {
  os << "study,n,model,metric,mean,se,reps_used,reps_failed\n";
  for (const auto& a : aggregates) {
    int failed = 0;
    for (const auto& f : failures) failed += f.model == a.model ? 1 : 0;
    os << to_string(config.study) << ',' << config.n << ',' << a.model << ',' << a.metric << ','
       << num(a.mean) << ',' << num(a.se) << ',' << a.count << ',' << failed << '\n';
  }
}

void StudyResult::write_replicates_csv(std::ostream& os) const {
  os << "rep,model,metric,value\n";
  for (const auto& r : records) {
    os << r.rep << ',' << r.model << ',' << r.metric << ',' << num(r.value) << '\n';
  }
}

std::uint64_t replicate_seed(std::uint64_t seed, int rep) {
  return seed ^ static_cast<std::uint64_t>(rep);
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyResult result;
  result.config = cfg;
  const std::vector<double> truth = cfg.study == Study::left_skewed
                                        ? std::vector<double>{1.0, 1.0}
                                        : std::vector<double>{1.0, 1.0, 1.0};

  for (int rep = 0; rep < cfg.reps; ++rep) {
    const std::uint64_t rseed = replicate_seed(cfg.seed, rep);
    Rng data_rng(rseed);
    const Dataset data = cfg.study == Study::left_skewed ? gen_left_skewed(cfg.n, data_rng)
                                                         : gen_right_skewed(cfg.n, data_rng);
    for (Family family : cfg.models) {
      const std::string name = to_string(family);
      try {
        const ModelSpec spec = ModelSpec::with_defaults(family);
        const RegressionModel model(spec, data);
        SamplerConfig sc = cfg.sampler;
        sc.seed = rseed;
        const PosteriorDraws draws = sample_posterior(model, sc);
        std::vector<ReplicateRecord> rows;
        if (cfg.study == Study::left_skewed) {
          Rng pred_rng(rseed + 0x9E3779B97F4A7C15ULL);
          const auto pred = posterior_predictive(draws, spec, data.X, pred_rng);
          const std::vector<double> y(data.y.data(), data.y.data() + data.y.size());
          const auto cw = coverage_and_width(pred, y, cfg.mass);
          const auto loo = psis_loo(pointwise_loglik(draws, spec, data));
          rows.push_back({rep, name, "coverage", cw.coverage});
          rows.push_back({rep, name, "width", cw.mean_width});
          rows.push_back({rep, name, "elpd", loo.elpd});
        } else {
          for (std::size_t j = 0; j < truth.size(); ++j) {
            const auto values = draws.pooled(j);
            const auto s = summarize_values(draws.names[j], values);
            const std::string b = "beta" + std::to_string(j);
            rows.push_back({rep, name, b + "_mean", s.mean});
            rows.push_back({rep, name, b + "_covered", (s.q5 <= truth[j] && truth[j] <= s.q95) ? 1.0 : 0.0});
            rows.push_back({rep, name, b + "_width", s.q95 - s.q5});
          }
        }
        const Diagnostics diag = compute_diagnostics(draws);
        double max_rhat = 0.0;
        double min_bulk = std::numeric_limits<double>::infinity();
        double min_tail = min_bulk;
        for (const auto& d : diag.params) {
          if (!std::isnan(d.rhat)) max_rhat = std::max(max_rhat, d.rhat);
          if (!std::isnan(d.ess_bulk)) min_bulk = std::min(min_bulk, d.ess_bulk);
          if (!std::isnan(d.ess_tail)) min_tail = std::min(min_tail, d.ess_tail);
        }
        rows.push_back({rep, name, "max_rhat", max_rhat});
        rows.push_back({rep, name, "min_ess_bulk", min_bulk});
        rows.push_back({rep, name, "min_ess_tail", min_tail});
        result.records.insert(result.records.end(), rows.begin(), rows.end());
      } catch (const std::exception& e) {
        result.failures.push_back({rep, name, e.what()});
      }
    }
  }

  // aggregate in first-seen order
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& r : result.records) {
    const auto key = std::make_pair(r.model, r.metric);
    if (!values.contains(key)) keys.push_back(key);
    values[key].push_back(r.value);
  }
  for (const auto& key : keys) {
    const auto& v = values[key];
    const double m = mean(v);
    const double se = v.size() > 1 ? std::sqrt(variance(v) / static_cast<double>(v.size())) : std::nan("");
    result.aggregates.push_back({key.first, key.second, m, se, static_cast<int>(v.size())});
  }
  return result;
}

}  // namespace modalreg
