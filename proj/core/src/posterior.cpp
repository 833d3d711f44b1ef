#include "modalreg/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "modalreg/stats.hpp"

namespace modalreg {

namespace {

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const SummaryRow& SummaryTable::row(const std::string& variable) const {
  for (const auto& r : rows) {
    if (r.variable == variable) return r;
  }
  throw std::out_of_range("summary has no row '" + variable + "'");
}

void SummaryTable::write_csv(std::ostream& os) const {
  os << "variable,mean,median,sd,mad,q5,q95,rhat,ess_bulk,ess_tail\n";
  for (const auto& r : rows) {
    os << r.variable;
    for (double v : {r.mean, r.median, r.sd, r.mad, r.q5, r.q95, r.rhat, r.ess_bulk, r.ess_tail}) {
      os << ',' << format_number(v);
    }
    os << '\n';
  }
}

SummaryRow summarize_values(const std::string& variable, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no draws for '" + variable + "'");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double nan = std::nan("");
  return {variable,
          mean(values),
          quantile_sorted(sorted, 0.5),
          std::sqrt(variance(values)),
          mad(values),
          quantile_sorted(sorted, 0.05),
          quantile_sorted(sorted, 0.95),
          nan,
          nan,
          nan};
}

SummaryTable summarize(const PosteriorDraws& draws, const Diagnostics& diagnostics) {
  if (draws.chains == 0 || draws.samples == 0) throw std::invalid_argument("summarize: empty draws");
  if (diagnostics.params.size() != draws.dim) {
    throw std::invalid_argument("summarize: diagnostics do not match the draws");
  }
  SummaryTable table;
  for (std::size_t j = 0; j < draws.dim; ++j) {
    const auto values = draws.pooled(j);
    SummaryRow row = summarize_values(draws.names[j], values);
    row.rhat = diagnostics.params[j].rhat;
    row.ess_bulk = diagnostics.params[j].ess_bulk;
    row.ess_tail = diagnostics.params[j].ess_tail;
    table.rows.push_back(row);
  }
  return table;
}

Eigen::MatrixXd posterior_predictive(const PosteriorDraws& draws, const ModelSpec& spec,
                                     const RowMatrix& X_new, Rng& rng) {
  const std::size_t k = shape_parameter_names(spec.family).size();
  if (draws.dim <= k) throw std::invalid_argument("posterior_predictive: draws lack coefficients");
  const std::size_t p = draws.dim - k;
  if (static_cast<std::size_t>(X_new.cols()) != p) {
    throw std::invalid_argument("posterior_predictive: X_new has " + std::to_string(X_new.cols()) +
                                " columns but the model has " + std::to_string(p) +
                                " coefficients");
  }
  const std::size_t total = draws.chains * draws.samples;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(total), X_new.rows());
  for (std::size_t s = 0; s < total; ++s) {
    const double* row = draws.values.data() + s * draws.dim;
    const Eigen::Map<const Eigen::VectorXd> beta(row, static_cast<Eigen::Index>(p));
    const std::span<const double> shape(row + p, k);
    LikelihoodParams params = make_likelihood_params(spec.family, shape, 0.0);
    validate(params);
    for (Eigen::Index i = 0; i < X_new.rows(); ++i) {
      params = with_theta(params, X_new.row(i).dot(beta));
      out(static_cast<Eigen::Index>(s), i) = sample(params, rng);
    }
  }
  return out;
}

std::size_t hdi_count(std::size_t n, double mass) {
  const double target = mass * static_cast<double>(n);
  auto m = static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
  return std::clamp<std::size_t>(m, 1, n);
}

HdiInterval hdi(std::span<const double> samples, double mass) {
  if (samples.size() < 2) throw std::invalid_argument("hdi: need at least 2 samples");
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("hdi: mass must lie in (0, 1)");
  std::vector<double> s(samples.begin(), samples.end());
  for (double v : s) {
    if (!std::isfinite(v)) throw std::invalid_argument("hdi: non-finite sample");
  }
  std::sort(s.begin(), s.end());
  const std::size_t m = hdi_count(s.size(), mass);
  const double tol = 1e-12 * (s.back() - s.front());
  std::size_t best = 0;
  double best_width = s[m - 1] - s[0];
  for (std::size_t i = 1; i + m <= s.size(); ++i) {
    const double width = s[i + m - 1] - s[i];
    if (width < best_width - tol) {
      best = i;
      best_width = width;
    }
  }
  return {s[best], s[best + m - 1], mass};
}

CoverageWidth coverage_and_width(const Eigen::MatrixXd& predictive, std::span<const double> y,
                                 double mass) {
  if (static_cast<std::size_t>(predictive.cols()) != y.size()) {
    throw std::invalid_argument("coverage_and_width: predictive has " +
                                std::to_string(predictive.cols()) + " columns but y has " +
                                std::to_string(y.size()) + " values");
  }
  if (y.empty()) throw std::invalid_argument("coverage_and_width: no observations");
  double covered = 0.0;
  double width = 0.0;
  std::vector<double> column(static_cast<std::size_t>(predictive.rows()));
  for (Eigen::Index i = 0; i < predictive.cols(); ++i) {
    Eigen::Map<Eigen::VectorXd>(column.data(), predictive.rows()) = predictive.col(i);
    const auto h = hdi(column, mass);
    const double yi = y[static_cast<std::size_t>(i)];
    if (h.lower <= yi && yi <= h.upper) covered += 1.0;
    width += h.upper - h.lower;
  }
  const auto n = static_cast<double>(y.size());
  return {covered / n, width / n};
}

}  // namespace modalreg
