#ifndef MODALREG_POSTERIOR_HPP
#define MODALREG_POSTERIOR_HPP

// Posterior summaries, posterior predictive draws and highest-density
// intervals.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modalreg/dataset.hpp"
#include "modalreg/diagnostics.hpp"
#include "modalreg/distributions.hpp"
#include "modalreg/model.hpp"
#include "modalreg/sampler.hpp"

namespace modalreg {

struct SummaryRow {
  std::string variable;
  double mean, median, sd, mad, q5, q95, rhat, ess_bulk, ess_tail;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  const SummaryRow& row(const std::string& variable) const;
  /// Header variable,mean,median,sd,mad,q5,q95,rhat,ess_bulk,ess_tail; numbers
  /// with 17 significant digits, NaN written as NA.
  void write_csv(std::ostream& os) const;
};

/// Summary of one pooled sample; diagnostics left as NaN.
SummaryRow summarize_values(const std::string& variable, std::span<const double> values);

/// One row per parameter, pooled over chains, with diagnostics copied in.
SummaryTable summarize(const PosteriorDraws& draws, const Diagnostics& diagnostics);

/// For every retained draw and every row x of X_new, one draw from the
/// family with mode x'beta and that draw's shape parameters. Result is
/// (chains * samples) x rows(X_new).
Eigen::MatrixXd posterior_predictive(const PosteriorDraws& draws, const ModelSpec& spec,
                                     const RowMatrix& X_new, Rng& rng);

struct HdiInterval {
  double lower;
  double upper;
  double mass;
};

/// Number of samples an interval of the given mass must hold: ceil(mass n),
/// ignoring rounding noise in the product.
std::size_t hdi_count(std::size_t n, double mass);

/// Shortest window of hdi_count(n, mass) sorted samples; the leftmost
/// window wins ties (widths equal to within 1e-12 of the sample range).
HdiInterval hdi(std::span<const double> samples, double mass);

struct CoverageWidth {
  double coverage;
  double mean_width;
};

/// HDI of each predictive column against the matching y; coverage counts
/// lower <= y <= upper.
CoverageWidth coverage_and_width(const Eigen::MatrixXd& predictive, std::span<const double> y,
                                 double mass);

}  // namespace modalreg

#endif  // MODALREG_POSTERIOR_HPP
