#ifndef MODALREG_STATS_HPP
#define MODALREG_STATS_HPP

// Small descriptive statistics shared by the diagnostics and summaries.

#include <span>
#include <vector>

namespace modalreg {

double mean(std::span<const double> x);
/// Sample variance with denominator n - 1 (0 for n < 2).
double variance(std::span<const double> x);

/// Linear interpolation between order statistics at h = (n - 1) p
/// (zero-based). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);
/// As quantile_sorted on a copy of x.
double quantile(std::span<const double> x, double p);
double median(std::span<const double> x);
/// Median absolute deviation scaled by 1.4826.
double mad(std::span<const double> x);

}  // namespace modalreg

#endif  // MODALREG_STATS_HPP
