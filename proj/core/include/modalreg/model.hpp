#ifndef MODALREG_MODEL_HPP
#define MODALREG_MODEL_HPP

// Regression model: y_i ~ Family(mode = x_i' beta, shape parameters), with a
// prior on every shape parameter and (by default) a flat prior on beta.
// Sampling happens on an unconstrained vector: beta as-is, positive
// parameters on the log scale, weights on the logit scale.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modalreg/dataset.hpp"
#include "modalreg/distributions.hpp"

namespace modalreg {

enum class Family { fg, dtp_t, tpsc_t, lognm, normal, ald };

std::string to_string(Family family);
/// Accepts the CLI spellings ("tpsc-t") and the enum spellings ("tpsc_t").
Family parse_family(std::string_view name);
/// Type II members have disjoint component supports split at the mode.
bool is_type_two(Family family);

struct Prior {
  enum class Kind { flat, uniform, inverse_gamma, normal };
  Kind kind = Kind::flat;
  double a = 0.0;  // inverse gamma shape, or normal mean
  double b = 0.0;  // inverse gamma scale, or normal sd

  static Prior flat() { return {Kind::flat, 0.0, 0.0}; }
  static Prior uniform() { return {Kind::uniform, 0.0, 1.0}; }
  static Prior inverse_gamma(double shape, double scale) {
    return {Kind::inverse_gamma, shape, scale};
  }
  static Prior normal(double mean, double sd) { return {Kind::normal, mean, sd}; }

  /// Log density at a constrained value (up to nothing: all terms included).
  double log_density(double x) const;

  friend bool operator==(const Prior&, const Prior&) = default;
};

std::string to_string(const Prior& prior);
Prior parse_prior(std::string_view text);

/// Priors keyed by parameter name; "beta" holds the (shared) coefficient prior.
struct ModelSpec {
  Family family = Family::tpsc_t;
  std::map<std::string, Prior> priors;

  /// Uniform(0,1) on weights, InverseGamma(1,1) on positive parameters,
  /// Normal(0, 100^2) on the logNM log-locations; flat on beta except for
  /// logNM, which uses Normal(0, 10^2).
  static ModelSpec with_defaults(Family family);

  /// Throws std::invalid_argument if a prior is missing, has the wrong kind
  /// for its parameter, or is flat on a parameter owned by one component only.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class Transform { identity, log, logit };

struct ParameterInfo {
  std::string name;
  std::size_t offset;
  Transform transform;
};

class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(std::vector<ParameterInfo> entries);

  std::size_t size() const { return entries_.size(); }
  const std::vector<ParameterInfo>& entries() const { return entries_; }
  std::vector<std::string> names() const;
  std::size_t index_of(std::string_view name) const;

  std::vector<double> constrain(std::span<const double> unconstrained) const;
  std::vector<double> unconstrain(std::span<const double> constrained) const;

 private:
  std::vector<ParameterInfo> entries_;
};

/// Shape-parameter names of a family in layout order.
std::vector<std::string> shape_parameter_names(Family family);
/// Likelihood parameters with mode `theta` from a family's shape values,
/// given in layout order (the tail of a constrained vector).
LikelihoodParams make_likelihood_params(Family family, std::span<const double> shape,
                                        double theta);
/// Names of the coefficient block: beta0 .. beta{p-1}.
std::vector<std::string> coefficient_names(std::size_t p);

class RegressionModel {
 public:
  RegressionModel(ModelSpec spec, Dataset data);
  ~RegressionModel();
  RegressionModel(RegressionModel&&) noexcept;
  RegressionModel& operator=(RegressionModel&&) noexcept;

  const ModelSpec& spec() const { return spec_; }
  const Dataset& data() const;
  const ParameterLayout& layout() const { return layout_; }
  std::size_t dim() const { return layout_.size(); }

  /// Sum of pointwise log densities at a constrained parameter vector.
  /// Returns -inf if any observation has zero density.
  double log_likelihood(std::span<const double> constrained) const;

  /// ln p(y_i | params) for each observation.
  std::vector<double> pointwise_log_likelihood(std::span<const double> constrained) const;

  /// Log posterior density (likelihood + priors + log-Jacobian) on the
  /// unconstrained scale. Never throws for finite input; -inf on underflow.
  double log_posterior(std::span<const double> unconstrained) const;

  /// As log_posterior, also writing the exact gradient into `grad`.
  double log_posterior_gradient(std::span<const double> unconstrained,
                                std::span<double> grad) const;

  /// Likelihood parameters of one observation's distribution with mode
  /// `theta`, read from a constrained vector.
  LikelihoodParams params_at(std::span<const double> constrained, double theta) const;

  struct Impl;

 private:
  ModelSpec spec_;
  ParameterLayout layout_;
  std::unique_ptr<const Impl> impl_;
};

// Free-function forms. Each builds a RegressionModel; prefer the class in
// loops.
double log_likelihood(const ModelSpec& spec, const Dataset& data,
                      std::span<const double> constrained);
double log_posterior_unconstrained(const ModelSpec& spec, const Dataset& data,
                                   std::span<const double> unconstrained);
std::vector<double> grad_log_posterior(const ModelSpec& spec, const Dataset& data,
                                       std::span<const double> unconstrained);

}  // namespace modalreg

#endif  // MODALREG_MODEL_HPP
