#include "modalreg/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "modalreg/dual.hpp"

namespace modalreg {

// ---------------------------------------------------------------------------
// Families

std::string to_string(Family family) {
  switch (family) {
    case Family::fg: return "fg";
    case Family::dtp_t: return "dtp-t";
    case Family::tpsc_t: return "tpsc-t";
    case Family::lognm: return "lognm";
    case Family::normal: return "normal";
    case Family::ald: return "ald";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  for (Family f : {Family::fg, Family::dtp_t, Family::tpsc_t, Family::lognm, Family::normal,
                   Family::ald}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown family '" + std::string(name) +
                              "' (expected fg, dtp-t, tpsc-t, lognm, normal or ald)");
}

bool is_type_two(Family family) {
  return family == Family::dtp_t || family == Family::tpsc_t || family == Family::ald;
}

// ---------------------------------------------------------------------------
// Priors

namespace {

// Generic log prior on a constrained value x with ln x supplied separately so
// the log-scale parameters stay accurate in their tails.
template <class T>
T log_prior(const Prior& prior, const T& x, const T& log_x) {
  using std::log;
  switch (prior.kind) {
    case Prior::Kind::flat:
    case Prior::Kind::uniform:
      return T(0.0);
    case Prior::Kind::inverse_gamma:
      return prior.a * std::log(prior.b) - log_gamma(prior.a) - (prior.a + 1.0) * log_x -
             prior.b / x;
    case Prior::Kind::normal: {
      const T z = (x - prior.a) / prior.b;
      return -std::log(prior.b) - kHalfLogTwoPi - 0.5 * z * z;
    }
  }
  return T(0.0);
}

}  // namespace

double Prior::log_density(double x) const {
  switch (kind) {
    case Kind::flat:
      return 0.0;
    case Kind::uniform:
      return (x > a && x < b) ? -std::log(b - a) : kNegInf;
    case Kind::inverse_gamma:
      if (!(x > 0.0)) return kNegInf;
      return log_prior(*this, x, std::log(x));
    case Kind::normal:
      return log_prior(*this, x, 0.0);
  }
  return kNegInf;
}

std::string to_string(const Prior& prior) {
  std::ostringstream os;
  os.precision(17);
  switch (prior.kind) {
    case Prior::Kind::flat: os << "flat"; break;
    case Prior::Kind::uniform: os << "uniform(" << prior.a << "," << prior.b << ")"; break;
    case Prior::Kind::inverse_gamma:
      os << "inverse_gamma(" << prior.a << "," << prior.b << ")";
      break;
    case Prior::Kind::normal: os << "normal(" << prior.a << "," << prior.b << ")"; break;
  }
  return os.str();
}

Prior parse_prior(std::string_view text) {
  auto fail = [&]() -> Prior {
    throw std::invalid_argument("cannot parse prior '" + std::string(text) + "'");
  };
  if (text == "flat") return Prior::flat();
  const auto open = text.find('(');
  const auto comma = text.find(',');
  const auto close = text.find(')');
  if (open == std::string_view::npos || comma == std::string_view::npos ||
      close == std::string_view::npos || !(open < comma && comma < close)) {
    return fail();
  }
  auto number = [&](std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail();
    return v;
  };
  const std::string_view kind = text.substr(0, open);
  const double a = number(text.substr(open + 1, comma - open - 1));
  const double b = number(text.substr(comma + 1, close - comma - 1));
  if (kind == "uniform") {
    if (a != 0.0 || b != 1.0) fail();
    return Prior::uniform();
  }
  if (kind == "inverse_gamma") return Prior::inverse_gamma(a, b);
  if (kind == "normal") return Prior::normal(a, b);
  return fail();
}

// ---------------------------------------------------------------------------
// Family traits

namespace {

template <class T, int K>
struct Shape {
  std::array<T, K> value{};
  std::array<T, K> log_value{};
  std::array<T, K> log_complement{};  // ln(1 - w), logit entries only
};

template <Family F>
struct Traits;

template <>
struct Traits<Family::fg> {
  static constexpr int K = 3;
  static constexpr std::array<const char*, K> names{"w", "sigma1", "sigma2"};
  static constexpr std::array<Transform, K> transforms{Transform::logit, Transform::log,
                                                       Transform::log};
  static constexpr std::array<bool, K> owned_by_one{false, true, true};
  template <class T>
  static FgKernel<T> kernel(const Shape<T, K>& s) {
    return FgKernel<T>(s.log_value[0], s.log_complement[0], s.value[1], s.value[2]);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return FgParams{c[0], theta, c[1], c[2]};
  }
};

template <>
struct Traits<Family::dtp_t> {
  static constexpr int K = 4;
  static constexpr std::array<const char*, K> names{"sigma1", "sigma2", "delta1", "delta2"};
  static constexpr std::array<Transform, K> transforms{Transform::log, Transform::log,
                                                       Transform::log, Transform::log};
  static constexpr std::array<bool, K> owned_by_one{true, true, true, true};
  template <class T>
  static DtpKernel<T> kernel(const Shape<T, K>& s) {
    return DtpKernel<T>(s.value[0], s.value[1], s.value[2], s.value[3]);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return DtpParams{theta, c[0], c[1], c[2], c[3]};
  }
};

template <>
struct Traits<Family::tpsc_t> {
  static constexpr int K = 3;
  static constexpr std::array<const char*, K> names{"w", "sigma", "delta"};
  static constexpr std::array<Transform, K> transforms{Transform::logit, Transform::log,
                                                       Transform::log};
  static constexpr std::array<bool, K> owned_by_one{false, false, false};
  template <class T>
  static TpscKernel<T> kernel(const Shape<T, K>& s) {
    return TpscKernel<T>(s.log_value[0], s.log_complement[0], s.value[1], s.value[2]);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return TpscParams{c[0], theta, c[1], c[2]};
  }
};

template <>
struct Traits<Family::lognm> {
  static constexpr int K = 5;
  static constexpr std::array<const char*, K> names{"w", "mu1", "nu1", "mu2", "nu2"};
  static constexpr std::array<Transform, K> transforms{
      Transform::logit, Transform::identity, Transform::log, Transform::identity,
      Transform::log};
  static constexpr std::array<bool, K> owned_by_one{false, true, true, true, true};
  template <class T>
  static LogNmKernel<T> kernel(const Shape<T, K>& s) {
    return LogNmKernel<T>(s.log_value[0], s.log_complement[0], s.value[1], s.value[2],
                          s.value[3], s.value[4]);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return LogNmParams{c[0], theta, c[1], c[2], c[3], c[4]};
  }
};

template <>
struct Traits<Family::normal> {
  static constexpr int K = 1;
  static constexpr std::array<const char*, K> names{"sigma"};
  static constexpr std::array<Transform, K> transforms{Transform::log};
  static constexpr std::array<bool, K> owned_by_one{false};
  template <class T>
  static NormalKernel<T> kernel(const Shape<T, K>& s) {
    return NormalKernel<T>(s.value[0]);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return NormalParams{theta, c[0]};
  }
};

template <>
struct Traits<Family::ald> {
  static constexpr int K = 1;
  static constexpr double kQuantile = 0.5;
  static constexpr std::array<const char*, K> names{"sigma"};
  static constexpr std::array<Transform, K> transforms{Transform::log};
  static constexpr std::array<bool, K> owned_by_one{false};
  template <class T>
  static AldKernel<T> kernel(const Shape<T, K>& s) {
    return AldKernel<T>(s.value[0], kQuantile);
  }
  static LikelihoodParams params(const std::array<double, K>& c, double theta) {
    return AldParams{theta, c[0], kQuantile};
  }
};

template <class Fn>
decltype(auto) dispatch(Family family, Fn&& fn) {
  switch (family) {
    case Family::fg: return fn(Traits<Family::fg>{});
    case Family::dtp_t: return fn(Traits<Family::dtp_t>{});
    case Family::tpsc_t: return fn(Traits<Family::tpsc_t>{});
    case Family::lognm: return fn(Traits<Family::lognm>{});
    case Family::normal: return fn(Traits<Family::normal>{});
    case Family::ald: return fn(Traits<Family::ald>{});
  }
  throw std::logic_error("unhandled family");
}

double inv_logit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

std::vector<std::string> shape_parameter_names(Family family) {
  return dispatch(family, [](auto traits) {
    using Tr = decltype(traits);
    return std::vector<std::string>(Tr::names.begin(), Tr::names.end());
  });
}

LikelihoodParams make_likelihood_params(Family family, std::span<const double> shape,
                                        double theta) {
  return dispatch(family, [&](auto traits) {
    using Tr = decltype(traits);
    if (shape.size() != static_cast<std::size_t>(Tr::K)) {
      throw std::invalid_argument("make_likelihood_params: expected " + std::to_string(Tr::K) +
                                  " shape values for " + to_string(family));
    }
    std::array<double, Tr::K> c{};
    std::copy(shape.begin(), shape.end(), c.begin());
    return Tr::params(c, theta);
  });
}

std::vector<std::string> coefficient_names(std::size_t p) {
  std::vector<std::string> out;
  out.reserve(p);
  for (std::size_t j = 0; j < p; ++j) out.push_back("beta" + std::to_string(j));
  return out;
}

ModelSpec ModelSpec::with_defaults(Family family) {
  ModelSpec spec;
  spec.family = family;
  spec.priors["beta"] = family == Family::lognm ? Prior::normal(0.0, 10.0) : Prior::flat();
  dispatch(family, [&](auto traits) {
    using Tr = decltype(traits);
    for (int k = 0; k < Tr::K; ++k) {
      Prior prior;
      switch (Tr::transforms[k]) {
        case Transform::logit: prior = Prior::uniform(); break;
        case Transform::log: prior = Prior::inverse_gamma(1.0, 1.0); break;
        case Transform::identity: prior = Prior::normal(0.0, 100.0); break;
      }
      spec.priors[Tr::names[k]] = prior;
    }
    return 0;
  });
  return spec;
}

void ModelSpec::validate() const {
  auto check_prior = [](const std::string& name, const Prior& prior, Transform t) {
    const bool ok = [&] {
      switch (prior.kind) {
        case Prior::Kind::flat: return true;
        case Prior::Kind::uniform: return t == Transform::logit;
        case Prior::Kind::inverse_gamma:
          return t == Transform::log && prior.a > 0.0 && prior.b > 0.0;
        case Prior::Kind::normal: return t != Transform::logit && prior.b > 0.0;
      }
      return false;
    }();
    if (!ok) {
      throw std::invalid_argument("prior " + to_string(prior) + " is not valid for parameter '" +
                                  name + "'");
    }
  };
  const auto beta = priors.find("beta");
  if (beta == priors.end()) throw std::invalid_argument("model spec: missing prior for 'beta'");
  check_prior("beta", beta->second, Transform::identity);
  dispatch(family, [&](auto traits) {
    using Tr = decltype(traits);
    for (int k = 0; k < Tr::K; ++k) {
      const auto it = priors.find(Tr::names[k]);
      if (it == priors.end()) {
        throw std::invalid_argument(std::string("model spec: missing prior for '") +
                                    Tr::names[k] + "'");
      }
      check_prior(Tr::names[k], it->second, Tr::transforms[k]);
      if (Tr::owned_by_one[k] && it->second.kind == Prior::Kind::flat) {
        throw std::invalid_argument(std::string("model spec: improper prior on '") +
                                    Tr::names[k] +
                                    "', which belongs to one mixture component only, gives an "
                                    "improper posterior");
      }
    }
    return 0;
  });
  for (const auto& [name, prior] : priors) {
    if (name == "beta") continue;
    const auto names = shape_parameter_names(family);
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw std::invalid_argument("model spec: prior given for unknown parameter '" + name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Layout

ParameterLayout::ParameterLayout(std::vector<ParameterInfo> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].offset != i) throw std::invalid_argument("layout offsets must be 0..d-1");
  }
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::size_t ParameterLayout::index_of(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.offset;
  }
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

std::vector<double> ParameterLayout::constrain(std::span<const double> u) const {
  if (u.size() != entries_.size()) throw std::invalid_argument("constrain: size mismatch");
  std::vector<double> c(u.size());
  for (const auto& e : entries_) {
    const double x = u[e.offset];
    switch (e.transform) {
      case Transform::identity: c[e.offset] = x; break;
      case Transform::log: c[e.offset] = std::exp(x); break;
      case Transform::logit: c[e.offset] = inv_logit(x); break;
    }
  }
  return c;
}

std::vector<double> ParameterLayout::unconstrain(std::span<const double> c) const {
  if (c.size() != entries_.size()) throw std::invalid_argument("unconstrain: size mismatch");
  std::vector<double> u(c.size());
  for (const auto& e : entries_) {
    const double x = c[e.offset];
    switch (e.transform) {
      case Transform::identity: u[e.offset] = x; break;
      case Transform::log: u[e.offset] = std::log(x); break;
      case Transform::logit: u[e.offset] = std::log(x) - std::log1p(-x); break;
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Model implementation

struct RegressionModel::Impl {
  virtual ~Impl() = default;
  virtual const Dataset& data() const = 0;
  virtual double log_likelihood(std::span<const double> c) const = 0;
  virtual void pointwise(std::span<const double> c, std::span<double> out) const = 0;
  virtual double log_posterior(std::span<const double> u) const = 0;
  virtual double log_posterior_gradient(std::span<const double> u,
                                        std::span<double> grad) const = 0;
  virtual LikelihoodParams params_at(std::span<const double> c, double theta) const = 0;
};

namespace {

template <class Tr>
class FamilyModel final : public RegressionModel::Impl {
  static constexpr int K = Tr::K;
  static constexpr int N = K + 1;  // tangent slot 0 is the observation's mode
  using D = Dual<N>;

 public:
  FamilyModel(const ModelSpec& spec, Dataset data) : data_(std::move(data)) {
    beta_prior_ = spec.priors.at("beta");
    for (int k = 0; k < K; ++k) shape_priors_[k] = spec.priors.at(Tr::names[k]);
  }

  const Dataset& data() const override { return data_; }

  double log_likelihood(std::span<const double> c) const override {
    const auto kernel = Tr::kernel(shape_from_constrained(c));
    const auto beta = coefficients(c);
    double total = 0.0;
    for (Eigen::Index i = 0; i < data_.X.rows(); ++i) {
      const double l = kernel(data_.X.row(i).dot(beta), data_.y(i));
      if (std::isnan(l)) return kNegInf;
      total += l;
    }
    return total;
  }

  void pointwise(std::span<const double> c, std::span<double> out) const override {
    const auto kernel = Tr::kernel(shape_from_constrained(c));
    const auto beta = coefficients(c);
    for (Eigen::Index i = 0; i < data_.X.rows(); ++i) {
      const double l = kernel(data_.X.row(i).dot(beta), data_.y(i));
      out[static_cast<std::size_t>(i)] = std::isnan(l) ? kNegInf : l;
    }
  }

  double log_posterior(std::span<const double> u) const override {
    Shape<double, K> shape;
    double lp = shape_terms(u, shape);
    lp += beta_log_prior(u, nullptr);
    if (!std::isfinite(lp)) return kNegInf;
    const auto kernel = Tr::kernel(shape);
    const auto beta = coefficients(u);
    for (Eigen::Index i = 0; i < data_.X.rows(); ++i) {
      lp += kernel(data_.X.row(i).dot(beta), data_.y(i));
    }
    return std::isnan(lp) || lp == std::numeric_limits<double>::infinity() ? kNegInf : lp;
  }

  double log_posterior_gradient(std::span<const double> u, std::span<double> grad) const override {
    const std::size_t p = data_.p();
    std::fill(grad.begin(), grad.end(), 0.0);
    Shape<D, K> shape;
    D total = shape_terms(u, shape);
    const double beta_lp = beta_log_prior(u, grad.data());
    if (!std::isfinite(total.v + beta_lp)) return fail(grad);
    const auto kernel = Tr::kernel(shape);
    const auto beta = coefficients(u);
    Eigen::Map<Eigen::VectorXd> grad_beta(grad.data(), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < data_.X.rows(); ++i) {
      const D theta = D::variable(data_.X.row(i).dot(beta), 0);
      const D l = kernel(theta, data_.y(i));
      total += l;
      grad_beta += l.d[0] * data_.X.row(i).transpose();
    }
    const double lp = total.v + beta_lp;
    if (!std::isfinite(lp)) return fail(grad);
    for (int k = 0; k < K; ++k) grad[p + static_cast<std::size_t>(k)] = total.d[k + 1];
    return lp;
  }

  LikelihoodParams params_at(std::span<const double> c, double theta) const override {
    std::array<double, K> shape{};
    for (int k = 0; k < K; ++k) shape[k] = c[data_.p() + static_cast<std::size_t>(k)];
    return Tr::params(shape, theta);
  }

 private:
  static double fail(std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return kNegInf;
  }

  Eigen::Map<const Eigen::VectorXd> coefficients(std::span<const double> v) const {
    return {v.data(), static_cast<Eigen::Index>(data_.p())};
  }

  Shape<double, K> shape_from_constrained(std::span<const double> c) const {
    Shape<double, K> s;
    for (int k = 0; k < K; ++k) {
      const double x = c[data_.p() + static_cast<std::size_t>(k)];
      s.value[k] = x;
      s.log_value[k] = std::log(x);
      s.log_complement[k] = std::log1p(-x);
    }
    return s;
  }

  // Fills `shape` from the unconstrained coordinates and returns the shape
  // priors plus log-Jacobian. For duals, slot k+1 seeds coordinate k.
  template <class T>
  T shape_terms(std::span<const double> u, Shape<T, K>& shape) const {
    T total(0.0);
    for (int k = 0; k < K; ++k) {
      T x;
      if constexpr (std::is_same_v<T, double>) {
        x = u[data_.p() + static_cast<std::size_t>(k)];
      } else {
        x = T::variable(u[data_.p() + static_cast<std::size_t>(k)], k + 1);
      }
      using std::exp;
      switch (Tr::transforms[k]) {
        case Transform::identity:
          shape.value[k] = x;
          shape.log_value[k] = T(0.0);
          break;
        case Transform::log:
          shape.value[k] = exp(x);
          shape.log_value[k] = x;
          total += x;  // d sigma / du = sigma
          break;
        case Transform::logit:
          shape.log_value[k] = log_inv_logit(x);
          shape.log_complement[k] = log_inv_logit(-x);
          shape.value[k] = exp(shape.log_value[k]);
          total += shape.log_value[k] + shape.log_complement[k];
          break;
      }
      total += log_prior(shape_priors_[k], shape.value[k], shape.log_value[k]);
    }
    return total;
  }

  double beta_log_prior(std::span<const double> u, double* grad) const {
    if (beta_prior_.kind == Prior::Kind::flat) return 0.0;
    double lp = 0.0;
    const double inv_var = 1.0 / (beta_prior_.b * beta_prior_.b);
    for (std::size_t j = 0; j < data_.p(); ++j) {
      lp += log_prior(beta_prior_, u[j], 0.0);
      if (grad != nullptr) grad[j] -= (u[j] - beta_prior_.a) * inv_var;
    }
    return lp;
  }

  Dataset data_;
  Prior beta_prior_;
  std::array<Prior, K> shape_priors_;
};

}  // namespace

RegressionModel::RegressionModel(ModelSpec spec, Dataset data) : spec_(std::move(spec)) {
  spec_.validate();
  data.validate();
  std::vector<ParameterInfo> entries;
  const auto betas = coefficient_names(data.p());
  for (std::size_t j = 0; j < betas.size(); ++j) {
    entries.push_back({betas[j], j, Transform::identity});
  }
  impl_ = dispatch(spec_.family, [&](auto traits) -> std::unique_ptr<const Impl> {
    using Tr = decltype(traits);
    for (int k = 0; k < Tr::K; ++k) {
      entries.push_back({Tr::names[k], entries.size(), Tr::transforms[k]});
    }
    return std::make_unique<FamilyModel<Tr>>(spec_, std::move(data));
  });
  layout_ = ParameterLayout(std::move(entries));
}

RegressionModel::~RegressionModel() = default;
const Dataset& RegressionModel::data() const { return impl_->data(); }
RegressionModel::RegressionModel(RegressionModel&&) noexcept = default;
RegressionModel& RegressionModel::operator=(RegressionModel&&) noexcept = default;

double RegressionModel::log_likelihood(std::span<const double> constrained) const {
  if (constrained.size() != dim()) throw std::invalid_argument("log_likelihood: size mismatch");
  validate(params_at(constrained, 0.0));
  for (std::size_t j = 0; j < data().p(); ++j) {
    if (!std::isfinite(constrained[j])) {
      throw std::domain_error("log_likelihood: non-finite coefficient");
    }
  }
  return impl_->log_likelihood(constrained);
}

std::vector<double> RegressionModel::pointwise_log_likelihood(
    std::span<const double> constrained) const {
  if (constrained.size() != dim()) throw std::invalid_argument("pointwise: size mismatch");
  std::vector<double> out(data().n());
  impl_->pointwise(constrained, out);
  return out;
}

double RegressionModel::log_posterior(std::span<const double> unconstrained) const {
  if (unconstrained.size() != dim()) throw std::invalid_argument("log_posterior: size mismatch");
  return impl_->log_posterior(unconstrained);
}

double RegressionModel::log_posterior_gradient(std::span<const double> unconstrained,
                                               std::span<double> grad) const {
  if (unconstrained.size() != dim() || grad.size() != dim()) {
    throw std::invalid_argument("log_posterior_gradient: size mismatch");
  }
  return impl_->log_posterior_gradient(unconstrained, grad);
}

LikelihoodParams RegressionModel::params_at(std::span<const double> constrained,
                                            double theta) const {
  return impl_->params_at(constrained, theta);
}

double log_likelihood(const ModelSpec& spec, const Dataset& data,
                      std::span<const double> constrained) {
  return RegressionModel(spec, data).log_likelihood(constrained);
}

double log_posterior_unconstrained(const ModelSpec& spec, const Dataset& data,
                                   std::span<const double> unconstrained) {
  return RegressionModel(spec, data).log_posterior(unconstrained);
}

std::vector<double> grad_log_posterior(const ModelSpec& spec, const Dataset& data,
                                       std::span<const double> unconstrained) {
  RegressionModel model(spec, data);
  std::vector<double> grad(model.dim());
  model.log_posterior_gradient(unconstrained, grad);
  return grad;
}

}  // namespace modalreg
