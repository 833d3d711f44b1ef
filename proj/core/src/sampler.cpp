#include "modalreg/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Dense>

namespace modalreg {

void SamplerConfig::validate() const {
  if (chains < 1) throw std::invalid_argument("sampler: chains must be >= 1");
  if (warmup < 150) throw std::invalid_argument("sampler: warmup must be >= 150");
  if (samples < 1) throw std::invalid_argument("sampler: samples must be >= 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("sampler: target_accept must lie in (0, 1)");
  }
  if (max_treedepth < 1) throw std::invalid_argument("sampler: max_treedepth must be >= 1");
  if (!(init_radius >= 0.0) || !std::isfinite(init_radius)) {
    throw std::invalid_argument("sampler: init_radius must be finite and >= 0");
  }
  if (threads < 0) throw std::invalid_argument("sampler: threads must be >= 0");
}

std::vector<double> PosteriorDraws::chain_values(std::size_t chain, std::size_t j) const {
  std::vector<double> out(samples);
  for (std::size_t s = 0; s < samples; ++s) out[s] = value(chain, s, j);
  return out;
}

std::vector<double> PosteriorDraws::pooled(std::size_t j) const {
  std::vector<double> out;
  out.reserve(chains * samples);
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t s = 0; s < samples; ++s) out.push_back(value(c, s, j));
  }
  return out;
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

int PosteriorDraws::total_divergences() const {
  int total = 0;
  for (int d : divergences) total += d;
  return total;
}

namespace {

using Vec = Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

struct PhasePoint {
  Vec q, p, grad;
  double lp = -kInf;
};

class DualAveraging {
 public:
  void set_mu(double mu) { mu_ = mu; }
  void set_delta(double delta) { delta_ = delta; }
  void restart() {
    counter_ = 0.0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }
  void learn(double& epsilon, double accept) {
    counter_ += 1.0;
    accept = std::min(1.0, accept);
    const double eta = 1.0 / (counter_ + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept);
    const double x = mu_ - s_bar_ * std::sqrt(counter_) / kGamma;
    const double x_eta = std::pow(counter_, -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    epsilon = std::exp(x);
  }
  double final_epsilon() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double counter_ = 0.0, s_bar_ = 0.0, x_bar_ = 0.0, mu_ = 0.0, delta_ = 0.8;
};

// Welford accumulator plus the expanding-window schedule for the mass matrix.
class VarianceWindows {
 public:
  VarianceWindows(int warmup, std::size_t dim) : warmup_(warmup), mean_(Vec::Zero(dim)),
                                                 m2_(Vec::Zero(dim)) {
    init_buffer_ = static_cast<int>(0.15 * warmup);
    term_buffer_ = static_cast<int>(0.1 * warmup);
    window_size_ = std::min(25, warmup - init_buffer_ - term_buffer_);
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  // Returns true when a window closed and `inv_metric` was refreshed.
  bool learn(Vec& inv_metric, const Vec& q) {
    if (in_window()) add(q);
    if (counter_ == next_window_ && counter_ != warmup_) {
      advance_window();
      const double n = static_cast<double>(n_);
      const Vec var = m2_ / (n - 1.0);
      inv_metric = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
      n_ = 0;
      mean_.setZero();
      m2_.setZero();
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

 private:
  bool in_window() const {
    return counter_ >= init_buffer_ && counter_ < warmup_ - term_buffer_ && counter_ != warmup_;
  }
  void add(const Vec& q) {
    ++n_;
    const Vec delta = q - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta.cwiseProduct(q - mean_);
  }
  void advance_window() {
    const int last = warmup_ - term_buffer_ - 1;
    if (next_window_ == last) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != last && next_window_ + 2 * window_size_ >= warmup_ - term_buffer_) {
      next_window_ = last;
    }
  }

  int warmup_;
  int init_buffer_ = 0, term_buffer_ = 0, window_size_ = 0, next_window_ = 0, counter_ = 0;
  long n_ = 0;
  Vec mean_, m2_;
};

class Chain {
 public:
  Chain(const LogDensityGrad& f, std::size_t dim, const SamplerConfig& cfg, int index)
      : f_(f), dim_(dim), cfg_(cfg), index_(index),
        rng_(cfg.seed + static_cast<std::uint64_t>(index)),
        inv_metric_(Vec::Ones(static_cast<Eigen::Index>(dim))) {}

  void initialize() {
    std::uniform_real_distribution<double> u(-cfg_.init_radius, cfg_.init_radius);
    z_.q.resize(static_cast<Eigen::Index>(dim_));
    z_.p = Vec::Zero(static_cast<Eigen::Index>(dim_));
    z_.grad.resize(static_cast<Eigen::Index>(dim_));
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (auto& v : z_.q) v = u(rng_);
      evaluate(z_);
      if (std::isfinite(z_.lp) && z_.grad.allFinite()) return;
    }
    throw SamplerError(index_,
                       "could not find a starting point with finite log density and gradient "
                       "after 100 attempts");
  }

  // Runs warmup and sampling, writing draws into `out` (samples x dim rows).
  void run(const OutputTransform& output, std::span<double> out, int& divergences,
           int& treedepth_hits, double& stepsize, std::vector<double>& inv_metric,
           double& mean_accept) {
    initialize();
    init_stepsize();
    DualAveraging adapt;
    adapt.set_delta(cfg_.target_accept);
    adapt.set_mu(std::log(10.0 * epsilon_));
    VarianceWindows windows(cfg_.warmup, dim_);

    for (int it = 0; it < cfg_.warmup; ++it) {
      const double accept = transition();
      adapt.learn(epsilon_, accept);
      if (windows.learn(inv_metric_, z_.q)) {
        init_stepsize();
        adapt.set_mu(std::log(10.0 * epsilon_));
        adapt.restart();
      }
    }
    epsilon_ = adapt.final_epsilon();

    divergences = 0;
    treedepth_hits = 0;
    double accept_sum = 0.0;
    for (int it = 0; it < cfg_.samples; ++it) {
      accept_sum += transition();
      if (divergent_) ++divergences;
      if (depth_ >= cfg_.max_treedepth) ++treedepth_hits;
      auto row = out.subspan(static_cast<std::size_t>(it) * dim_, dim_);
      if (output) {
        const auto v = output(std::span<const double>(z_.q.data(), dim_));
        std::copy(v.begin(), v.end(), row.begin());
      } else {
        std::copy(z_.q.begin(), z_.q.end(), row.begin());
      }
    }
    stepsize = epsilon_;
    inv_metric.assign(inv_metric_.begin(), inv_metric_.end());
    mean_accept = accept_sum / cfg_.samples;
  }

 private:
  void evaluate(PhasePoint& z) {
    z.lp = f_(std::span<const double>(z.q.data(), dim_), std::span<double>(z.grad.data(), dim_));
    if (std::isnan(z.lp)) z.lp = -kInf;
  }

  double hamiltonian(const PhasePoint& z) const {
    const double h = -z.lp + 0.5 * z.p.dot(inv_metric_.cwiseProduct(z.p));
    return std::isnan(h) ? kInf : h;
  }

  Vec sharp(const Vec& p) const { return inv_metric_.cwiseProduct(p); }

  void sample_momentum(PhasePoint& z) {
    for (Eigen::Index j = 0; j < z.p.size(); ++j) z.p[j] = normal_(rng_) / std::sqrt(inv_metric_[j]);
  }

  void leapfrog(PhasePoint& z, double eps) {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * inv_metric_.cwiseProduct(z.p);
    evaluate(z);
    z.p += 0.5 * eps * z.grad;
  }

  void init_stepsize() {
    if (epsilon_ == 0.0 || epsilon_ > 1e7 || std::isnan(epsilon_)) return;
    const PhasePoint start = z_;
    auto trial = [&] {
      z_ = start;
      sample_momentum(z_);
      const double h0 = hamiltonian(z_);
      leapfrog(z_, epsilon_);
      return h0 - hamiltonian(z_);
    };
    const double log08 = std::log(0.8);
    const int direction = trial() > log08 ? 1 : -1;
    for (;;) {
      const double delta_h = trial();
      if (direction == 1 && !(delta_h > log08)) break;
      if (direction == -1 && !(delta_h < log08)) break;
      epsilon_ = direction == 1 ? 2.0 * epsilon_ : 0.5 * epsilon_;
      if (epsilon_ > 1e7) throw SamplerError(index_, "step size diverged; the posterior may be improper");
      if (epsilon_ == 0.0) throw SamplerError(index_, "step size collapsed to zero");
    }
    z_ = start;
  }

  static bool no_u_turn(const Vec& sharp_minus, const Vec& sharp_plus, const Vec& rho) {
    return sharp_plus.dot(rho) > 0.0 && sharp_minus.dot(rho) > 0.0;
  }

  struct TreeStats {
    int n_leapfrog = 0;
    double sum_metro = 0.0;
  };

  bool build_tree(int depth, PhasePoint& z, PhasePoint& propose, Vec& sharp_beg, Vec& sharp_end,
                  Vec& rho, Vec& p_beg, Vec& p_end, double h0, double sign, TreeStats& stats,
                  double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z, sign * epsilon_);
      ++stats.n_leapfrog;
      const double h = hamiltonian(z);
      if (h - h0 > kMaxDeltaH) divergent_ = true;
      log_sum_weight = log_add(log_sum_weight, h0 - h);
      stats.sum_metro += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      propose = z;
      sharp_beg = sharp(z.p);
      sharp_end = sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }

    const auto n = z.p.size();
    double lsw_init = -kInf;
    Vec p_init_end(n), sharp_init_end(n);
    Vec rho_init = Vec::Zero(n);
    if (!build_tree(depth - 1, z, propose, sharp_beg, sharp_init_end, rho_init, p_beg, p_init_end,
                    h0, sign, stats, lsw_init)) {
      return false;
    }

    PhasePoint propose_final = z;
    double lsw_final = -kInf;
    Vec p_final_beg(n), sharp_final_beg(n);
    Vec rho_final = Vec::Zero(n);
    if (!build_tree(depth - 1, z, propose_final, sharp_final_beg, sharp_end, rho_final,
                    p_final_beg, p_end, h0, sign, stats, lsw_final)) {
      return false;
    }

    const double lsw_subtree = log_add(lsw_init, lsw_final);
    log_sum_weight = log_add(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      propose = std::move(propose_final);
    } else if (uniform_(rng_) < std::exp(lsw_final - lsw_subtree)) {
      propose = std::move(propose_final);
    }

    const Vec rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = no_u_turn(sharp_beg, sharp_end, rho_subtree);
    persist = persist && no_u_turn(sharp_beg, sharp_final_beg, rho_init + p_final_beg);
    persist = persist && no_u_turn(sharp_init_end, sharp_end, rho_final + p_init_end);
    return persist;
  }

  // One NUTS transition from z_; returns the mean Metropolis acceptance.
  double transition() {
    sample_momentum(z_);
    PhasePoint z_fwd = z_, z_bck = z_, z_sample = z_, z_propose = z_;

    Vec p_fwd_fwd = z_.p, sharp_fwd_fwd = sharp(z_.p);
    Vec p_fwd_bck = z_.p, sharp_fwd_bck = sharp_fwd_fwd;
    Vec p_bck_fwd = z_.p, sharp_bck_fwd = sharp_fwd_fwd;
    Vec p_bck_bck = z_.p, sharp_bck_bck = sharp_fwd_fwd;
    Vec rho = z_.p;

    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z_);
    TreeStats stats;
    depth_ = 0;
    divergent_ = false;
    const auto n = z_.p.size();

    while (depth_ < cfg_.max_treedepth) {
      Vec rho_fwd = Vec::Zero(n), rho_bck = Vec::Zero(n);
      bool valid = false;
      double lsw_subtree = -kInf;
      if (uniform_(rng_) > 0.5) {
        PhasePoint z = z_fwd;
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        sharp_bck_fwd = sharp_fwd_bck;
        valid = build_tree(depth_, z, z_propose, sharp_fwd_bck, sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                           p_fwd_fwd, h0, 1.0, stats, lsw_subtree);
        z_fwd = std::move(z);
      } else {
        PhasePoint z = z_bck;
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        sharp_fwd_bck = sharp_bck_fwd;
        valid = build_tree(depth_, z, z_propose, sharp_bck_fwd, sharp_bck_bck, rho_bck, p_bck_fwd,
                           p_bck_bck, h0, -1.0, stats, lsw_subtree);
        z_bck = std::move(z);
      }
      if (!valid) break;
      ++depth_;

      if (lsw_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (uniform_(rng_) < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_add(log_sum_weight, lsw_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = no_u_turn(sharp_bck_bck, sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(sharp_bck_bck, sharp_fwd_bck, rho_bck + p_fwd_bck);
      persist = persist && no_u_turn(sharp_bck_fwd, sharp_fwd_fwd, rho_fwd + p_bck_fwd);
      if (!persist) break;
    }

    z_ = std::move(z_sample);
    return stats.n_leapfrog > 0 ? stats.sum_metro / stats.n_leapfrog : 0.0;
  }

  static constexpr double kMaxDeltaH = 1000.0;

  const LogDensityGrad& f_;
  std::size_t dim_;
  const SamplerConfig& cfg_;
  int index_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  Vec inv_metric_;
  PhasePoint z_;
  double epsilon_ = 1.0;
  int depth_ = 0;
  bool divergent_ = false;
};

}  // namespace

PosteriorDraws run_nuts(const LogDensityGrad& log_density, std::size_t dim,
                        const SamplerConfig& config, std::vector<std::string> names,
                        const OutputTransform& output) {
  config.validate();
  if (dim == 0) throw std::invalid_argument("run_nuts: dimension must be >= 1");
  std::size_t out_dim = dim;
  if (output) out_dim = output(std::vector<double>(dim, 0.0)).size();
  if (names.empty()) {
    for (std::size_t j = 0; j < out_dim; ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != out_dim) throw std::invalid_argument("run_nuts: names do not match output size");

  const auto chains = static_cast<std::size_t>(config.chains);
  const auto samples = static_cast<std::size_t>(config.samples);
  PosteriorDraws draws;
  draws.names = std::move(names);
  draws.chains = chains;
  draws.samples = samples;
  draws.dim = out_dim;
  draws.seed = config.seed;
  draws.values.assign(chains * samples * out_dim, 0.0);
  draws.divergences.assign(chains, 0);
  draws.treedepth_hits.assign(chains, 0);
  draws.stepsize.assign(chains, 0.0);
  draws.inv_metric.assign(chains, {});
  draws.mean_accept.assign(chains, 0.0);

  std::vector<std::exception_ptr> errors(chains);
  auto run_chain = [&](std::size_t c) {
    try {
      Chain chain(log_density, dim, config, static_cast<int>(c));
      std::span<double> out(draws.values.data() + c * samples * out_dim, samples * out_dim);
      chain.run(output, out, draws.divergences[c], draws.treedepth_hits[c], draws.stepsize[c],
                draws.inv_metric[c], draws.mean_accept[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, chains);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chains; ++c) run_chain(c);
  } else {
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard lock(m);
            if (next == chains) return;
            c = next++;
          }
          run_chain(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t c = 0; c < chains; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const SamplerError&) {
      throw;
    } catch (const std::exception& e) {
      throw SamplerError(static_cast<int>(c), e.what());
    }
  }
  return draws;
}

}  // namespace modalreg
