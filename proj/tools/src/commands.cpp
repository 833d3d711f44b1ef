#include "modalreg_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "modalreg/diagnostics.hpp"
#include "modalreg/fit.hpp"
#include "modalreg/latent_demo.hpp"
#include "modalreg/loo.hpp"
#include "modalreg/posterior.hpp"
#include "modalreg/sim.hpp"
#include "modalreg/stats.hpp"
#include "modalreg_cli/artifact.hpp"
#include "modalreg_cli/csv.hpp"

namespace modalreg::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kRhatLimit = 1.1;
constexpr double kParetoKLimit = 0.7;

struct FitOptions {
  std::string data, response, family, out;
  std::vector<std::string> covariates, priors;
  bool no_intercept = false;
  bool density_grid = false;
  bool strict = false;
  SamplerConfig sampler;
};

struct PredictOptions {
  std::string fit, newdata, out;
  double mass = 0.9;
  std::optional<std::uint64_t> seed;
};

struct LooOptions {
  std::vector<std::string> fits;
  std::string out;
};

struct SimulateOptions {
  std::string study, out;
  std::vector<std::string> models{"tpsc-t"};
  StudyConfig config;
};

struct DemoOptions {
  double init = 0.0;
  int n = 100;
  int iters = 5000;
  int burn = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

ModelSpec build_model_spec(const FitOptions& o) {
  return as_usage([&] {
    ModelSpec spec = ModelSpec::with_defaults(parse_family(o.family));
    for (const auto& item : o.priors) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--prior expects name=prior, got '" + item + "'");
      const std::string name = item.substr(0, eq);
      if (!spec.priors.contains(name)) {
        throw std::invalid_argument("--prior: " + to_string(spec.family) + " has no parameter '" + name + "'");
      }
      spec.priors[name] = parse_prior(item.substr(eq + 1));
    }
    spec.validate();
    return spec;
  });
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  FitSpec spec;
  spec.model = build_model_spec(o);
  spec.response = o.response;
  spec.covariates = o.covariates;
  spec.intercept = !o.no_intercept;
  spec.sampler = o.sampler;
  as_usage([&] { spec.sampler.validate(); return 0; });

  const CsvTable table = read_csv_file(o.data);
  const Dataset data = load_dataset(table, o.response, o.covariates, spec.intercept);
  spec.columns = data.column_names;
  spec.data_fingerprint = data_fingerprint(data);
  spec.data_rows = data.n();

  const RegressionModel model(spec.model, data);
  FitArtifact a;
  a.spec = spec;
  a.draws = sample_posterior(model, spec.sampler);
  a.loo = psis_loo(pointwise_loglik(a.draws, spec.model, data));
  const Diagnostics diag = compute_diagnostics(a.draws);
  const SummaryTable summary = summarize(a.draws, diag);
  write_artifact(a, summary, o.out);
  if (o.density_grid) write_density_grid(a.draws, spec, data, (std::filesystem::path(o.out) / "density.csv").string());

  summary.write_csv(out);
  out << "elpd_loo," << format_double(a.loo.elpd) << ",se," << format_double(a.loo.se) << '\n';

  if (const int d = a.draws.total_divergences(); d > 0) {
    err << "warning: " << d << " divergent transitions after warmup\n";
  }
  int high_k = 0;
  for (double k : a.loo.pareto_k) high_k += k > kParetoKLimit;
  if (high_k > 0) err << "warning: " << high_k << " observations with pareto_k > " << kParetoKLimit << '\n';
  bool unconverged = false;
  for (const auto& row : summary.rows) {
    if (row.rhat > kRhatLimit) {
      err << "warning: rhat " << format_double(row.rhat) << " > " << kRhatLimit << " for " << row.variable << '\n';
      unconverged = true;
    }
  }
  return unconverged && o.strict ? kDiagnosticFailure : kOk;
}

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream&) {
  if (!(o.mass > 0.0 && o.mass < 1.0)) throw UsageError("--mass must lie in (0, 1)");
  const FitArtifact a = read_artifact(o.fit);
  const CsvTable table = read_csv_file(o.newdata);
  for (const auto& name : a.spec.covariates) {
    if (!table.has_column(name)) {
      throw DataError(o.newdata + ": missing covariate '" + name + "' used by the fit in " + o.fit);
    }
  }
  const RowMatrix X = load_design(table, a.spec.covariates, a.spec.intercept);
  Rng rng(o.seed.value_or(a.spec.sampler.seed));
  const Eigen::MatrixXd pred = posterior_predictive(a.draws, a.spec.model, X, rng);

  auto file = open_output(o.out);
  file << "row,median,hdi_lower,hdi_upper,mass\n";
  std::vector<double> col(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.cols(); ++i) {
    for (Eigen::Index s = 0; s < pred.rows(); ++s) col[static_cast<std::size_t>(s)] = pred(s, i);
    const auto h = hdi(col, o.mass);
    file << i + 1 << ',' << format_double(median(col)) << ',' << format_double(h.lower) << ','
         << format_double(h.upper) << ',' << format_double(o.mass) << '\n';
  }
  out << "wrote " << pred.cols() << " prediction rows to " << o.out << '\n';
  return kOk;
}

int cmd_loo(const LooOptions& o, std::ostream& out, std::ostream&) {
  struct Row {
    std::string fit;
    double elpd, se, max_k;
  };
  std::vector<Row> rows;
  std::string fingerprint;
  for (const auto& dir : o.fits) {
    const std::filesystem::path p(dir);
    const FitSpec spec = fit_spec_from_json(read_json_file((p / "spec.json").string()));
    if (rows.empty()) {
      fingerprint = spec.data_fingerprint;
    } else if (spec.data_fingerprint != fingerprint) {
      throw DataError("fit '" + dir + "' was made on different data from '" + rows.front().fit +
                      "' (fingerprint " + spec.data_fingerprint + " vs " + fingerprint + ")");
    }
    const LooResult loo = loo_from_json(read_json_file((p / "loo.json").string()));
    double max_k = std::numeric_limits<double>::quiet_NaN();
    for (double k : loo.pareto_k) {
      if (!std::isnan(k) && !(k <= max_k)) max_k = k;
    }
    rows.push_back({dir, loo.elpd, loo.se, max_k});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.elpd > b.elpd; });

  auto write = [&](std::ostream& os) {
    os << "fit,elpd,se,max_pareto_k\n";
    for (const auto& r : rows) {
      os << csv_escape(r.fit) << ',' << format_double(r.elpd) << ',' << format_double(r.se) << ','
         << format_double(r.max_k) << '\n';
    }
  };
  auto file = open_output(o.out);
  write(file);
  write(out);
  return kOk;
}

int cmd_simulate(SimulateOptions o, std::ostream& out, std::ostream& err) {
  as_usage([&] {
    o.config.study = parse_study(o.study);
    o.config.models.clear();
    for (const auto& m : o.models) o.config.models.push_back(parse_family(m));
    o.config.validate();
    return 0;
  });
  const StudyResult r = run_study(o.config);
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw DataError("cannot create '" + o.out + "': " + ec.message());
  const std::filesystem::path dir(o.out);
  {
    auto f = open_output((dir / "aggregate.csv").string());
    r.write_aggregate_csv(f);
  }
  {
    auto f = open_output((dir / "replicates.csv").string());
    r.write_replicates_csv(f);
  }
  {
    auto f = open_output((dir / "failures.csv").string());
    f << "rep,model,message\n";
    for (const auto& fail : r.failures) f << fail.rep << ',' << fail.model << ',' << csv_escape(fail.message) << '\n';
  }
  r.write_aggregate_csv(out);
  for (const auto& fail : r.failures) err << "replicate " << fail.rep << " (" << fail.model << ") failed: " << fail.message << '\n';
  const std::size_t attempted = static_cast<std::size_t>(o.config.reps) * o.config.models.size();
  return r.failures.size() == attempted ? kSamplerFailure : kOk;
}

int cmd_demo(const DemoOptions& o, std::ostream& out, std::ostream&) {
  if (o.n < 1) throw UsageError("--n must be >= 1");
  if (o.iters < 1) throw UsageError("--iters must be >= 1");
  if (o.burn < 0 || o.burn >= o.iters) throw UsageError("--burn must lie in [0, iters)");
  const auto data = simulate_latent_demo_data(o.n, o.seed);
  const auto result = run_latent_augmentation_demo(data, o.init, o.iters, o.seed);
  const DemoVerdict verdict = classify(result, o.burn);
  auto file = open_output(o.out);
  file << "iteration,theta,n_left\n";
  for (std::size_t t = 0; t < result.trajectory.size(); ++t) {
    file << t + 1 << ',' << format_double(result.trajectory[t].theta) << ',' << result.trajectory[t].n_left << '\n';
  }
  out << "data range [" << format_double(result.data_min) << ", " << format_double(result.data_max) << "]\n";
  out << "verdict: " << to_string(verdict) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian modal regression with unimodal error distributions", "modalreg"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads for chains (0: all cores)")->check(CLI::NonNegativeNumber);

  auto add_sampler = [](CLI::App* cmd, SamplerConfig& s) {
    cmd->add_option("--chains", s.chains, "number of chains")->capture_default_str();
    cmd->add_option("--warmup", s.warmup, "warmup iterations per chain")->capture_default_str();
    cmd->add_option("--samples", s.samples, "kept iterations per chain")->capture_default_str();
    cmd->add_option("--seed", s.seed, "random seed")->capture_default_str();
    cmd->add_option("--target-accept", s.target_accept, "target acceptance statistic")->capture_default_str();
    cmd->add_option("--max-treedepth", s.max_treedepth, "maximum tree depth")->capture_default_str();
  };

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a regression model and write a fit directory");
  fit_cmd->add_option("--data", fit.data, "input CSV with a header row")->required();
  fit_cmd->add_option("--response", fit.response, "response column")->required();
  fit_cmd->add_option("--covariates", fit.covariates, "comma separated covariate columns")->delimiter(',');
  fit_cmd->add_flag("--no-intercept", fit.no_intercept, "omit the ones column");
  fit_cmd->add_option("--family", fit.family, "fg, dtp-t, tpsc-t, lognm, normal or ald")->required();
  fit_cmd->add_option("--prior", fit.priors, "override a prior, e.g. sigma=inverse_gamma(2,1)");
  fit_cmd->add_flag("--density-grid", fit.density_grid, "also write density.csv");
  fit_cmd->add_flag("--strict", fit.strict, "exit 5 when some rhat exceeds 1.1");
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  add_sampler(fit_cmd, fit.sampler);

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "posterior predictive medians and HDIs");
  predict_cmd->add_option("--fit", predict.fit, "fit directory")->required();
  predict_cmd->add_option("--newdata", predict.newdata, "CSV with the fit's covariate columns")->required();
  predict_cmd->add_option("--mass", predict.mass, "interval probability")->capture_default_str();
  predict_cmd->add_option("--seed", predict.seed, "random seed (default: the fit's seed)");
  predict_cmd->add_option("--out", predict.out, "output CSV")->required();

  LooOptions loo;
  auto* loo_cmd = app.add_subcommand("loo", "compare fits by PSIS-LOO expected log predictive density");
  loo_cmd->add_option("--fits", loo.fits, "comma separated fit directories")->required()->delimiter(',');
  loo_cmd->add_option("--out", loo.out, "output CSV")->required();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a replicated simulation study");
  sim_cmd->add_option("--study", sim.study, "left-skewed or right-skewed")->required();
  sim_cmd->add_option("--n", sim.config.n, "observations per replicate")->capture_default_str();
  sim_cmd->add_option("--reps", sim.config.reps, "replicates")->capture_default_str();
  sim_cmd->add_option("--models", sim.models, "comma separated families")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--mass", sim.config.mass, "prediction interval probability")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  add_sampler(sim_cmd, sim.config.sampler);
  sim_cmd->get_option("--seed")->each([&](const std::string&) { sim.config.seed = sim.config.sampler.seed; });

  DemoOptions demo;
  auto* demo_cmd = app.add_subcommand("demo-reducible", "latent-variable augmentation that cannot leave its start");
  demo_cmd->add_option("--init", demo.init, "initial theta")->required();
  demo_cmd->add_option("--n", demo.n, "simulated observations")->capture_default_str();
  demo_cmd->add_option("--iters", demo.iters, "iterations")->capture_default_str();
  demo_cmd->add_option("--burn", demo.burn, "iterations discarded before the verdict")->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed, "random seed")->capture_default_str();
  demo_cmd->add_option("--out", demo.out, "trajectory CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      fit.sampler.threads = threads;
      return cmd_fit(fit, out, err);
    }
    if (predict_cmd->parsed()) return cmd_predict(predict, out, err);
    if (loo_cmd->parsed()) return cmd_loo(loo, out, err);
    if (sim_cmd->parsed()) {
      sim.config.sampler.threads = threads;
      return cmd_simulate(sim, out, err);
    }
    if (demo_cmd->parsed()) return cmd_demo(demo, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const RankDeficientError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const SamplerError& e) {
    err << "sampler failure: " << e.what() << '\n';
    return kSamplerFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace modalreg::cli
