#include "modalreg_cli/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "modalreg/distributions.hpp"
#include "modalreg/stats.hpp"
#include "modalreg_cli/csv.hpp"

namespace modalreg::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void value(double v) {
    if (v == 0.0) v = 0.0;  // -0 and +0 hash alike
    bytes(&v, sizeof v);
  }
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string data_fingerprint(const Dataset& data) {
  Fnv1a f;
  for (const auto& name : data.column_names) f.bytes(name.c_str(), name.size() + 1);
  const std::uint64_t dims[2] = {data.n(), data.p()};
  f.bytes(dims, sizeof dims);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) f.value(data.X(i, j));
  }
  for (Eigen::Index i = 0; i < data.y.size(); ++i) f.value(data.y(i));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

json to_json(const FitSpec& spec) {
  json priors = json::object();
  for (const auto& [name, prior] : spec.model.priors) priors[name] = to_string(prior);
  return {
      {"family", to_string(spec.model.family)},
      {"priors", priors},
      {"response", spec.response},
      {"covariates", spec.covariates},
      {"intercept", spec.intercept},
      {"columns", spec.columns},
      {"seed", spec.sampler.seed},
      {"sampler",
       {{"chains", spec.sampler.chains},
        {"warmup", spec.sampler.warmup},
        {"samples", spec.sampler.samples},
        {"target_accept", spec.sampler.target_accept},
        {"max_treedepth", spec.sampler.max_treedepth},
        {"init_radius", spec.sampler.init_radius}}},
      {"data_fingerprint", spec.data_fingerprint},
      {"data_rows", spec.data_rows},
  };
}

FitSpec fit_spec_from_json(const json& j) {
  try {
    FitSpec s;
    s.model.family = parse_family(j.at("family").get<std::string>());
    for (const auto& [name, text] : j.at("priors").items()) {
      s.model.priors[name] = parse_prior(text.get<std::string>());
    }
    s.response = j.at("response").get<std::string>();
    s.covariates = j.at("covariates").get<std::vector<std::string>>();
    s.intercept = j.at("intercept").get<bool>();
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.sampler.seed = j.at("seed").get<std::uint64_t>();
    const json& c = j.at("sampler");
    s.sampler.chains = c.at("chains").get<int>();
    s.sampler.warmup = c.at("warmup").get<int>();
    s.sampler.samples = c.at("samples").get<int>();
    s.sampler.target_accept = c.at("target_accept").get<double>();
    s.sampler.max_treedepth = c.at("max_treedepth").get<int>();
    s.sampler.init_radius = c.at("init_radius").get<double>();
    s.data_fingerprint = j.at("data_fingerprint").get<std::string>();
    s.data_rows = j.at("data_rows").get<std::size_t>();
    s.model.validate();
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("spec.json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("spec.json: ") + e.what());
  }
}

json to_json(const LooResult& loo) {
  json pointwise = json::array(), k = json::array();
  for (double v : loo.pointwise) pointwise.push_back(number_or_null(v));
  for (double v : loo.pareto_k) k.push_back(number_or_null(v));
  return {{"elpd", number_or_null(loo.elpd)},
          {"se", number_or_null(loo.se)},
          {"pointwise", pointwise},
          {"pareto_k", k}};
}

LooResult loo_from_json(const json& j) {
  try {
    LooResult r;
    r.elpd = number_from(j.at("elpd"));
    r.se = number_from(j.at("se"));
    for (const auto& v : j.at("pointwise")) r.pointwise.push_back(number_from(v));
    for (const auto& v : j.at("pareto_k")) r.pareto_k.push_back(number_from(v));
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("loo.json: ") + e.what());
  }
}

void write_draws_csv(const PosteriorDraws& draws, const std::string& path) {
  auto out = open_out(path);
  out << "chain,iteration";
  for (const auto& name : draws.names) out << ',' << csv_escape(name);
  out << '\n';
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t s = 0; s < draws.samples; ++s) {
      out << c + 1 << ',' << s + 1;
      for (std::size_t j = 0; j < draws.dim; ++j) out << ',' << format_double(draws.value(c, s, j));
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

PosteriorDraws read_draws_csv(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  if (t.header.size() < 3 || t.header[0] != "chain" || t.header[1] != "iteration") {
    throw DataError(path + ": expected columns chain,iteration,<parameters>");
  }
  PosteriorDraws d;
  d.names.assign(t.header.begin() + 2, t.header.end());
  d.dim = d.names.size();
  std::size_t chain = 0;
  std::size_t iter = 0;
  std::vector<std::size_t> per_chain;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto c = static_cast<std::size_t>(parse_cell(t.rows[r][0], path, r + 1, "chain"));
    const auto s = static_cast<std::size_t>(parse_cell(t.rows[r][1], path, r + 1, "iteration"));
    if (c == chain + 1 && s == 1) {
      if (chain > 0) per_chain.push_back(iter);
      chain = c;
      iter = 1;
    } else if (c == chain && s == iter + 1) {
      iter = s;
    } else {
      throw DataError(path + ": row " + std::to_string(r + 1) + " is out of chain/iteration order");
    }
    for (std::size_t j = 0; j < d.dim; ++j) d.values.push_back(parse_cell(t.rows[r][j + 2], path, r + 1, d.names[j]));
  }
  if (chain == 0) throw DataError(path + ": no draws");
  per_chain.push_back(iter);
  for (std::size_t n : per_chain) {
    if (n != per_chain.front()) throw DataError(path + ": chains have different lengths");
  }
  d.chains = chain;
  d.samples = per_chain.front();
  return d;
}

void write_density_grid(const PosteriorDraws& draws, const FitSpec& spec, const Dataset& data,
                        const std::string& path, int points) {
  const auto shape_names = shape_parameter_names(spec.model.family);
  std::vector<double> shape;
  for (const auto& name : shape_names) shape.push_back(mean(draws.pooled(draws.index_of(name))));
  Eigen::VectorXd beta(static_cast<Eigen::Index>(data.p()));
  for (std::size_t j = 0; j < data.p(); ++j) {
    beta(static_cast<Eigen::Index>(j)) = mean(draws.pooled(j));
  }
  const Eigen::VectorXd resid = data.y - data.X * beta;
  const double lo = resid.minCoeff(), hi = resid.maxCoeff();
  const double pad = 0.1 * std::max(hi - lo, 1.0);
  const LikelihoodParams params = make_likelihood_params(spec.model.family, shape, 0.0);
  auto out = open_out(path);
  out << "residual,density\n";
  for (int k = 0; k < points; ++k) {
    const double r = lo - pad + (hi - lo + 2.0 * pad) * k / (points - 1);
    out << format_double(r) << ',' << format_double(std::exp(log_pdf(params, r))) << '\n';
  }
}

void write_json_file(const json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_artifact(const FitArtifact& a, const SummaryTable& summary, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path p(dir);
  write_draws_csv(a.draws, (p / "draws.csv").string());
  {
    auto out = open_out((p / "summary.csv").string());
    summary.write_csv(out);
  }
  write_json_file(to_json(a.spec), (p / "spec.json").string());
  write_json_file(to_json(a.loo), (p / "loo.json").string());
}

FitArtifact read_artifact(const std::string& dir) {
  const std::filesystem::path p(dir);
  FitArtifact a;
  a.spec = fit_spec_from_json(read_json_file((p / "spec.json").string()));
  a.draws = read_draws_csv((p / "draws.csv").string());
  a.draws.seed = a.spec.sampler.seed;
  a.loo = loo_from_json(read_json_file((p / "loo.json").string()));
  return a;
}

}  // namespace modalreg::cli
