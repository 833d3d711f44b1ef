#ifndef MODALREG_CLI_ARTIFACT_HPP
#define MODALREG_CLI_ARTIFACT_HPP

// A fit directory: draws.csv, summary.csv, spec.json, loo.json and
// optionally density.csv.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "modalreg/dataset.hpp"
#include "modalreg/loo.hpp"
#include "modalreg/model.hpp"
#include "modalreg/posterior.hpp"
#include "modalreg/sampler.hpp"

namespace modalreg::cli {

struct FitSpec {
  ModelSpec model;
  std::string response;
  std::vector<std::string> covariates;
  bool intercept = true;
  std::vector<std::string> columns;  // design column names
  SamplerConfig sampler;
  std::string data_fingerprint;
  std::size_t data_rows = 0;
};

/// FNV-1a (64 bit) over the column names, design and response, as 16 hex digits.
std::string data_fingerprint(const Dataset& data);

nlohmann::json to_json(const FitSpec& spec);
FitSpec fit_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LooResult& loo);
LooResult loo_from_json(const nlohmann::json& j);

void write_draws_csv(const PosteriorDraws& draws, const std::string& path);
/// Chains and draws per chain are recovered from the chain and iteration columns.
PosteriorDraws read_draws_csv(const std::string& path);

/// Residual grid over the observed residual range (padded by 10%) with the
/// fitted error density at posterior-mean shape parameters.
void write_density_grid(const PosteriorDraws& draws, const FitSpec& spec, const Dataset& data,
                        const std::string& path, int points = 401);

struct FitArtifact {
  FitSpec spec;
  PosteriorDraws draws;
  LooResult loo;
};

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

void write_artifact(const FitArtifact& artifact, const SummaryTable& summary, const std::string& dir);
FitArtifact read_artifact(const std::string& dir);

}  // namespace modalreg::cli

#endif  // MODALREG_CLI_ARTIFACT_HPP
