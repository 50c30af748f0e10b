#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saomre/effects.hpp"
#include "saomre/estimator.hpp"
#include "saomre/inference.hpp"

namespace saomre {

struct ModelDecl {
  std::string name;
  ModelSpec spec;
};

/// Everything a run needs. Paths are resolved against the directory of the config file.
struct RunConfig {
  // data
  std::filesystem::path wave1;
  std::filesystem::path wave2;
  std::map<std::string, std::filesystem::path> covariates;

  // model
  ModelSpec model;

  // algorithm
  Phase2Schedule schedule;
  int phase1_replicates = 200;
  int phase3_replicates = 5000;
  std::optional<Eigen::VectorXd> start;  // flat parameter vector
  bool start_from_null = true;           // random-effects models start at the q=0 estimate
  std::uint64_t seed = 1;
  int workers = 0;                       // 0 = OpenMP default

  // output
  std::filesystem::path output_dir = "out";

  // simulate
  std::optional<Eigen::VectorXd> simulate_parameters;
  int simulate_replicates = 1;

  // test
  std::string test_kind = "overdispersion";  // or "composite"
  EffectDef test_effect;                     // overdispersion in this effect
  std::vector<EffectDef> tested_effects;     // composite: fixed effects set to zero under H0

  // gof
  int aux_max_degree = 20;
  double gof_ridge = 0.2;
  std::vector<double> gof_ridge_sweep;

  // psc
  Penalty penalty = Penalty::AIC;
  DfMode df_mode = DfMode::N;
  std::vector<ModelDecl> psc_models;

  /// Names of the covariates declared in the data section.
  CovariateSet covariate_names() const;
};

ModelSpec parse_model(const nlohmann::json& j);

/// Flat parameter vector from {"rate": r, "fixed": [...], "variance": [...]}.
Eigen::VectorXd parse_parameters(const nlohmann::json& j, const ModelSpec& spec);

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                       bool check_files = true);
RunConfig parse_config(const std::filesystem::path& path);

}  // namespace saomre
