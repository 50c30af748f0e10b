#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "saomre/config.hpp"
#include "saomre/estimator.hpp"
#include "saomre/inference.hpp"

namespace saomre {

/// Estimation plus the post-processing every subcommand shares.
struct ModelFit {
  ModelSpec spec;
  ParameterPoint start;
  FullEstimate estimate;
  std::optional<CovarianceReport> covariance;     // variance parameterization
  std::optional<CovarianceReport> covariance_sd;  // standard-deviation parameterization
  std::optional<std::string> collinearity;        // set when D_hat or C is near-singular
};

/// Start values: the configured start, else for random-effects models the Phase-2
/// estimate of the model without random effects with variances at sigma_min, else
/// default_start().
ParameterPoint starting_point(const ModelSpec& spec, const PanelData& panel, const RunConfig& cfg,
                              std::uint64_t seed);

ModelFit estimate_model(const ModelSpec& spec, const PanelData& panel, const RunConfig& cfg,
                        const Phase3Options& phase3, std::uint64_t seed);

/// Runs `subcommand` (simulate | estimate | test | gof | psc), writes report.json,
/// table.txt and (for estimate) chain.csv under cfg.output_dir, and returns the exit code.
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log);

}  // namespace saomre
