#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "saomre/effects.hpp"
#include "saomre/network.hpp"

namespace saomre {

/// One network-level statistic computed from (start, end) networks.
///   Hamming      number of tie variables that differ between start and end
///   Total        sum over actors of one effect
///   Dispersion   sum over the listed effects of sum_i (r_ih - mean_h)^2
///   Codispersion sum_i (r_i1 - mean_1)(r_i2 - mean_2) for two effects
struct StatisticDef {
  enum class Kind { Hamming, Total, Dispersion, Codispersion };

  Kind kind = Kind::Hamming;
  std::vector<EffectDef> effects;

  static StatisticDef hamming() { return {Kind::Hamming, {}}; }
  static StatisticDef total(EffectDef e) { return {Kind::Total, {std::move(e)}}; }
  static StatisticDef dispersion(std::vector<EffectDef> e) { return {Kind::Dispersion, std::move(e)}; }
  static StatisticDef codispersion(EffectDef a, EffectDef b) {
    return {Kind::Codispersion, {std::move(a), std::move(b)}};
  }

  std::string label() const;
  friend bool operator==(const StatisticDef&, const StatisticDef&) = default;
};

/// The statistics paired one-to-one with the parameters of `spec`:
/// Hamming distance (rate), fixed-effect totals, dispersion statistics.
std::vector<StatisticDef> estimation_statistics(const ModelSpec& spec);

/// Dispersion statistics the variance model of `spec` would use for its random effects.
std::vector<StatisticDef> dispersion_statistic_defs(const ModelSpec& spec);

Eigen::VectorXd evaluate_statistics(const std::vector<StatisticDef>& defs, const Network& start,
                                    const Network& end, const CovariateSet& cov);

/// Proportion of actors with out-degree 0..max_degree, normalized to sum to one over
/// that range (all zeros if no actor falls in the range).
Eigen::VectorXd out_degree_distribution(const Network& x, int max_degree);

}  // namespace saomre
