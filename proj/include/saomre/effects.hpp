#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "saomre/bitnet.hpp"
#include "saomre/network.hpp"

namespace saomre {

enum class EffectKind {
  OutDegree,
  Reciprocity,
  TransitiveTriplets,
  OutDegreeActivity,
  CovariateAlter,
  CovariateEgo,
  CovariateSimilarity,
};

struct EffectDef {
  EffectKind kind = EffectKind::OutDegree;
  std::string covariate;  // only for the covariate effects

  bool uses_covariate() const;
  /// Short identifier, e.g. "recip" or "egoX(status)"; also accepted by parse_effect.
  std::string name() const;
  /// Human-readable label for report tables.
  std::string label() const;

  friend bool operator==(const EffectDef&, const EffectDef&) = default;
};

EffectDef parse_effect(const std::string& name, const std::string& covariate = {});

enum class VarianceModel { Scalar, Diagonal, Unrestricted };

std::string to_string(VarianceModel v);
VarianceModel parse_variance_model(const std::string& s);

/// Fixed part, random part and the structure of the random-effects covariance.
/// The rate is a single unconditional basic rate; it is parameter 0 everywhere.
struct ModelSpec {
  std::vector<EffectDef> fixed_effects;
  std::vector<EffectDef> random_effects;
  VarianceModel variance_model = VarianceModel::Scalar;

  std::size_t p() const { return fixed_effects.size(); }
  std::size_t q() const { return random_effects.size(); }
  /// Number of free variance parameters (q* in the docs): 1, q, or q(q+1)/2.
  std::size_t n_variance_params() const;
  /// Length of the parameter vector and of the estimation-statistic vector.
  std::size_t n_params() const { return 1 + p() + n_variance_params(); }

  /// Throws ValidationError on an inconsistent declaration.
  void validate(const CovariateSet& covariates) const;

  /// Labels of the parameter vector: rate, fixed effects, variance parameters.
  std::vector<std::string> parameter_labels() const;
  /// Labels of the estimation statistics, parallel to parameter_labels().
  std::vector<std::string> statistic_labels() const;
};

/// s_ik(x) evaluated from its defining sum.
double effect_value(const EffectDef& e, const Network& x, std::size_t i, const CovariateSet& cov);

/// Value of the effect for every actor, computed on the working representation.
void actor_statistics(const EffectDef& e, const BitNetwork& x, const CovariateSet& cov,
                      std::span<double> out);

/// Change statistic s_i(x with x_ij toggled) - s_i(x) for every j; entry i (the
/// no-change candidate) is zero.
void change_statistics(const EffectDef& e, const BitNetwork& x, std::size_t i,
                       const CovariateSet& cov, std::span<double> out);

/// f_i(x) = beta' s_i(x) + b_i' r_i(x)
double evaluation_function(const Network& x, std::size_t i, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& b_i, const ModelSpec& spec,
                           const CovariateSet& cov);

/// Sum over actors of (r_i - r_bar)(r_i - r_bar)' for the given effects.
Eigen::MatrixXd dispersion_matrix(const std::vector<EffectDef>& effects, const Network& x,
                                  const CovariateSet& cov);

/// Reduces a dispersion matrix to the statistics that match the variance
/// parameters: trace (scalar), diagonal, or upper triangle row-wise (unrestricted).
Eigen::VectorXd dispersion_statistics(const Eigen::MatrixXd& W, VarianceModel model);

struct TargetStatistics {
  Eigen::VectorXd s;      // length p
  Eigen::MatrixXd W;      // q x q
  int rate_target = 0;    // Hamming distance between the waves

  /// (rate_target, s, dispersion statistics) in parameter order.
  Eigen::VectorXd g(VarianceModel model) const;
};

TargetStatistics target_statistics(const PanelData& panel, const ModelSpec& spec);

}  // namespace saomre
