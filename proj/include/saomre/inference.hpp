#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "saomre/estimator.hpp"

namespace saomre {

struct CovarianceReport {
  std::vector<std::string> labels;
  Eigen::MatrixXd C;
  Eigen::VectorXd standard_errors;
  std::string parameterization = "sigma-squared";  // or "sigma"
  double condition_number = 0.0;                    // of D_hat
};

/// C = D^-1 V D^-T over the estimation statistics. Throws CollinearityError when D
/// is singular or its condition number is at least 1e8.
CovarianceReport standard_errors(const MonteCarloSummaries& s);
CovarianceReport standard_errors(const Eigen::MatrixXd& D, const Eigen::MatrixXd& V,
                                 std::vector<std::string> labels = {});

/// Delta method from variances to standard deviations. The last `sigma2.size()`
/// parameters are the variances; J = blockdiag(I, 2 sigma).
CovarianceReport reparametrize_to_sd(const CovarianceReport& report, const Eigen::VectorXd& sigma2);

/// Smallest eigenvalue of the correlation matrix of the estimator.
double estimator_correlation_min_eigenvalue(const Eigen::MatrixXd& C);

struct OrthogonalizedTest {
  std::vector<std::string> tested;  // labels of the tested statistics
  bool one_sided = false;           // scalar z (one-sided) versus z^2
  int df = 1;
  Eigen::MatrixXd gamma;            // k x P
  Eigen::MatrixXd xi;               // k x k
  Eigen::VectorXd y_obs;
  Eigen::VectorXd y_bar;
  double statistic = 0.0;           // z or z^2
  double p_asymptotic = 1.0;
  double p_empirical = 1.0;
  double p_empirical_se = 0.0;      // binomial Monte-Carlo error of p_empirical
  Eigen::VectorXd replicate_statistics;  // z_t or z^2_t
  Eigen::MatrixXd replicate_y;           // T x k orthogonalized statistics
  int T = 0;
};

/// Orthogonalized test of the statistics at `tested_rows` (indices into s.statistics,
/// outside the estimation block) against the parameters of the null model.
OrthogonalizedTest orthogonalized_test(const MonteCarloSummaries& s,
                                       const std::vector<int>& tested_rows, bool one_sided);

/// H0: no overdispersion in `effect` (default out-degree). Needs the dispersion row of
/// that effect in the archive; one-sided.
OrthogonalizedTest score_test_overdispersion(const MonteCarloSummaries& s,
                                             const EffectDef& effect = EffectDef{});

/// H0: the parameters of the listed statistics are zero. z^2 with a chi-squared reference.
OrthogonalizedTest composite_score_test(const MonteCarloSummaries& s,
                                        const std::vector<std::string>& tested_labels);

enum class Penalty { AIC, BIC };
enum class DfMode { N, NNMinus1 };

Penalty parse_penalty(const std::string& s);
DfMode parse_df_mode(const std::string& s);

struct PscEntry {
  std::string name;
  std::size_t n_params = 0;
  double mean_distance = 0.0;  // mean Mahalanobis distance of simulated to observed g0
  double fit = 0.0;            // df * mean_distance
  double penalty = 0.0;        // (dim g0 - n_params) * pen
  double psc = 0.0;            // fit - penalty
  double psc_centered = 0.0;   // psc - df * dim g0
  bool ridged = false;
};

struct PscReport {
  std::vector<std::string> shared_statistics;
  double df = 0.0;
  double pen = 0.0;
  Penalty penalty = Penalty::AIC;
  std::vector<PscEntry> models;
  std::vector<std::string> warnings;
};

struct PscInput {
  std::string name;
  std::size_t n_params = 0;
  const MonteCarloSummaries* summaries = nullptr;
};

/// Every archive must contain all `shared` statistics (matched by label).
PscReport psc(const std::vector<PscInput>& models, const std::vector<StatisticDef>& shared,
              std::size_t n_actors, Penalty penalty, DfMode df_mode);

struct GofReport {
  Eigen::VectorXd observed;
  Eigen::VectorXd mean;
  Eigen::MatrixXd omega;  // covariance plus ridge on the diagonal
  double ridge = 0.2;
  double distance_obs = 0.0;
  Eigen::VectorXd replicate_distances;
  double p_value = 1.0;
  double p_value_se = 0.0;
  int T = 0;
};

GofReport gof(const Eigen::MatrixXd& aux, const Eigen::VectorXd& observed, double ridge = 0.2);
GofReport gof(const MonteCarloSummaries& s, double ridge = 0.2);

}  // namespace saomre
