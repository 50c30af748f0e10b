#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saomre/effects.hpp"
#include "saomre/error.hpp"
#include "saomre/network.hpp"
#include "saomre/parallel.hpp"
#include "saomre/simulation.hpp"
#include "saomre/statistics.hpp"

namespace saomre {

struct Phase2Schedule {
  std::vector<int> subphase_lengths{100, 100, 200, 1700};
  std::vector<int> tail_lengths{20, 40, 80, 1500};
  double initial_gain_theta = 0.2;
  /// Gain for the variance parameters in subphase 1; auto-scaled when unset.
  std::optional<double> initial_gain_sigma;
  double gain_reduction = 0.5;
  double sigma_min = 1e-4;
  /// Weight of the diagonal when blending D0 before inversion (0 = full matrix).
  double diagonalize = 0.2;
  /// A chain component beyond this magnitude counts as divergence.
  double divergence_bound = 50.0;

  void validate() const;
  int total_iterations() const;
};

struct Phase1Result {
  Eigen::MatrixXd D0;       // (1+p) x (1+p) block for (rate, fixed)
  Eigen::MatrixXd D0_inv;   // inverse used for the Robbins-Monro steps
  bool ridged = false;
  double condition_number = 0.0;
  /// Suggested subphase-1 gain for the variance parameters (0 when q = 0).
  double sigma_gain = 0.0;
  int replicates = 0;
};

/// Derivative of the expected (rate, fixed) statistics at pp0 estimated with the
/// score-product estimator over n1 replicates, blended toward its diagonal by
/// `diagonalize` and inverted. A ridge of 0.05 * diag is added when the condition
/// number exceeds 1e8.
Phase1Result phase1_precondition(const ModelSpec& spec, const PanelData& panel,
                                 const ParameterPoint& pp0, int n1, std::uint64_t seed,
                                 double diagonalize = 0.2, double initial_gain_theta = 0.2,
                                 Execution mode = Execution::Parallel);

struct ChainRow {
  int subphase = 0;
  double gain_theta = 0.0;
  double gain_sigma = 0.0;
  Eigen::VectorXd theta;      // parameter after the update
  Eigen::VectorXd deviation;  // simulated minus observed statistics at the pre-update point
};

/// Divergence of the Phase-2 chain; carries the trace up to the failing update.
class ChainDivergence : public DivergenceError {
 public:
  ChainDivergence(const std::string& what, std::vector<ChainRow> chain,
                  std::vector<std::string> labels)
      : DivergenceError(what), chain(std::move(chain)), labels(std::move(labels)) {}
  std::vector<ChainRow> chain;
  std::vector<std::string> labels;
};

struct EstimationResult {
  ParameterPoint theta_hat;
  std::vector<ChainRow> chain;
  bool converged = false;
  Eigen::VectorXd t_ratios;
  double max_convergence_ratio = 0.0;
  std::vector<std::string> parameter_labels;
};

/// Symmetric eigen-projection: eigenvalues below `floor` are raised to `floor`.
Eigen::MatrixXd project_pd(const Eigen::MatrixXd& m, double floor);

/// Robbins-Monro subphases. Rate and fixed parameters move by
/// gain * D0_inv * (simulated - observed); variance parameters move by
/// gain_sigma * (simulated - observed) followed by the sigma_min floor or PD projection.
EstimationResult phase2(const ModelSpec& spec, const PanelData& panel, const ParameterPoint& pp0,
                        const Phase2Schedule& schedule, const Phase1Result& phase1,
                        std::uint64_t seed);

/// Extra archive content requested for Phase 3.
struct Phase3Options {
  /// Statistics simulated in addition to the estimation statistics (no parameter
  /// moves them): dispersion rows for score tests, tested effects, a shared set for psc.
  std::vector<StatisticDef> extra_statistics;
  /// Out-degree distribution auxiliary statistic; disabled when negative.
  int aux_max_degree = 20;
  Execution execution = Execution::Parallel;
  /// Maximum tolerated fraction of degenerate replicates.
  double max_abort_fraction = 0.01;
};

struct MonteCarloSummaries {
  std::vector<StatisticDef> statistics;  // estimation statistics then extras
  std::vector<std::string> parameter_labels;
  std::size_t n_estimation = 0;          // leading rows tied to parameters
  Eigen::VectorXd observed;              // observed value of every statistic
  Eigen::MatrixXd rows;                  // T x G simulated statistics
  Eigen::MatrixXd scores;                // T x P score contributions
  Eigen::MatrixXd aux;                   // T x A auxiliary statistic (may be empty)
  Eigen::VectorXd observed_aux;
  Eigen::VectorXd m_bar;                 // G
  Eigen::MatrixXd V_hat;                 // G x G, 1/T normalization
  Eigen::MatrixXd D_hat;                 // G x P, (g_t - g_obs) l_t' averaged
  int T = 0;
  int aborted = 0;
  ParameterPoint theta;
  VarianceModel variance_model = VarianceModel::Scalar;
  std::size_t p = 0;
  std::size_t q = 0;

  /// Index of a statistic by label, or -1.
  int find(const std::string& label) const;
};

MonteCarloSummaries phase3(const ModelSpec& spec, const PanelData& panel,
                           const ParameterPoint& theta_hat, int T, std::uint64_t seed,
                           const Phase3Options& options = {});

/// Recomputes m_bar, V_hat and D_hat from the archived rows.
void summarize(MonteCarloSummaries& s);

struct ConvergenceReport {
  Eigen::VectorXd t_ratios;
  double max_convergence_ratio = 0.0;  // sqrt(d' V^-1 d) over the estimation statistics
  bool converged = false;
};

/// t_k = (m_bar_k - target_k) / sd_k over the estimation statistics; converged when
/// every |t_k| < 0.1 and the overall ratio is < 0.25.
ConvergenceReport convergence_check(const MonteCarloSummaries& s);

struct EstimateOptions {
  Phase2Schedule schedule;
  int phase1_replicates = 200;
  int phase3_replicates = 5000;
  Phase3Options phase3;
  std::optional<Phase1Result> phase1;  // reuse a preconditioner instead of running Phase 1
};

struct FullEstimate {
  Phase1Result phase1;
  EstimationResult estimation;
  MonteCarloSummaries summaries;
};

/// Phase 1, Phase 2 and Phase 3 in sequence, then the convergence check.
FullEstimate estimate(const ModelSpec& spec, const PanelData& panel, const ParameterPoint& start,
                      const EstimateOptions& options, std::uint64_t seed);

/// Starting values: rate from the observed Hamming distance, out-degree from the
/// wave-2 density, everything else zero, variances at sigma_min.
ParameterPoint default_start(const ModelSpec& spec, const PanelData& panel, double sigma_min);

}  // namespace saomre
