#pragma once

#include <Eigen/Dense>
#include <vector>

#include "saomre/bitnet.hpp"
#include "saomre/effects.hpp"
#include "saomre/network.hpp"
#include "saomre/rng.hpp"
#include "saomre/statistics.hpp"

namespace saomre {

/// One point of the parameter space: unconditional basic rate, fixed
/// coefficients, and the q x q covariance of the random coefficients.
struct ParameterPoint {
  double lambda = 1.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd sigma;

  /// Flat layout shared with the statistics: (lambda, beta, variance parameters).
  /// Variance parameters are sigma^2 (scalar), the diagonal, or the upper triangle.
  Eigen::VectorXd to_vector(const ModelSpec& spec) const;
  static ParameterPoint from_vector(const ModelSpec& spec, const Eigen::VectorXd& theta);

  /// Variance parameters only, in the flat layout.
  Eigen::VectorXd variance_params(const ModelSpec& spec) const;
  void validate(const ModelSpec& spec) const;
};

/// u holds the standard-normal draws, b = u * Sigma^{1/2} the actor coefficients (n x q).
struct RandomEffectsDraw {
  Eigen::MatrixXd u;
  Eigen::MatrixXd b;
};

struct ScoreContribution {
  double l_lambda = 0.0;
  Eigen::VectorXd l_beta;
  Eigen::MatrixXd l_b;       // n x q
  Eigen::VectorXd l_sigma;   // one entry per variance parameter; empty for unrestricted

  /// (l_lambda, l_beta, l_sigma)
  Eigen::VectorXd as_vector() const;
};

struct StepRecord {
  std::size_t actor;
  std::size_t target;  // == actor for the no-change candidate
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SimOutcome {
  Network end_network;
  Eigen::VectorXd g_hat;     // estimation statistics of the end network
  ScoreContribution scores;
  RandomEffectsDraw draw;
  long n_ministeps = 0;
  std::vector<StepRecord> trajectory;  // filled only on request
};

RandomEffectsDraw draw_random_effects(VarianceModel model, const Eigen::MatrixXd& sigma,
                                      std::size_t n_actors, Engine& rng);

/// Derivative of the score contraction: l_sigma from l_b and b.
Eigen::VectorXd contract_sigma_scores(VarianceModel model, const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& l_b, const Eigen::MatrixXd& b);

/// Multinomial choice probabilities over adjacency_candidates(x, i), computed from
/// whole-statistic evaluation functions.
Eigen::VectorXd choice_probabilities(const Network& x, std::size_t i, const ParameterPoint& pp,
                                     const Eigen::VectorXd& b_i, const ModelSpec& spec,
                                     const CovariateSet& cov);

struct MinistepResult {
  Network network;
  ScoreContribution increment;  // l_lambda = 0, l_sigma empty
  StepRecord step;
};

MinistepResult ministep(const Network& x, const ParameterPoint& pp, const RandomEffectsDraw& draw,
                        const ModelSpec& spec, const CovariateSet& cov, Engine& rng);

/// Compiled model used by the estimation phases. Holds no per-run state and
/// may be shared across threads.
class Simulator {
 public:
  Simulator(ModelSpec spec, CovariateSet covariates);

  const ModelSpec& spec() const { return spec_; }
  const CovariateSet& covariates() const { return cov_; }
  const std::vector<StatisticDef>& statistics() const { return stats_; }

  /// Draws random effects, then simulates one unit-length period from `start`.
  SimOutcome simulate(const Network& start, const ParameterPoint& pp, Engine& rng,
                      bool record_trajectory = false) const;

  /// Same as simulate() with the random effects supplied by the caller.
  SimOutcome simulate_with_draw(const Network& start, const ParameterPoint& pp,
                                RandomEffectsDraw draw, Engine& rng,
                                bool record_trajectory = false) const;

  /// Per-run scratch buffers for the ministep kernel.
  struct Workspace {
    Eigen::MatrixXd changes;  // n x (p + q): fixed-effect columns, then random-effect columns
    Eigen::VectorXd utility;
    Eigen::VectorXd probs;
  };
  Workspace make_workspace(std::size_t n_actors) const;

  /// Kernel probabilities for focal actor i, left in ws.probs indexed by target
  /// actor j; slot i is the no-change candidate.
  void kernel_probabilities(const BitNetwork& x, std::size_t i, const ParameterPoint& pp,
                            const Eigen::Ref<const Eigen::RowVectorXd>& b_i, Workspace& ws) const;

  /// One ministep on `x` in place for a uniformly drawn focal actor; adds the
  /// score increments to l_beta and to row i of l_b.
  StepRecord step(BitNetwork& x, const ParameterPoint& pp, const Eigen::MatrixXd& b, Engine& rng,
                  Workspace& ws, Eigen::VectorXd& l_beta, Eigen::MatrixXd& l_b) const;

  /// Upper bound on ministeps per period; exceeding it is treated as degeneracy.
  static double ministep_cap(std::size_t n_actors, double lambda);

 private:
  ModelSpec spec_;
  CovariateSet cov_;
  std::vector<StatisticDef> stats_;
};

/// Free-function form of Simulator::simulate.
SimOutcome simulate_period(const Network& x1, const ParameterPoint& pp, const ModelSpec& spec,
                           const CovariateSet& cov, Engine& rng);

}  // namespace saomre
