#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "saomre/estimator.hpp"
#include "saomre/inference.hpp"

namespace saomre {

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);

nlohmann::json summaries_json(const MonteCarloSummaries& s);
nlohmann::json covariance_json(const CovarianceReport& c);
nlohmann::json test_json(const OrthogonalizedTest& t);
nlohmann::json psc_json(const PscReport& r);
nlohmann::json gof_json(const GofReport& g);
nlohmann::json chain_summary_json(const EstimationResult& e, const Phase2Schedule& schedule);

/// Two-column layout: estimate with standard error in parentheses, then the
/// convergence t-ratio of the matching statistic.
std::string parameter_table(const std::vector<std::string>& labels, const Eigen::VectorXd& estimates,
                            const std::optional<Eigen::VectorXd>& standard_errors,
                            const std::optional<Eigen::VectorXd>& t_ratios);

/// One row per Phase-2 iteration: subphase, iteration, gains, parameters, deviations.
void write_chain_csv(std::ostream& out, const std::vector<std::string>& parameter_labels,
                     const std::vector<std::string>& statistic_labels,
                     const std::vector<ChainRow>& chain);

}  // namespace saomre
