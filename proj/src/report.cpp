#include "saomre/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace saomre {

using nlohmann::json;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v[k]));
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

json summaries_json(const MonteCarloSummaries& s) {
  json j;
  std::vector<std::string> labels;
  for (const auto& d : s.statistics) labels.push_back(d.label());
  j["statistics"] = labels;
  j["n_estimation"] = s.n_estimation;
  j["observed"] = to_json(s.observed);
  j["m_bar"] = to_json(s.m_bar);
  Eigen::VectorXd sd = s.V_hat.diagonal().cwiseMax(0.0).cwiseSqrt();
  j["sd"] = to_json(sd);
  j["V_hat"] = to_json(s.V_hat);
  j["D_hat"] = to_json(s.D_hat);
  j["T"] = s.T;
  j["aborted"] = s.aborted;
  return j;
}

json covariance_json(const CovarianceReport& c) {
  return json{{"parameterization", c.parameterization},
              {"labels", c.labels},
              {"standard_errors", to_json(c.standard_errors)},
              {"C", to_json(c.C)},
              {"condition_number_D", number(c.condition_number)}};
}

json test_json(const OrthogonalizedTest& t) {
  json j{{"tested", t.tested},
         {"statistic_kind", t.one_sided ? "z" : "z^2"},
         {"df", t.df},
         {"y_obs", to_json(t.y_obs)},
         {"y_bar", to_json(t.y_bar)},
         {"gamma", to_json(t.gamma)},
         {"xi", to_json(t.xi)},
         {"p_asymptotic", number(t.p_asymptotic)},
         {"p_empirical", number(t.p_empirical)},
         {"p_empirical_se", number(t.p_empirical_se)},
         {"T", t.T}};
  j[t.one_sided ? "z" : "z2"] = number(t.statistic);
  return j;
}

json psc_json(const PscReport& r) {
  json models = json::array();
  for (const auto& m : r.models)
    models.push_back(json{{"name", m.name},
                          {"n_params", m.n_params},
                          {"mean_distance", number(m.mean_distance)},
                          {"fit", number(m.fit)},
                          {"penalty", number(m.penalty)},
                          {"psc", number(m.psc)},
                          {"psc_centered", number(m.psc_centered)},
                          {"ridged", m.ridged}});
  return json{{"shared_statistics", r.shared_statistics},
              {"df", r.df},
              {"pen", r.pen},
              {"penalty", r.penalty == Penalty::AIC ? "AIC" : "BIC"},
              {"models", models},
              {"warnings", r.warnings}};
}

json gof_json(const GofReport& g) {
  return json{{"observed", to_json(g.observed)},
              {"mean", to_json(g.mean)},
              {"ridge", g.ridge},
              {"distance_obs", number(g.distance_obs)},
              {"p_value", number(g.p_value)},
              {"p_value_se", number(g.p_value_se)},
              {"T", g.T}};
}

json chain_summary_json(const EstimationResult& e, const Phase2Schedule& schedule) {
  json gains = json::array();
  double g = schedule.initial_gain_theta;
  for (std::size_t k = 0; k < schedule.subphase_lengths.size(); ++k, g *= schedule.gain_reduction)
    gains.push_back(g);
  return json{{"iterations", e.chain.size()},
              {"subphase_lengths", schedule.subphase_lengths},
              {"tail_lengths", schedule.tail_lengths},
              {"gains_theta", gains},
              {"initial_gain_sigma", e.chain.empty() ? 0.0 : e.chain.front().gain_sigma}};
}

std::string parameter_table(const std::vector<std::string>& labels, const Eigen::VectorXd& estimates,
                            const std::optional<Eigen::VectorXd>& standard_errors,
                            const std::optional<Eigen::VectorXd>& t_ratios) {
  std::size_t width = 6;
  for (const auto& l : labels) width = std::max(width, l.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %10s %10s %8s\n", static_cast<int>(width), "effect", "estimate",
                "(s.e.)", "t-conv");
  out << line;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const std::string se =
        standard_errors && i < standard_errors->size() ? "(" + fmt("%.3f", (*standard_errors)[i]) + ")" : "";
    const std::string t = t_ratios && i < t_ratios->size() ? fmt("%.3f", (*t_ratios)[i]) : "";
    std::snprintf(line, sizeof line, "%-*s %10.3f %10s %8s\n", static_cast<int>(width), labels[k].c_str(),
                  estimates[i], se.c_str(), t.c_str());
    out << line;
  }
  return out.str();
}

void write_chain_csv(std::ostream& out, const std::vector<std::string>& parameter_labels,
                     const std::vector<std::string>& statistic_labels,
                     const std::vector<ChainRow>& chain) {
  out << "subphase,iteration,gain_theta,gain_sigma";
  for (const auto& l : parameter_labels) out << ',' << csv_field(l);
  for (const auto& l : statistic_labels) out << ',' << csv_field("dev " + l);
  out << '\n';
  char buf[32];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::string(buf);
  };
  for (std::size_t it = 0; it < chain.size(); ++it) {
    const auto& r = chain[it];
    out << r.subphase << ',' << it + 1 << ',' << num(r.gain_theta) << ',' << num(r.gain_sigma);
    for (Eigen::Index k = 0; k < r.theta.size(); ++k) out << ',' << num(r.theta[k]);
    for (Eigen::Index k = 0; k < r.deviation.size(); ++k) out << ',' << num(r.deviation[k]);
    out << '\n';
  }
}

}  // namespace saomre
