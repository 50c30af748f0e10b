// Kapferer tailor-shop replication (criteria 1-5). Needs wave1.txt, wave2.txt and
// status.txt in $SAOMRE_KAPFERER_DIR or data/kapferer/; exits 77 (skip) without them.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "report.hpp"
#include "saomre/error.hpp"
#include "saomre/inference.hpp"
#include "saomre/run.hpp"

using namespace saomre;
namespace fs = std::filesystem;

namespace {

constexpr int kSkip = 77;
constexpr double kSeWidth = 2.0;          // criteria 1-2: estimates within 2 reported SEs
constexpr double kTRatio = 0.1;
constexpr double kSdSeTarget = 0.30, kSdSeTol = 0.02;
constexpr double kOverdispersionMax = 0.01;
constexpr double kCompositeMax = 0.01;
constexpr double kActivityLo = 0.05, kActivityHi = 0.35;
constexpr double kPscTol = 5.0;
constexpr double kNearObservedT = 0.3;    // criterion 5: "near-observed" mean statistics

const EffectDef kOut{EffectKind::OutDegree, {}};
const EffectDef kRecip{EffectKind::Reciprocity, {}};
const EffectDef kTrans{EffectKind::TransitiveTriplets, {}};
const EffectDef kAct{EffectKind::OutDegreeActivity, {}};
const EffectDef kAlter{EffectKind::CovariateAlter, "status"};
const EffectDef kEgo{EffectKind::CovariateEgo, "status"};
const EffectDef kSim{EffectKind::CovariateSimilarity, "status"};

ModelSpec model(std::vector<EffectDef> fixed, bool random) {
  ModelSpec m;
  m.fixed_effects = std::move(fixed);
  if (random) m.random_effects = {kOut};
  return m;
}

fs::path data_dir() {
  if (const char* env = std::getenv("SAOMRE_KAPFERER_DIR")) return env;
  return fs::path(SAOMRE_SOURCE_DIR) / "data" / "kapferer";
}

struct Row {
  double est, se;
};

}  // namespace

int main() {
  CriterionLog log;
  const fs::path dir = data_dir();
  const std::vector<fs::path> files{dir / "wave1.txt", dir / "wave2.txt", dir / "status.txt"};
  for (const auto& f : files)
    if (!fs::exists(f)) {
      for (const char* id : {"1", "2", "3", "4", "5"})
        log.skip(id, "Kapferer replication", "data not found (" + f.string() + ")");
      return kSkip;
    }
  const PanelData panel = load_panel(files[0], files[1], {{"status", files[2]}});

  const std::vector<std::pair<std::string, ModelSpec>> models{
      {"standard", model({kOut, kRecip, kTrans, kAlter, kEgo, kSim}, false)},
      {"no-transitivity", model({kOut, kRecip, kAlter, kEgo, kSim}, false)},
      {"no-status", model({kOut, kRecip, kTrans}, false)},
      {"full", model({kOut, kRecip, kTrans, kAct, kAlter, kEgo, kSim}, false)},
      {"standard+random", model({kOut, kRecip, kTrans, kAlter, kEgo, kSim}, true)},
      {"no-transitivity+random", model({kOut, kRecip, kAlter, kEgo, kSim}, true)},
      {"no-status+random", model({kOut, kRecip, kTrans}, true)},
  };

  // every archive carries the union of the estimation statistics plus the tested rows
  std::vector<StatisticDef> shared;
  for (const auto& [name, m] : models)
    for (const auto& d : estimation_statistics(m))
      if (std::find(shared.begin(), shared.end(), d) == shared.end()) shared.push_back(d);

  RunConfig cfg;  // default schedule, 200 Phase-1 and 5000 Phase-3 replicates
  std::map<std::string, ModelFit> fits;
  for (std::size_t k = 0; k < models.size(); ++k) {
    Phase3Options p3;
    p3.extra_statistics = shared;
    try {
      fits.emplace(models[k].first, estimate_model(models[k].second, panel, cfg, p3, splitmix64(42 + k)));
    } catch (const Error& e) {
      std::printf("  %s failed: %s\n", models[k].first.c_str(), e.what());
    }
  }
  auto have = [&](const std::string& n) { return fits.count(n) > 0; };

  // 1. standard model without random effects
  if (have("standard")) {
    const ModelFit& f = fits.at("standard");
    const std::vector<Row> table{{21.39, 4.60}, {-2.66, 0.23}, {3.26, 0.40}, {0.19, 0.05},
                                 {-1.15, 0.24}, {1.45, 0.28},  {0.30, 0.13}};
    const Eigen::VectorXd est = f.estimate.estimation.theta_hat.to_vector(f.spec);
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < table.size(); ++k) {
      const double z = std::abs(est[static_cast<Eigen::Index>(k)] - table[k].est) / table[k].se;
      ok = ok && z <= kSeWidth;
      detail += f.estimate.estimation.parameter_labels[k] + fmt(" %.2f", est[static_cast<Eigen::Index>(k)]) +
                fmt(" (%.1f SE); ", z);
    }
    const double tmax = f.estimate.estimation.t_ratios.cwiseAbs().maxCoeff();
    ok = ok && tmax < kTRatio;
    log.check(ok, "1", "standard model estimates within 2 SEs, t-ratios < 0.1", detail + fmt("max |t| %.3f", tmax));
  } else {
    log.fail("1", "standard model", "estimation failed");
  }

  // 2. standard model with random out-degree
  if (have("standard+random") && have("standard")) {
    const ModelFit& f = fits.at("standard+random");
    const double s2 = f.estimate.estimation.theta_hat.sigma(0, 0);
    const double rate = f.estimate.estimation.theta_hat.lambda;
    const double rate0 = fits.at("standard").estimate.estimation.theta_hat.lambda;
    // delta method on the reported variance estimate and SE
    CovarianceReport reported;
    reported.C = Eigen::MatrixXd::Constant(1, 1, 0.43 * 0.43);
    const double sd_se = reparametrize_to_sd(reported, Eigen::VectorXd::Constant(1, 0.52)).standard_errors[0];
    std::string own = "no SE";
    if (f.covariance_sd) own = fmt("own sigma %.3f (SE %.3f)", std::sqrt(s2), f.covariance_sd->standard_errors.tail(1)[0]);
    const bool ok = std::abs(s2 - 0.52) <= kSeWidth * 0.43 && std::abs(sd_se - kSdSeTarget) <= kSdSeTol && rate < rate0;
    log.check(ok, "2", "random out-degree variance, delta-method SE, lower rate",
              fmt("sigma^2 %.3f (0.52 +- 0.86); ", s2) + fmt("delta SE %.3f (0.30 +- 0.02); ", sd_se) +
                  fmt("rate %.2f < %.2f; ", rate, rate0) + own);
  } else {
    log.fail("2", "random out-degree model", "estimation failed");
  }

  // 3. score-type tests
  try {
    const double a1 = score_test_overdispersion(fits.at("standard").estimate.summaries).p_empirical;
    const double a2 = composite_score_test(fits.at("no-status+random").estimate.summaries,
                                           {StatisticDef::total(kAlter).label(), StatisticDef::total(kEgo).label(),
                                            StatisticDef::total(kSim).label()})
                          .p_empirical;
    const double a3 =
        composite_score_test(fits.at("standard+random").estimate.summaries, {StatisticDef::total(kAct).label()})
            .p_empirical;
    const bool ok = a1 <= kOverdispersionMax && a2 <= kCompositeMax && a3 >= kActivityLo && a3 <= kActivityHi;
    log.check(ok, "3", "overdispersion, status and activity tests",
              fmt("overdispersion %.4f (<= 0.01); ", a1) + fmt("status %.4f (<= 0.01); ", a2) +
                  fmt("activity %.3f in [0.05, 0.35]", a3));
  } catch (const std::exception& e) {
    log.fail("3", "score-type tests", e.what());
  }

  // 4. parameter selection criterion ranking
  try {
    std::vector<PscInput> in;
    for (const auto& [name, m] : models)
      if (have(name)) in.push_back({name, m.n_params(), &fits.at(name).estimate.summaries});
    const PscReport r = psc(in, shared, panel.n_actors(), Penalty::AIC, DfMode::N);
    std::map<std::string, double> v;
    for (const auto& e : r.models) v[e.name] = e.psc_centered;
    std::vector<std::pair<double, std::string>> order;
    for (const auto& [n, x] : v) order.emplace_back(x, n);
    std::sort(order.begin(), order.end());
    std::string detail;
    for (const auto& [x, n] : order) detail += n + fmt(" %.1f; ", x);
    const bool complete = v.size() == models.size();
    bool ok = complete && order.size() >= 2;
    if (ok) {
      const std::set<std::string> top{order[0].second, order[1].second};
      ok = top == std::set<std::string>{"full", "standard+random"} &&
           std::abs(v["full"] - 85.7) <= kPscTol && std::abs(v["standard+random"] - 86.7) <= kPscTol &&
           v["standard+random"] < v["standard"] && v["no-transitivity+random"] < v["no-transitivity"] &&
           v["no-status+random"] < v["no-status"];
    }
    log.check(ok, "4", "psc_AIC ranking of the seven models", detail);
  } catch (const std::exception& e) {
    log.fail("4", "psc", e.what());
  }

  // 5. full model with random out-degree does not converge
  {
    RunConfig c;
    c.wave1 = files[0];
    c.wave2 = files[1];
    c.covariates = {{"status", files[2]}};
    c.model = model({kOut, kRecip, kTrans, kAct, kAlter, kEgo, kSim}, true);
    c.output_dir = fs::temp_directory_path() / "saomre_kapferer_full_random";
    std::ostringstream sink;
    const int code = run("estimate", c, sink);
    std::string detail = "exit code " + std::to_string(code);
    bool near = true;
    try {
      std::ifstream in(c.output_dir / "report.json");
      const auto rep = nlohmann::json::parse(in);
      if (rep.contains("fit")) {
        double tmax = 0;
        for (const auto& t : rep["fit"]["convergence"]["t_ratios"]) tmax = std::max(tmax, std::abs(t.get<double>()));
        near = tmax <= kNearObservedT;
        detail += fmt(", max |t| %.3f", tmax);
      } else {
        detail += ", chain diverged before Phase 3";
      }
    } catch (const std::exception&) {
      near = false;
    }
    log.check(code == 3 && near, "5", "full+random model reports collinearity", detail);
  }
  return log.failed() ? 1 : 0;
}
