#include "saomre/run.hpp"

#include <filesystem>
#include <fstream>

#include "saomre/error.hpp"
#include "saomre/report.hpp"
#include "saomre/rng.hpp"

namespace saomre {

using nlohmann::json;

namespace {

json model_json(const ModelSpec& spec) {
  json fixed = json::array(), random = json::array();
  for (const auto& e : spec.fixed_effects) fixed.push_back(e.name());
  for (const auto& e : spec.random_effects) random.push_back(e.name());
  return json{{"fixed_effects", fixed},
              {"random_effects", random},
              {"variance_model", to_string(spec.variance_model)}};
}

PanelData load(const RunConfig& cfg) {
  PanelData panel = load_panel(cfg.wave1, cfg.wave2, cfg.covariates);
  return panel;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw Error(ExitCode::Failure, "io", "cannot write " + p.string());
  out << s;
}

void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::vector<std::string> statistic_labels(const std::vector<StatisticDef>& defs) {
  std::vector<std::string> out;
  for (const auto& d : defs) out.push_back(d.label());
  return out;
}

json fit_json(const ModelFit& f, const Phase2Schedule& schedule) {
  const auto& est = f.estimate.estimation;
  json j;
  j["model"] = model_json(f.spec);
  j["parameter_labels"] = est.parameter_labels;
  j["estimates"] = to_json(est.theta_hat.to_vector(f.spec));
  j["start"] = to_json(f.start.to_vector(f.spec));
  j["convergence"] = json{{"t_ratios", to_json(est.t_ratios)},
                          {"max_convergence_ratio", est.max_convergence_ratio},
                          {"converged", est.converged}};
  j["phase1"] = json{{"D0", to_json(f.estimate.phase1.D0)},
                     {"ridged", f.estimate.phase1.ridged},
                     {"condition_number", f.estimate.phase1.condition_number},
                     {"sigma_gain", f.estimate.phase1.sigma_gain},
                     {"replicates", f.estimate.phase1.replicates}};
  j["phase2"] = chain_summary_json(est, schedule);
  j["phase3"] = summaries_json(f.estimate.summaries);
  if (f.covariance) j["covariance"] = covariance_json(*f.covariance);
  if (f.covariance_sd) j["covariance_sd"] = covariance_json(*f.covariance_sd);
  if (f.collinearity) j["collinearity"] = *f.collinearity;
  return j;
}

std::string fit_table(const ModelFit& f) {
  const auto& est = f.estimate.estimation;
  std::optional<Eigen::VectorXd> se;
  if (f.covariance) se = f.covariance->standard_errors;
  std::string out = parameter_table(est.parameter_labels, est.theta_hat.to_vector(f.spec), se, est.t_ratios);
  if (f.covariance_sd) {
    const auto& c = *f.covariance_sd;
    const auto nv = static_cast<Eigen::Index>(f.spec.n_variance_params());
    const std::vector<std::string> labels(c.labels.end() - nv, c.labels.end());
    const Eigen::VectorXd sd = est.theta_hat.variance_params(f.spec).cwiseSqrt();
    const std::string t = parameter_table(labels, sd, Eigen::VectorXd(c.standard_errors.tail(nv)), std::nullopt);
    out += t.substr(t.find('\n') + 1);  // drop the repeated header
  }
  out += "\nconverged: " + std::string(est.converged ? "yes" : "no") +
         "  (max |t| " + std::to_string(est.t_ratios.size() ? est.t_ratios.cwiseAbs().maxCoeff() : 0.0) +
         ", overall ratio " + std::to_string(est.max_convergence_ratio) + ")\n";
  if (f.collinearity) out += "collinearity: " + *f.collinearity + "\n";
  return out;
}

int exit_code(const Error& e) { return static_cast<int>(e.code()); }

}  // namespace

ParameterPoint starting_point(const ModelSpec& spec, const PanelData& panel, const RunConfig& cfg,
                              std::uint64_t seed) {
  if (cfg.start) return ParameterPoint::from_vector(spec, *cfg.start);
  const double smin = cfg.schedule.sigma_min;
  if (spec.q() == 0 || !cfg.start_from_null) return default_start(spec, panel, smin);

  ModelSpec null_spec = spec;
  null_spec.random_effects.clear();
  const ParameterPoint p0 = default_start(null_spec, panel, smin);
  const std::uint64_t s = splitmix64(seed ^ 0x6e756c6c73746172ULL);
  const Phase1Result ph1 = phase1_precondition(null_spec, panel, p0, cfg.phase1_replicates, s,
                                               cfg.schedule.diagonalize, cfg.schedule.initial_gain_theta);
  const EstimationResult e = phase2(null_spec, panel, p0, cfg.schedule, ph1, s);
  ParameterPoint out = e.theta_hat;
  const auto q = static_cast<Eigen::Index>(spec.q());
  out.sigma = Eigen::MatrixXd::Identity(q, q) * smin;
  return out;
}

ModelFit estimate_model(const ModelSpec& spec, const PanelData& panel, const RunConfig& cfg,
                        const Phase3Options& phase3, std::uint64_t seed) {
  spec.validate(panel.covariates);
  ModelFit f;
  f.spec = spec;
  f.start = starting_point(spec, panel, cfg, seed);
  EstimateOptions opt;
  opt.schedule = cfg.schedule;
  opt.phase1_replicates = cfg.phase1_replicates;
  opt.phase3_replicates = cfg.phase3_replicates;
  opt.phase3 = phase3;
  f.estimate = estimate(spec, panel, f.start, opt, seed);

  if (spec.variance_model == VarianceModel::Unrestricted) return f;
  try {
    f.covariance = standard_errors(f.estimate.summaries);
    const double lmin = estimator_correlation_min_eigenvalue(f.covariance->C);
    if (lmin < 1e-3)
      f.collinearity = "estimator correlation matrix is near-singular (smallest eigenvalue " +
                       std::to_string(lmin) + ")";
    const Eigen::VectorXd v = f.estimate.estimation.theta_hat.variance_params(spec);
    if (v.size() > 0 && (v.array() > 0).all()) f.covariance_sd = reparametrize_to_sd(*f.covariance, v);
  } catch (const CollinearityError& e) {
    f.collinearity = e.what();
  }
  return f;
}

namespace {

int run_simulate(const RunConfig& cfg, const PanelData& panel, json& report, std::ostream& log) {
  if (!cfg.simulate_parameters)
    throw ValidationError("simulate needs simulate.parameters in the config");
  const ParameterPoint pp = ParameterPoint::from_vector(cfg.model, *cfg.simulate_parameters);
  const Simulator sim(cfg.model, panel.covariates);
  json rows = json::array();
  std::string table;
  for (int r = 0; r < cfg.simulate_replicates; ++r) {
    Engine rng = make_stream(cfg.seed, Stream::Simulate, static_cast<std::uint64_t>(r));
    const SimOutcome o = sim.simulate(panel.wave1, pp, rng);
    const std::string name = cfg.simulate_replicates == 1 ? "network.txt"
                                                          : "network_" + std::to_string(r + 1) + ".txt";
    write_network(o.end_network, cfg.output_dir / name);
    rows.push_back(json{{"replicate", r + 1},
                        {"network_file", name},
                        {"n_ministeps", o.n_ministeps},
                        {"g_hat", to_json(o.g_hat)},
                        {"scores", to_json(o.scores.as_vector())}});
    table += "replicate " + std::to_string(r + 1) + ": " + std::to_string(o.n_ministeps) +
             " ministeps, " + std::to_string(o.end_network.tie_count()) + " ties\n";
  }
  report["statistic_labels"] = statistic_labels(sim.statistics());
  report["parameters"] = to_json(pp.to_vector(cfg.model));
  report["replicates"] = rows;
  write_text(cfg.output_dir / "table.txt", table);
  log << table;
  return 0;
}

int run_estimate(const RunConfig& cfg, const PanelData& panel, json& report, std::ostream& log) {
  Phase3Options p3;
  p3.aux_max_degree = cfg.aux_max_degree;
  ModelFit f;
  try {
    f = estimate_model(cfg.model, panel, cfg, p3, cfg.seed);
  } catch (const ChainDivergence& e) {
    std::ofstream csv(cfg.output_dir / "chain.csv");
    write_chain_csv(csv, e.labels, cfg.model.statistic_labels(), e.chain);
    throw;
  }
  std::ofstream csv(cfg.output_dir / "chain.csv");
  write_chain_csv(csv, f.estimate.estimation.parameter_labels, cfg.model.statistic_labels(),
                  f.estimate.estimation.chain);
  report["fit"] = fit_json(f, cfg.schedule);
  const std::string table = fit_table(f);
  write_text(cfg.output_dir / "table.txt", table);
  log << table;
  if (f.collinearity) {
    report["error"] = json{{"kind", "collinearity"}, {"message", *f.collinearity}};
    return static_cast<int>(ExitCode::Divergence);
  }
  return 0;
}

int run_test(const RunConfig& cfg, const PanelData& panel, json& report, std::ostream& log) {
  if (cfg.model.variance_model == VarianceModel::Unrestricted)
    throw ValidationError("score tests need independent random effects (scalar or diagonal variance model)");
  Phase3Options p3;
  p3.aux_max_degree = -1;
  if (cfg.test_kind == "overdispersion") {
    const auto& re = cfg.model.random_effects;
    if (std::find(re.begin(), re.end(), cfg.test_effect) != re.end())
      throw ValidationError("the overdispersion test fits the null model: remove " + cfg.test_effect.name() +
                            " from random_effects");
    p3.extra_statistics.push_back(StatisticDef::dispersion({cfg.test_effect}));
  }
  else
    for (const auto& e : cfg.tested_effects) p3.extra_statistics.push_back(StatisticDef::total(e));
  ModelFit f = estimate_model(cfg.model, panel, cfg, p3, cfg.seed);
  report["null_fit"] = fit_json(f, cfg.schedule);
  OrthogonalizedTest t;
  if (cfg.test_kind == "overdispersion") {
    t = score_test_overdispersion(f.estimate.summaries, cfg.test_effect);
  } else {
    std::vector<std::string> labels;
    for (const auto& d : p3.extra_statistics) labels.push_back(d.label());
    t = composite_score_test(f.estimate.summaries, labels);
  }
  report["test"] = test_json(t);
  report["test"]["kind"] = cfg.test_kind;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s test of %zu statistic(s): %s = %.4f, p_asymptotic = %.4g, p_empirical = %.4g (se %.2g), T = %d\n",
                cfg.test_kind.c_str(), t.tested.size(), t.one_sided ? "z" : "z^2", t.statistic,
                t.p_asymptotic, t.p_empirical, t.p_empirical_se, t.T);
  const std::string table = fit_table(f) + "\n" + buf;
  write_text(cfg.output_dir / "table.txt", table);
  log << table;
  return 0;
}

int run_gof(const RunConfig& cfg, const PanelData& panel, json& report, std::ostream& log) {
  Phase3Options p3;
  p3.aux_max_degree = cfg.aux_max_degree;
  ModelFit f = estimate_model(cfg.model, panel, cfg, p3, cfg.seed);
  report["fit"] = fit_json(f, cfg.schedule);
  const GofReport g = gof(f.estimate.summaries, cfg.gof_ridge);
  report["gof"] = gof_json(g);
  std::string table = fit_table(f) + "\ngoodness of fit (out-degree distribution 0.." +
                      std::to_string(cfg.aux_max_degree) + ", ridge " + std::to_string(cfg.gof_ridge) +
                      "): p = " + std::to_string(g.p_value) + "\n";
  json sweep = json::array();
  for (double r : cfg.gof_ridge_sweep) {
    const GofReport gr = gof(f.estimate.summaries, r);
    sweep.push_back(json{{"ridge", r}, {"p_value", gr.p_value}});
    table += "  ridge " + std::to_string(r) + ": p = " + std::to_string(gr.p_value) + "\n";
  }
  if (!sweep.empty()) report["gof_ridge_sweep"] = sweep;
  write_text(cfg.output_dir / "table.txt", table);
  log << table;
  return 0;
}

int run_psc(const RunConfig& cfg, const PanelData& panel, json& report, std::ostream& log) {
  std::vector<ModelDecl> models = cfg.psc_models;
  if (models.empty()) models.push_back({"model", cfg.model});
  std::vector<StatisticDef> shared;
  for (const auto& m : models)
    for (const auto& d : estimation_statistics(m.spec))
      if (std::find(shared.begin(), shared.end(), d) == shared.end()) shared.push_back(d);

  std::vector<ModelFit> fits;
  json fits_json = json::array();
  for (std::size_t k = 0; k < models.size(); ++k) {
    Phase3Options p3;
    p3.extra_statistics = shared;
    p3.aux_max_degree = cfg.aux_max_degree;
    fits.push_back(estimate_model(models[k].spec, panel, cfg, p3, splitmix64(cfg.seed + k + 1)));
    json fj = fit_json(fits.back(), cfg.schedule);
    fj["name"] = models[k].name;
    fj["gof_p_value"] = gof(fits.back().estimate.summaries, cfg.gof_ridge).p_value;
    fits_json.push_back(fj);
  }
  std::vector<PscInput> in;
  for (std::size_t k = 0; k < models.size(); ++k)
    in.push_back({models[k].name, models[k].spec.n_params(), &fits[k].estimate.summaries});
  const PscReport r = psc(in, shared, panel.n_actors(), cfg.penalty, cfg.df_mode);
  report["fits"] = fits_json;
  report["psc"] = psc_json(r);

  std::string table = "model                          params        psc   centered  gof-p\n";
  char line[256];
  for (std::size_t k = 0; k < r.models.size(); ++k) {
    const auto& m = r.models[k];
    std::snprintf(line, sizeof line, "%-30s %6zu %10.2f %10.2f %6.3f\n", m.name.c_str(), m.n_params, m.psc,
                  m.psc_centered, fits_json[k]["gof_p_value"].get<double>());
    table += line;
  }
  for (const auto& w : r.warnings) log << "warning: " << w << "\n";
  write_text(cfg.output_dir / "table.txt", table);
  log << table;
  return 0;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log) {
  json report;
  report["subcommand"] = subcommand;
  report["seed"] = cfg.seed;
  int code = 0;
  try {
    std::filesystem::create_directories(cfg.output_dir);
    set_worker_count(cfg.workers);
    const PanelData panel = load(cfg);
    report["n_actors"] = panel.n_actors();
    report["warnings"] = panel.warnings;
    if (subcommand == "simulate") {
      code = run_simulate(cfg, panel, report, log);
    } else if (subcommand == "estimate") {
      code = run_estimate(cfg, panel, report, log);
    } else if (subcommand == "test") {
      code = run_test(cfg, panel, report, log);
    } else if (subcommand == "gof") {
      code = run_gof(cfg, panel, report, log);
    } else if (subcommand == "psc") {
      code = run_psc(cfg, panel, report, log);
    } else {
      throw ValidationError("unknown subcommand '" + subcommand + "'");
    }
  } catch (const Error& e) {
    report["error"] = json{{"kind", e.kind()}, {"message", e.what()}};
    log << "error (" << e.kind() << "): " << e.what() << "\n";
    code = exit_code(e);
  } catch (const std::exception& e) {
    report["error"] = json{{"kind", "internal"}, {"message", e.what()}};
    log << "error: " << e.what() << "\n";
    code = static_cast<int>(ExitCode::Failure);
  }
  report["exit_code"] = code;
  try {
    std::filesystem::create_directories(cfg.output_dir);
    write_json(cfg.output_dir / "report.json", report);
  } catch (const std::exception& e) {
    log << "error: cannot write report: " << e.what() << "\n";
    if (code == 0) code = static_cast<int>(ExitCode::Failure);
  }
  return code;
}

}  // namespace saomre
