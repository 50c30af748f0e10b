#include "saomre/config.hpp"

#include <fstream>
#include <set>

#include "saomre/error.hpp"

namespace saomre {

using nlohmann::json;

namespace {

const std::set<std::string> kSections{"data", "model", "algorithm", "output",
                                      "simulate", "test", "gof", "psc"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<EffectDef> parse_effect_list(const json& j, const char* key) {
  std::vector<EffectDef> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ValidationError(std::string("'") + key + "' must be a list");
  for (const auto& e : j[key]) {
    if (e.is_string()) {
      out.push_back(parse_effect(e.get<std::string>()));
    } else if (e.is_object()) {
      out.push_back(parse_effect(get<std::string>(e, "name", ""), get<std::string>(e, "covariate", "")));
    } else {
      throw ValidationError(std::string("entries of '") + key + "' must be strings or objects");
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

CovariateSet RunConfig::covariate_names() const {
  CovariateSet out;
  for (const auto& [name, path] : covariates) out.emplace(name, Covariate{});
  return out;
}

ModelSpec parse_model(const json& j) {
  if (!j.is_object()) throw ValidationError("model must be an object");
  reject_unknown(j, {"name", "fixed_effects", "random_effects", "variance_model"}, "model");
  ModelSpec spec;
  spec.fixed_effects = parse_effect_list(j, "fixed_effects");
  spec.random_effects = parse_effect_list(j, "random_effects");
  spec.variance_model = parse_variance_model(get<std::string>(j, "variance_model", "scalar"));
  return spec;
}

Eigen::VectorXd parse_parameters(const json& j, const ModelSpec& spec) {
  if (!j.is_object()) throw ValidationError("parameters must be an object");
  reject_unknown(j, {"rate", "fixed", "variance"}, "parameters");
  const auto fixed = get<std::vector<double>>(j, "fixed", {});
  const auto var = get<std::vector<double>>(j, "variance", {});
  if (fixed.size() != spec.p())
    throw ValidationError("parameters.fixed has " + std::to_string(fixed.size()) +
                          " entries, model has " + std::to_string(spec.p()));
  if (var.size() != spec.n_variance_params())
    throw ValidationError("parameters.variance has " + std::to_string(var.size()) +
                          " entries, model needs " + std::to_string(spec.n_variance_params()));
  if (!j.contains("rate")) throw ValidationError("parameters.rate is required");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(spec.n_params()));
  theta[0] = get<double>(j, "rate", 0.0);
  for (std::size_t k = 0; k < fixed.size(); ++k) theta[static_cast<Eigen::Index>(1 + k)] = fixed[k];
  for (std::size_t k = 0; k < var.size(); ++k)
    theta[static_cast<Eigen::Index>(1 + fixed.size() + k)] = var[k];
  return theta;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir, bool check_files) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j, kSections, "config");
  RunConfig c;

  if (!j.contains("data")) throw ValidationError("config needs a 'data' section");
  const json& data = j["data"];
  reject_unknown(data, {"wave1", "wave2", "covariates"}, "data");
  if (!data.contains("wave1") || !data.contains("wave2"))
    throw ValidationError("data needs 'wave1' and 'wave2'");
  c.wave1 = resolve(base_dir, get<std::string>(data, "wave1", ""));
  c.wave2 = resolve(base_dir, get<std::string>(data, "wave2", ""));
  if (data.contains("covariates")) {
    if (!data["covariates"].is_object()) throw ValidationError("data.covariates must be an object");
    for (auto it = data["covariates"].begin(); it != data["covariates"].end(); ++it)
      c.covariates[it.key()] = resolve(base_dir, it.value().get<std::string>());
  }
  if (check_files) {
    for (const auto& p : {c.wave1, c.wave2})
      if (!std::filesystem::exists(p)) throw ValidationError("data file not found: " + p.string());
    for (const auto& [name, p] : c.covariates)
      if (!std::filesystem::exists(p))
        throw ValidationError("covariate file for '" + name + "' not found: " + p.string());
  }
  const CovariateSet names = c.covariate_names();

  if (!j.contains("model")) throw ValidationError("config needs a 'model' section");
  c.model = parse_model(j["model"]);
  c.model.validate(names);

  if (j.contains("algorithm")) {
    const json& a = j["algorithm"];
    reject_unknown(a, {"seed", "workers", "phase1_replicates", "phase3_replicates", "subphase_lengths",
                       "tail_lengths", "initial_gain_theta", "initial_gain_sigma", "gain_reduction",
                       "sigma_min", "diagonalize", "divergence_bound", "start", "start_from_null"},
                   "algorithm");
    c.seed = get<std::uint64_t>(a, "seed", c.seed);
    c.workers = get<int>(a, "workers", c.workers);
    c.phase1_replicates = get<int>(a, "phase1_replicates", c.phase1_replicates);
    c.phase3_replicates = get<int>(a, "phase3_replicates", c.phase3_replicates);
    auto& s = c.schedule;
    s.subphase_lengths = get<std::vector<int>>(a, "subphase_lengths", s.subphase_lengths);
    s.tail_lengths = get<std::vector<int>>(a, "tail_lengths", s.tail_lengths);
    s.initial_gain_theta = get<double>(a, "initial_gain_theta", s.initial_gain_theta);
    if (a.contains("initial_gain_sigma") && !a["initial_gain_sigma"].is_null())
      s.initial_gain_sigma = get<double>(a, "initial_gain_sigma", 0.0);
    s.gain_reduction = get<double>(a, "gain_reduction", s.gain_reduction);
    s.sigma_min = get<double>(a, "sigma_min", s.sigma_min);
    s.diagonalize = get<double>(a, "diagonalize", s.diagonalize);
    s.divergence_bound = get<double>(a, "divergence_bound", s.divergence_bound);
    if (a.contains("start")) c.start = parse_parameters(a["start"], c.model);
    c.start_from_null = get<bool>(a, "start_from_null", c.start_from_null);
  }
  c.schedule.validate();
  if (c.phase1_replicates < 50) throw ValidationError("phase1_replicates must be at least 50");
  if (c.phase3_replicates < 1) throw ValidationError("phase3_replicates must be positive");

  if (j.contains("output")) {
    reject_unknown(j["output"], {"directory"}, "output");
    c.output_dir = resolve(base_dir, get<std::string>(j["output"], "directory", "out"));
  } else {
    c.output_dir = base_dir / "out";
  }

  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    reject_unknown(s, {"parameters", "replicates"}, "simulate");
    if (s.contains("parameters")) c.simulate_parameters = parse_parameters(s["parameters"], c.model);
    c.simulate_replicates = get<int>(s, "replicates", c.simulate_replicates);
    if (c.simulate_replicates < 1) throw ValidationError("simulate.replicates must be positive");
  }

  if (j.contains("test")) {
    const json& t = j["test"];
    reject_unknown(t, {"kind", "effect", "tested_effects"}, "test");
    c.test_kind = get<std::string>(t, "kind", c.test_kind);
    if (c.test_kind != "overdispersion" && c.test_kind != "composite")
      throw ValidationError("test.kind must be 'overdispersion' or 'composite'");
    if (t.contains("effect")) c.test_effect = parse_effect(t["effect"].get<std::string>());
    c.tested_effects = parse_effect_list(t, "tested_effects");
    if (c.test_kind == "composite" && c.tested_effects.empty())
      throw ValidationError("a composite test needs test.tested_effects");
    for (const auto& e : c.tested_effects) {
      if (e.uses_covariate() && !names.count(e.covariate))
        throw ValidationError("tested effect " + e.name() + " refers to missing covariate");
      if (std::find(c.model.fixed_effects.begin(), c.model.fixed_effects.end(), e) !=
          c.model.fixed_effects.end())
        throw ValidationError("tested effect " + e.name() + " is already in the null model");
    }
  }

  if (j.contains("gof")) {
    const json& g = j["gof"];
    reject_unknown(g, {"max_degree", "ridge", "ridge_sweep"}, "gof");
    c.aux_max_degree = get<int>(g, "max_degree", c.aux_max_degree);
    c.gof_ridge = get<double>(g, "ridge", c.gof_ridge);
    c.gof_ridge_sweep = get<std::vector<double>>(g, "ridge_sweep", {});
    if (c.aux_max_degree < 0) throw ValidationError("gof.max_degree must be nonnegative");
    if (c.gof_ridge < 0) throw ValidationError("gof.ridge must be nonnegative");
  }

  if (j.contains("psc")) {
    const json& p = j["psc"];
    reject_unknown(p, {"penalty", "df", "models"}, "psc");
    c.penalty = parse_penalty(get<std::string>(p, "penalty", "AIC"));
    c.df_mode = parse_df_mode(get<std::string>(p, "df", "N"));
    if (p.contains("models")) {
      int k = 0;
      for (const auto& m : p["models"]) {
        ModelDecl d;
        d.name = get<std::string>(m, "name", "model" + std::to_string(++k));
        d.spec = parse_model(m);
        d.spec.validate(names);
        c.psc_models.push_back(std::move(d));
      }
    }
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace saomre
