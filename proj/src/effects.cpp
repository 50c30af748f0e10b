#include "saomre/effects.hpp"

#include <algorithm>
#include <map>

#include "saomre/error.hpp"

namespace saomre {

namespace {

struct KindInfo {
  EffectKind kind;
  const char* name;
  const char* label;
  bool covariate;
};

constexpr KindInfo kKinds[] = {
    {EffectKind::OutDegree, "out_degree", "out-degree (density)", false},
    {EffectKind::Reciprocity, "reciprocity", "reciprocity", false},
    {EffectKind::TransitiveTriplets, "transitive_triplets", "transitive triplets", false},
    {EffectKind::OutDegreeActivity, "out_degree_activity", "out-degree activity", false},
    {EffectKind::CovariateAlter, "covariate_alter", "alter", true},
    {EffectKind::CovariateEgo, "covariate_ego", "ego", true},
    {EffectKind::CovariateSimilarity, "covariate_similarity", "similarity", true},
};

const KindInfo& info(EffectKind k) {
  for (const auto& ki : kKinds)
    if (ki.kind == k) return ki;
  throw std::logic_error("unknown effect kind");
}

const Covariate& covariate_of(const EffectDef& e, const CovariateSet& cov) {
  auto it = cov.find(e.covariate);
  if (it == cov.end())
    throw ValidationError("effect " + e.name() + " refers to missing covariate '" + e.covariate + "'");
  return it->second;
}

}  // namespace

bool EffectDef::uses_covariate() const { return info(kind).covariate; }

std::string EffectDef::name() const {
  std::string s = info(kind).name;
  if (uses_covariate()) s += "(" + covariate + ")";
  return s;
}

std::string EffectDef::label() const {
  if (uses_covariate()) return covariate + " " + info(kind).label;
  return info(kind).label;
}

EffectDef parse_effect(const std::string& name, const std::string& covariate) {
  std::string base = name;
  std::string cov = covariate;
  if (auto open = name.find('('); open != std::string::npos && name.back() == ')') {
    base = name.substr(0, open);
    cov = name.substr(open + 1, name.size() - open - 2);
  }
  for (const auto& ki : kKinds) {
    if (base != ki.name) continue;
    if (ki.covariate && cov.empty())
      throw ValidationError("effect '" + base + "' requires a covariate");
    if (!ki.covariate && !cov.empty())
      throw ValidationError("effect '" + base + "' takes no covariate");
    return EffectDef{ki.kind, ki.covariate ? cov : std::string{}};
  }
  throw ValidationError("unknown effect name '" + name + "'");
}

std::string to_string(VarianceModel v) {
  switch (v) {
    case VarianceModel::Scalar: return "scalar";
    case VarianceModel::Diagonal: return "diagonal";
    case VarianceModel::Unrestricted: return "unrestricted";
  }
  return "?";
}

VarianceModel parse_variance_model(const std::string& s) {
  if (s == "scalar") return VarianceModel::Scalar;
  if (s == "diagonal") return VarianceModel::Diagonal;
  if (s == "unrestricted") return VarianceModel::Unrestricted;
  throw ValidationError("unknown variance model '" + s + "'");
}

std::size_t ModelSpec::n_variance_params() const {
  const std::size_t qq = q();
  if (qq == 0) return 0;
  switch (variance_model) {
    case VarianceModel::Scalar: return 1;
    case VarianceModel::Diagonal: return qq;
    case VarianceModel::Unrestricted: return qq * (qq + 1) / 2;
  }
  return 0;
}

void ModelSpec::validate(const CovariateSet& covariates) const {
  if (fixed_effects.empty()) throw ValidationError("the model needs at least one fixed effect");
  if (std::none_of(fixed_effects.begin(), fixed_effects.end(),
                   [](const EffectDef& e) { return e.kind == EffectKind::OutDegree; }))
    throw ValidationError("the fixed effects must include out_degree (density)");
  auto check_list = [&](const std::vector<EffectDef>& list, const char* what) {
    for (std::size_t a = 0; a < list.size(); ++a) {
      if (list[a].uses_covariate() && !covariates.count(list[a].covariate))
        throw ValidationError(std::string(what) + " effect " + list[a].name() +
                              " refers to missing covariate '" + list[a].covariate + "'");
      for (std::size_t b = a + 1; b < list.size(); ++b)
        if (list[a] == list[b])
          throw ValidationError(std::string("duplicate ") + what + " effect " + list[a].name());
    }
  };
  check_list(fixed_effects, "fixed");
  check_list(random_effects, "random");
  if (variance_model == VarianceModel::Unrestricted && q() < 2)
    throw ValidationError("variance_model 'unrestricted' requires at least two random effects");
}

std::vector<std::string> ModelSpec::parameter_labels() const {
  std::vector<std::string> out{"basic rate"};
  for (const auto& e : fixed_effects) out.push_back(e.label());
  if (q() == 0) return out;
  switch (variance_model) {
    case VarianceModel::Scalar: {
      std::string s = "variance random ";
      for (std::size_t h = 0; h < q(); ++h) s += (h ? "+" : "") + random_effects[h].label();
      out.push_back(s);
      break;
    }
    case VarianceModel::Diagonal:
      for (const auto& e : random_effects) out.push_back("variance random " + e.label());
      break;
    case VarianceModel::Unrestricted:
      for (std::size_t h = 0; h < q(); ++h)
        for (std::size_t k = h; k < q(); ++k)
          out.push_back(h == k ? "variance random " + random_effects[h].label()
                               : "covariance random " + random_effects[h].label() + " / " +
                                     random_effects[k].label());
      break;
  }
  return out;
}

std::vector<std::string> ModelSpec::statistic_labels() const {
  std::vector<std::string> out{"hamming distance"};
  for (const auto& e : fixed_effects) out.push_back(e.name());
  if (q() == 0) return out;
  switch (variance_model) {
    case VarianceModel::Scalar: {
      std::string s = "dispersion(";
      for (std::size_t h = 0; h < q(); ++h) s += (h ? "+" : "") + random_effects[h].name();
      out.push_back(s + ")");
      break;
    }
    case VarianceModel::Diagonal:
      for (const auto& e : random_effects) out.push_back("dispersion(" + e.name() + ")");
      break;
    case VarianceModel::Unrestricted:
      for (std::size_t h = 0; h < q(); ++h)
        for (std::size_t k = h; k < q(); ++k)
          out.push_back(h == k ? "dispersion(" + random_effects[h].name() + ")"
                               : "codispersion(" + random_effects[h].name() + "," +
                                     random_effects[k].name() + ")");
      break;
  }
  return out;
}

double effect_value(const EffectDef& e, const Network& x, std::size_t i, const CovariateSet& cov) {
  const std::size_t n = x.size();
  double s = 0.0;
  switch (e.kind) {
    case EffectKind::OutDegree:
      for (std::size_t j = 0; j < n; ++j) s += x.tie(i, j);
      return s;
    case EffectKind::Reciprocity:
      for (std::size_t j = 0; j < n; ++j) s += x.tie(i, j) && x.tie(j, i);
      return s;
    case EffectKind::TransitiveTriplets:
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t h = 0; h < n; ++h) s += x.tie(i, j) && x.tie(i, h) && x.tie(h, j);
      return s;
    case EffectKind::OutDegreeActivity: {
      for (std::size_t j = 0; j < n; ++j) s += x.tie(i, j);
      return s * s;
    }
    case EffectKind::CovariateAlter: {
      const auto& v = covariate_of(e, cov).values;
      for (std::size_t j = 0; j < n; ++j) s += x.tie(i, j) * v[j];
      return s;
    }
    case EffectKind::CovariateEgo: {
      const auto& v = covariate_of(e, cov).values;
      for (std::size_t j = 0; j < n; ++j) s += x.tie(i, j);
      return v[i] * s;
    }
    case EffectKind::CovariateSimilarity: {
      const auto& c = covariate_of(e, cov);
      for (std::size_t j = 0; j < n; ++j)
        if (x.tie(i, j)) s += c.similarity(i, j) - c.sim_mean;
      return s;
    }
  }
  return s;
}

void actor_statistics(const EffectDef& e, const BitNetwork& x, const CovariateSet& cov,
                      std::span<double> out) {
  const std::size_t n = x.size();
  switch (e.kind) {
    case EffectKind::OutDegree:
      for (std::size_t i = 0; i < n; ++i) out[i] = x.out_degree(i);
      return;
    case EffectKind::Reciprocity:
      for (std::size_t i = 0; i < n; ++i) {
        int r = 0;
        for (std::size_t j = 0; j < n; ++j) r += x.tie(i, j) && x.tie(j, i);
        out[i] = r;
      }
      return;
    case EffectKind::TransitiveTriplets:
      // sum_h x_ih * #{j : x_ij x_hj}
      for (std::size_t i = 0; i < n; ++i) {
        int t = 0;
        for (std::size_t h = 0; h < n; ++h)
          if (x.tie(i, h)) t += x.shared_out(i, h);
        out[i] = t;
      }
      return;
    case EffectKind::OutDegreeActivity:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(x.out_degree(i)) * x.out_degree(i);
      return;
    case EffectKind::CovariateAlter: {
      const auto& v = covariate_of(e, cov).values;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (x.tie(i, j)) s += v[j];
        out[i] = s;
      }
      return;
    }
    case EffectKind::CovariateEgo: {
      const auto& v = covariate_of(e, cov).values;
      for (std::size_t i = 0; i < n; ++i) out[i] = v[i] * x.out_degree(i);
      return;
    }
    case EffectKind::CovariateSimilarity: {
      const auto& c = covariate_of(e, cov);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (x.tie(i, j)) s += c.similarity(i, j) - c.sim_mean;
        out[i] = s;
      }
      return;
    }
  }
}

void change_statistics(const EffectDef& e, const BitNetwork& x, std::size_t i,
                       const CovariateSet& cov, std::span<double> out) {
  const std::size_t n = x.size();
  auto sign = [&](std::size_t j) { return x.tie(i, j) ? -1.0 : 1.0; };
  switch (e.kind) {
    case EffectKind::OutDegree:
      for (std::size_t j = 0; j < n; ++j) out[j] = sign(j);
      break;
    case EffectKind::Reciprocity:
      for (std::size_t j = 0; j < n; ++j) out[j] = x.tie(j, i) ? sign(j) : 0.0;
      break;
    case EffectKind::TransitiveTriplets:
      // x_ij enters as the first index (two-paths i->h->j) and as the middle one (i->h, j->h)
      for (std::size_t j = 0; j < n; ++j) out[j] = sign(j) * (x.two_paths(i, j) + x.shared_out(i, j));
      break;
    case EffectKind::OutDegreeActivity: {
      const double o = x.out_degree(i);
      for (std::size_t j = 0; j < n; ++j) out[j] = 2.0 * o * sign(j) + 1.0;
      break;
    }
    case EffectKind::CovariateAlter: {
      const auto& v = covariate_of(e, cov).values;
      for (std::size_t j = 0; j < n; ++j) out[j] = sign(j) * v[j];
      break;
    }
    case EffectKind::CovariateEgo: {
      const double vi = covariate_of(e, cov).values[i];
      for (std::size_t j = 0; j < n; ++j) out[j] = sign(j) * vi;
      break;
    }
    case EffectKind::CovariateSimilarity: {
      const auto& c = covariate_of(e, cov);
      for (std::size_t j = 0; j < n; ++j) out[j] = sign(j) * (c.similarity(i, j) - c.sim_mean);
      break;
    }
  }
  out[i] = 0.0;
}

double evaluation_function(const Network& x, std::size_t i, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& b_i, const ModelSpec& spec,
                           const CovariateSet& cov) {
  if (static_cast<std::size_t>(beta.size()) != spec.p() ||
      static_cast<std::size_t>(b_i.size()) != spec.q())
    throw ValidationError("parameter dimensions do not match the model");
  double f = 0.0;
  for (std::size_t k = 0; k < spec.p(); ++k)
    f += beta[k] * effect_value(spec.fixed_effects[k], x, i, cov);
  for (std::size_t h = 0; h < spec.q(); ++h)
    f += b_i[h] * effect_value(spec.random_effects[h], x, i, cov);
  return f;
}

Eigen::MatrixXd dispersion_matrix(const std::vector<EffectDef>& effects, const Network& x,
                                  const CovariateSet& cov) {
  const std::size_t n = x.size();
  const std::size_t q = effects.size();
  Eigen::MatrixXd r(n, q);
  for (std::size_t h = 0; h < q; ++h)
    for (std::size_t i = 0; i < n; ++i) r(i, h) = effect_value(effects[h], x, i, cov);
  const Eigen::MatrixXd centered = r.rowwise() - r.colwise().mean();
  return centered.transpose() * centered;
}

Eigen::VectorXd dispersion_statistics(const Eigen::MatrixXd& W, VarianceModel model) {
  const Eigen::Index q = W.rows();
  if (q == 0) return Eigen::VectorXd(0);
  switch (model) {
    case VarianceModel::Scalar: return Eigen::VectorXd::Constant(1, W.trace());
    case VarianceModel::Diagonal: return W.diagonal();
    case VarianceModel::Unrestricted: {
      Eigen::VectorXd v(q * (q + 1) / 2);
      Eigen::Index k = 0;
      for (Eigen::Index h = 0; h < q; ++h)
        for (Eigen::Index l = h; l < q; ++l) v[k++] = W(h, l);
      return v;
    }
  }
  return {};
}

Eigen::VectorXd TargetStatistics::g(VarianceModel model) const {
  const Eigen::VectorXd w = dispersion_statistics(W, model);
  Eigen::VectorXd out(1 + s.size() + w.size());
  out << static_cast<double>(rate_target), s, w;
  return out;
}

TargetStatistics target_statistics(const PanelData& panel, const ModelSpec& spec) {
  spec.validate(panel.covariates);
  const Network& x = panel.wave2;
  TargetStatistics t;
  t.s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.p()));
  for (std::size_t k = 0; k < spec.p(); ++k)
    for (std::size_t i = 0; i < x.size(); ++i)
      t.s[k] += effect_value(spec.fixed_effects[k], x, i, panel.covariates);
  t.W = dispersion_matrix(spec.random_effects, x, panel.covariates);
  t.rate_target = hamming_distance(panel.wave1, panel.wave2);
  return t;
}

}  // namespace saomre
