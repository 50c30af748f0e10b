#include "saomre/statistics.hpp"

#include <map>

#include "saomre/bitnet.hpp"
#include "saomre/error.hpp"

namespace saomre {

std::string StatisticDef::label() const {
  switch (kind) {
    case Kind::Hamming: return "hamming distance";
    case Kind::Total: return effects.front().name();
    case Kind::Dispersion: {
      std::string s = "dispersion(";
      for (std::size_t h = 0; h < effects.size(); ++h) s += (h ? "+" : "") + effects[h].name();
      return s + ")";
    }
    case Kind::Codispersion:
      return "codispersion(" + effects[0].name() + "," + effects[1].name() + ")";
  }
  return "?";
}

std::vector<StatisticDef> dispersion_statistic_defs(const ModelSpec& spec) {
  std::vector<StatisticDef> out;
  if (spec.q() == 0) return out;
  switch (spec.variance_model) {
    case VarianceModel::Scalar:
      out.push_back(StatisticDef::dispersion(spec.random_effects));
      break;
    case VarianceModel::Diagonal:
      for (const auto& e : spec.random_effects) out.push_back(StatisticDef::dispersion({e}));
      break;
    case VarianceModel::Unrestricted:
      for (std::size_t h = 0; h < spec.q(); ++h)
        for (std::size_t k = h; k < spec.q(); ++k)
          out.push_back(h == k ? StatisticDef::dispersion({spec.random_effects[h]})
                               : StatisticDef::codispersion(spec.random_effects[h],
                                                            spec.random_effects[k]));
      break;
  }
  return out;
}

std::vector<StatisticDef> estimation_statistics(const ModelSpec& spec) {
  std::vector<StatisticDef> out{StatisticDef::hamming()};
  for (const auto& e : spec.fixed_effects) out.push_back(StatisticDef::total(e));
  for (auto& d : dispersion_statistic_defs(spec)) out.push_back(std::move(d));
  return out;
}

Eigen::VectorXd evaluate_statistics(const std::vector<StatisticDef>& defs, const Network& start,
                                    const Network& end, const CovariateSet& cov) {
  const std::size_t n = end.size();
  const BitNetwork bits(end);
  std::map<std::string, Eigen::VectorXd> cache;
  auto actor_values = [&](const EffectDef& e) -> const Eigen::VectorXd& {
    auto [it, inserted] = cache.try_emplace(e.name());
    if (inserted) {
      it->second.resize(static_cast<Eigen::Index>(n));
      actor_statistics(e, bits, cov, {it->second.data(), n});
    }
    return it->second;
  };
  auto centered = [&](const EffectDef& e) -> Eigen::VectorXd {
    const Eigen::VectorXd& r = actor_values(e);
    return r.array() - r.mean();
  };

  Eigen::VectorXd g(static_cast<Eigen::Index>(defs.size()));
  for (std::size_t k = 0; k < defs.size(); ++k) {
    const auto& d = defs[k];
    switch (d.kind) {
      case StatisticDef::Kind::Hamming:
        g[k] = hamming_distance(start, end);
        break;
      case StatisticDef::Kind::Total:
        g[k] = actor_values(d.effects.front()).sum();
        break;
      case StatisticDef::Kind::Dispersion: {
        double w = 0.0;
        for (const auto& e : d.effects) w += centered(e).squaredNorm();
        g[k] = w;
        break;
      }
      case StatisticDef::Kind::Codispersion:
        g[k] = centered(d.effects[0]).dot(centered(d.effects[1]));
        break;
    }
  }
  return g;
}

Eigen::VectorXd out_degree_distribution(const Network& x, int max_degree) {
  if (max_degree < 0) throw ValidationError("max_degree must be nonnegative");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(max_degree + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int d = x.out_degree(i);
    if (d <= max_degree) a[d] += 1.0;
  }
  const double total = a.sum();
  if (total > 0) a /= total;
  return a;
}

}  // namespace saomre
