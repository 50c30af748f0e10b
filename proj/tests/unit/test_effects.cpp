#include <array>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "oracle.hpp"
#include "saomre/effects.hpp"
#include "saomre/error.hpp"
#include "saomre/statistics.hpp"

using namespace saomre;

namespace {

using testutil::Oracle;

const std::array<EffectDef, 7> kAllEffects{
    EffectDef{EffectKind::OutDegree, {}},          EffectDef{EffectKind::Reciprocity, {}},
    EffectDef{EffectKind::TransitiveTriplets, {}}, EffectDef{EffectKind::OutDegreeActivity, {}},
    EffectDef{EffectKind::CovariateAlter, "v"},    EffectDef{EffectKind::CovariateEgo, "v"},
    EffectDef{EffectKind::CovariateSimilarity, "v"}};

}  // namespace

TEST_CASE("effect values: worked examples") {
  CovariateSet cov{{"v", make_covariate({1, 0, 1})}};
  for (const auto& e : kAllEffects)
    for (std::size_t i = 0; i < 3; ++i) CHECK(effect_value(e, Network(3), i, cov) == 0.0);

  // ties 1->2, 1->3, 2->3 (1-based): actor 1 has one transitive triplet
  const Network x = testutil::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  CHECK(effect_value(EffectDef{EffectKind::TransitiveTriplets, {}}, x, 0, cov) == 1.0);
  const Network r = testutil::from_edges(2, {{0, 1}, {1, 0}});
  CHECK(effect_value(EffectDef{EffectKind::Reciprocity, {}}, r, 0, {}) == 1.0);
}

TEST_CASE("effect values match the literal sums on every 4-actor digraph") {
  const std::vector<double> v{1.0, 0.0, 0.0, 1.0};
  const CovariateSet cov{{"v", make_covariate(v)}};
  int mismatches = 0;
  for (unsigned code = 0; code < (1u << 12); ++code) {
    const Network x = testutil::digraph4(code);
    const Oracle o(x, v);
    const BitNetwork bits(x);
    for (const auto& e : kAllEffects) {
      double out[4];
      actor_statistics(e, bits, cov, {out, 4});
      for (std::size_t i = 0; i < 4; ++i) {
        const double want = o.value(e.kind, i);
        if (std::abs(effect_value(e, x, i, cov) - want) > 1e-12) ++mismatches;
        if (std::abs(out[i] - want) > 1e-12) ++mismatches;
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("change statistics agree with whole-statistic differences") {
  std::mt19937_64 rng(17);
  const std::vector<double> v{0.0, 1.0, 2.5, 1.0, 0.0, 3.0, 1.0};
  const CovariateSet cov{{"v", make_covariate(v)}};
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Network x = testutil::random_network(7, 0.1 + 0.004 * rep, rng);
    const BitNetwork bits(x);
    for (const auto& e : kAllEffects)
      for (std::size_t i = 0; i < 7; ++i) {
        double d[7];
        change_statistics(e, bits, i, cov, {d, 7});
        CHECK(d[i] == 0.0);
        for (std::size_t j = 0; j < 7; ++j) {
          if (j == i) continue;
          const double want = effect_value(e, apply_candidate(x, i, Candidate::toggle(j)), i, cov) -
                              effect_value(e, x, i, cov);
          worst = std::max(worst, std::abs(d[j] - want));
        }
      }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("similarity centering sums to zero over ordered pairs") {
  const Covariate c = make_covariate({0.0, 1.0, 1.0, 4.0, 2.0});
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if (i != j) s += c.similarity(i, j) - c.sim_mean;
  CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("evaluation function") {
  ModelSpec spec;
  spec.fixed_effects = {EffectDef{EffectKind::OutDegree, {}}};
  spec.random_effects = {EffectDef{EffectKind::OutDegree, {}}};
  const Network x = testutil::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  Eigen::VectorXd beta(1), b(1);
  beta << -2.98;
  b << 0.5;
  // (beta + b_i) * out-degree = (-2.98 + 0.5) * 3
  CHECK(evaluation_function(x, 0, beta, b, spec, {}) == doctest::Approx(-7.44).epsilon(1e-14));
  CHECK(evaluation_function(Network(4), 0, beta, b, spec, {}) == 0.0);
  CHECK_THROWS_AS(evaluation_function(x, 0, Eigen::VectorXd(2), b, spec, {}), ValidationError);

  SUBCASE("linear in the parameters") {
    ModelSpec m;
    m.fixed_effects = {kAllEffects[0], kAllEffects[1], kAllEffects[2]};
    m.random_effects = {kAllEffects[0]};
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 50; ++rep) {
      const Network y = testutil::random_network(6, 0.4, rng);
      Eigen::VectorXd b1(3), b2(3), bi(1);
      for (int k = 0; k < 3; ++k) b1[k] = z(rng), b2[k] = z(rng);
      bi[0] = z(rng);
      const double lhs = evaluation_function(y, 2, b1 + b2, bi, m, {});
      const double rhs = evaluation_function(y, 2, b1, bi, m, {}) +
                         evaluation_function(y, 2, b2, Eigen::VectorXd::Zero(1), m, {});
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
  SUBCASE("random out-degree reduces to a shifted density coefficient") {
    ModelSpec m;
    m.fixed_effects = {kAllEffects[0], kAllEffects[1]};
    m.random_effects = {kAllEffects[0]};
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 30; ++rep) {
      const Network y = testutil::random_network(6, 0.4, rng);
      Eigen::VectorXd bb(2), bi(1);
      bb << -1.3, 0.7;
      bi << 0.25 * rep - 3;
      for (std::size_t i = 0; i < 6; ++i) {
        const double want = (bb[0] + bi[0]) * y.out_degree(i) +
                            bb[1] * effect_value(kAllEffects[1], y, i, {});
        CHECK(evaluation_function(y, i, bb, bi, m, {}) == doctest::Approx(want).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("target statistics") {
  ModelSpec spec;
  spec.fixed_effects = {kAllEffects[0], kAllEffects[1]};
  spec.random_effects = {kAllEffects[0]};
  std::mt19937_64 rng(4);
  const Network w1 = testutil::random_network(9, 0.2, rng);
  const Network w2 = testutil::random_network(9, 0.3, rng);
  const PanelData same = make_panel(w1, w1, {});
  CHECK(target_statistics(same, spec).rate_target == 0);

  const PanelData p = make_panel(w1, w2, {});
  const TargetStatistics t = target_statistics(p, spec);
  CHECK(t.W(0, 0) == out_degree_dispersion(w2));
  CHECK(t.s[0] == w2.tie_count());
  CHECK(t.rate_target == hamming_distance(w1, w2));
  // the generic statistic evaluator gives the same vector
  const Eigen::VectorXd g = evaluate_statistics(estimation_statistics(spec), w1, w2, {});
  CHECK((g - t.g(spec.variance_model)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("model validation") {
  ModelSpec spec;
  CHECK_THROWS_AS(spec.validate({}), ValidationError);
  spec.fixed_effects = {kAllEffects[1]};
  CHECK_THROWS_AS(spec.validate({}), ValidationError);  // no out-degree
  spec.fixed_effects = {kAllEffects[0], kAllEffects[4]};
  CHECK_THROWS_AS(spec.validate({}), ValidationError);  // missing covariate
  spec.fixed_effects = {kAllEffects[0], kAllEffects[0]};
  CHECK_THROWS_AS(spec.validate({}), ValidationError);  // duplicate
  spec.fixed_effects = {kAllEffects[0]};
  spec.random_effects = {kAllEffects[0]};
  spec.variance_model = VarianceModel::Unrestricted;
  CHECK_THROWS_AS(spec.validate({}), ValidationError);  // needs q >= 2
  spec.variance_model = VarianceModel::Scalar;
  CHECK_NOTHROW(spec.validate({}));
  CHECK(spec.n_params() == 3);

  CHECK(parse_effect("covariate_alter(status)") == EffectDef{EffectKind::CovariateAlter, "status"});
  CHECK_THROWS_AS(parse_effect("no_such_effect"), ValidationError);
  CHECK_THROWS_AS(parse_effect("covariate_alter"), ValidationError);
}
