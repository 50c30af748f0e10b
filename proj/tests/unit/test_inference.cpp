#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "saomre/error.hpp"
#include "saomre/inference.hpp"

using namespace saomre;

namespace {

const EffectDef kOut{EffectKind::OutDegree, {}};
const EffectDef kRecip{EffectKind::Reciprocity, {}};

// Synthetic archive: G statistics with the first g1 tied to parameters.
MonteCarloSummaries synthetic(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& scores,
                              const Eigen::VectorXd& observed, std::size_t g1) {
  MonteCarloSummaries s;
  s.statistics = {StatisticDef::hamming(), StatisticDef::total(kOut), StatisticDef::total(kRecip),
                  StatisticDef::dispersion({kOut})};
  s.statistics.resize(static_cast<std::size_t>(rows.cols()));
  s.n_estimation = g1;
  s.rows = rows;
  s.scores = scores;
  s.observed = observed;
  summarize(s);
  return s;
}

PanelData small_panel(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 g(seed);
  Network w1 = testutil::random_network(n, 0.2, g);
  Network w2 = w1;
  std::bernoulli_distribution flip(0.1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && flip(g)) w2.toggle(i, j);
  return make_panel(w1, w2, {});
}

}  // namespace

TEST_CASE("standard errors") {
  SUBCASE("D = V = I gives C = I") {
    const auto r = standard_errors(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3));
    CHECK((r.C - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("sandwich against explicit inverses") {
    Eigen::Matrix3d D, V;
    D << 2, 0.3, 0.1, -0.4, 1.5, 0.2, 0.0, 0.6, 3.0;
    V << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
    const auto r = standard_errors(D, V);
    const Eigen::Matrix3d expect = D.inverse() * V * D.inverse().transpose();
    CHECK((r.C - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("near-singular D is reported with the weak direction") {
    Eigen::Matrix2d D;
    D << 1, 1, 1, 1 + 1e-10;
    try {
      standard_errors(D, Eigen::Matrix2d::Identity(), {"a", "b"});
      FAIL("expected collinearity");
    } catch (const CollinearityError& e) {
      const std::string w = e.what();
      CHECK(w.find("a(") != std::string::npos);
      CHECK(w.find("b(") != std::string::npos);
    }
  }
  SUBCASE("unrestricted archives are rejected") {
    MonteCarloSummaries s;
    s.variance_model = VarianceModel::Unrestricted;
    CHECK_THROWS_AS(standard_errors(s), ValidationError);
  }
}

TEST_CASE("standard-deviation reparametrization") {
  auto one = [](double s2, double se) {
    CovarianceReport r;
    r.C = Eigen::MatrixXd::Constant(1, 1, se * se);
    r.labels = {"variance out_degree"};
    return reparametrize_to_sd(r, Eigen::VectorXd::Constant(1, s2));
  };
  // se(sigma) = se(sigma^2) / (2 sigma)
  CHECK(one(0.52, 0.43).standard_errors[0] == doctest::Approx(0.43 / (2 * std::sqrt(0.52))).epsilon(1e-14));
  CHECK(one(0.52, 0.43).standard_errors[0] == doctest::Approx(0.298).epsilon(5e-3));
  CHECK(one(1.92, 2.05).standard_errors[0] == doctest::Approx(0.74).epsilon(5e-3));
  CHECK(one(1.0, 0.8).standard_errors[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(one(0.52, 0.43).labels[0] == "std.dev. out_degree");
  CHECK(one(0.52, 0.43).parameterization == "sigma");
  CHECK_THROWS_AS(one(0.0, 1.0), ValidationError);

  SUBCASE("consistency with J C J^T for a full matrix") {
    Eigen::Matrix3d C;
    C << 1.0, 0.2, -0.1, 0.2, 0.5, 0.05, -0.1, 0.05, 0.3;
    CovarianceReport r;
    r.C = C;
    const Eigen::Vector2d s2(0.7, 1.9);
    Eigen::Matrix3d Jinv = Eigen::Matrix3d::Identity();
    Jinv(1, 1) = 1 / (2 * std::sqrt(s2[0]));
    Jinv(2, 2) = 1 / (2 * std::sqrt(s2[1]));
    const auto out = reparametrize_to_sd(r, s2);
    CHECK((out.C - Jinv * C * Jinv.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("estimator correlation eigenvalue") {
  Eigen::Matrix2d C;
  C << 4.0, 0.0, 0.0, 9.0;
  CHECK(estimator_correlation_min_eigenvalue(C) == doctest::Approx(1.0));
  C << 1.0, 0.999, 0.999, 1.0;
  CHECK(estimator_correlation_min_eigenvalue(C) == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("orthogonalized tests on synthetic archives") {
  std::mt19937_64 g(8);
  std::normal_distribution<double> z;
  const int T = 4000;
  Eigen::MatrixXd rows(T, 4), scores(T, 2);
  for (int t = 0; t < T; ++t) {
    const double a = z(g), b = z(g), c = z(g), d = z(g);
    rows.row(t) << 10 + 2 * a, 5 + b + 0.5 * a, 3 + c + 0.8 * b, 7 + d + 0.3 * a;
    scores.row(t) << a, b;
  }
  const Eigen::Vector4d observed(10, 5, 3, 7);
  MonteCarloSummaries s = synthetic(rows, scores, observed, 2);

  SUBCASE("observed at the orthogonalized mean gives z = 0, p = 0.5") {
    const auto t0 = orthogonalized_test(s, {2}, true);
    MonteCarloSummaries s2 = s;
    s2.observed[2] += t0.y_bar[0] - t0.y_obs[0];
    const auto t = orthogonalized_test(s2, {2}, true);
    CHECK(std::abs(t.statistic) < 1e-10);
    CHECK(t.p_asymptotic == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("xi equals the variance of the orthogonalized replicates") {
    const auto t = orthogonalized_test(s, {2, 3}, false);
    const Eigen::MatrixXd c = t.replicate_y.rowwise() - t.y_bar.transpose();
    const Eigen::MatrixXd cov = c.transpose() * c / double(T);
    CHECK((cov - t.xi).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("composite test of one statistic is the square of the one-sided z") {
    const auto one = orthogonalized_test(s, {3}, true);
    const auto comp = orthogonalized_test(s, {3}, false);
    CHECK(std::abs(comp.statistic - one.statistic * one.statistic) <= 1e-10);
    CHECK(comp.df == 1);
  }
  SUBCASE("empirical p-value is the fraction of archived replicates at least as large") {
    const auto t = orthogonalized_test(s, {2}, true);
    int count = 0;
    for (int r = 0; r < T; ++r) {
      const double y = rows(r, 2) - (t.gamma * rows.row(r).head(2).transpose())(0);
      if (y >= t.y_obs[0]) ++count;
    }
    CHECK(t.p_empirical == doctest::Approx(count / double(T)));
    CHECK(t.p_empirical_se == doctest::Approx(std::sqrt(t.p_empirical * (1 - t.p_empirical) / T)));
  }
  SUBCASE("rows inside the estimation block are refused") {
    CHECK_THROWS_AS(orthogonalized_test(s, {1}, true), ValidationError);
    CHECK_THROWS_AS(orthogonalized_test(s, {2, 3}, true), ValidationError);
  }
  SUBCASE("labels are looked up") {
    CHECK_NOTHROW(score_test_overdispersion(s));
    CHECK_THROWS_AS(score_test_overdispersion(s, kRecip), ValidationError);
    CHECK_NOTHROW(composite_score_test(s, {"reciprocity"}));
  }
}

TEST_CASE("orthogonalized statistic is uncorrelated with the parameter scores") {
  const PanelData panel = small_panel(12, 12);
  ModelSpec m;
  m.fixed_effects = {kOut};
  Phase3Options opt;
  opt.extra_statistics = {StatisticDef::total(kRecip)};
  ParameterPoint pp = default_start(m, panel, 1e-4);
  const MonteCarloSummaries s = phase3(m, panel, pp, 3000, 4, opt);
  const auto t = score_test_overdispersion(s);
  // gamma is fitted to the derivative, which is the covariance of statistics with scores
  const Eigen::VectorXd y = t.replicate_y.col(0).array() - t.y_bar[0];
  for (Eigen::Index k = 0; k < s.D_hat.cols(); ++k) {
    const Eigen::VectorXd sc = s.scores.col(k).array() - s.scores.col(k).mean();
    const double corr = y.dot(sc) / std::sqrt(y.squaredNorm() * sc.squaredNorm());
    INFO("score " << k << " corr " << corr);
    CHECK(std::abs(corr) <= 0.1);
  }
}

TEST_CASE("psc") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  const int T = 2000;
  Eigen::MatrixXd rows(T, 3), scores(T, 2);
  for (int t = 0; t < T; ++t) {
    rows.row(t) << z(g), z(g) + 1, z(g);
    scores.row(t) << z(g), z(g);
  }
  const auto s = synthetic(rows, scores, Eigen::Vector3d(0.5, 0.2, -0.3), 2);
  const std::vector<StatisticDef> shared(s.statistics.begin(), s.statistics.end());

  SUBCASE("identical archives give identical scores") {
    const auto r = psc({{"a", 2, &s}, {"b", 2, &s}}, shared, 20, Penalty::AIC, DfMode::N);
    CHECK(r.models[0].psc == r.models[1].psc);
  }
  SUBCASE("fit, penalty and centering") {
    const auto r = psc({{"a", 2, &s}}, shared, 20, Penalty::BIC, DfMode::NNMinus1);
    const auto& e = r.models[0];
    CHECK(r.df == 380.0);
    CHECK(r.pen == doctest::Approx(std::log(380.0)));
    CHECK(e.penalty == doctest::Approx(1 * std::log(380.0)));
    CHECK(e.fit == doctest::Approx(380.0 * e.mean_distance));
    CHECK(e.psc == doctest::Approx(e.fit - e.penalty));
    CHECK(e.psc_centered == doctest::Approx(e.psc - 380.0 * 3));
    // mean Mahalanobis distance of simulated to observed = dim + Mahalanobis of mean to observed
    const Eigen::Vector3d d = s.m_bar - s.observed;
    CHECK(e.mean_distance == doctest::Approx(3.0 + d.dot(s.V_hat.ldlt().solve(d))).epsilon(1e-9));
  }
  SUBCASE("more parameters than shared statistics is refused") {
    CHECK_THROWS_AS(psc({{"a", 4, &s}}, shared, 20, Penalty::AIC, DfMode::N), ValidationError);
  }
  SUBCASE("singular covariance gets a ridge and a warning") {
    Eigen::MatrixXd r2 = rows;
    r2.col(2) = r2.col(1);
    const auto s2 = synthetic(r2, scores, Eigen::Vector3d(0.5, 0.2, -0.3), 2);
    const auto r = psc({{"a", 2, &s2}}, shared, 20, Penalty::AIC, DfMode::N);
    CHECK(r.models[0].ridged);
    CHECK(r.warnings.size() == 1);
  }
  SUBCASE("parsers") {
    CHECK(parse_penalty("BIC") == Penalty::BIC);
    CHECK(parse_df_mode("N(N-1)") == DfMode::NNMinus1);
    CHECK_THROWS_AS(parse_penalty("HQ"), ValidationError);
  }
}

TEST_CASE("goodness of fit") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> z;
  Eigen::MatrixXd aux(1500, 3);
  for (Eigen::Index t = 0; t < aux.rows(); ++t) aux.row(t) << z(g), z(g) + 0.5 * z(g), 2 * z(g);
  SUBCASE("observed at the mean has p = 1") {
    const Eigen::VectorXd mean = aux.colwise().mean().transpose();
    const auto r = gof(aux, mean);
    CHECK(r.distance_obs == doctest::Approx(0.0));
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("invariant under invertible linear maps without ridge") {
    Eigen::Matrix3d A;
    A << 2, 1, 0, 0, 1, -1, 0.5, 0, 3;
    const Eigen::Vector3d obs(0.4, -0.2, 1.0);
    const auto a = gof(aux, obs, 0.0);
    const auto b = gof(aux * A.transpose(), A * obs, 0.0);
    CHECK(a.distance_obs == doctest::Approx(b.distance_obs).epsilon(1e-9));
    CHECK(a.p_value == b.p_value);
  }
  SUBCASE("ridge added to the covariance") {
    const auto r0 = gof(aux, Eigen::Vector3d::Zero(), 0.0);
    const auto r1 = gof(aux, Eigen::Vector3d::Zero(), 0.2);
    CHECK((r1.omega - r0.omega - 0.2 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("degenerate auxiliary statistic needs the ridge") {
    Eigen::MatrixXd a2 = aux;
    a2.col(2).setZero();
    CHECK_THROWS_AS(gof(a2, Eigen::Vector3d::Zero(), 0.0), CollinearityError);
    CHECK_NOTHROW(gof(a2, Eigen::Vector3d::Zero(), 0.2));
  }
}
