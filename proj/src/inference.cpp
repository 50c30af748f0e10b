#include "saomre/inference.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <sstream>

#include "saomre/error.hpp"

namespace saomre {

namespace {

void require_independent(VarianceModel m) {
  if (m == VarianceModel::Unrestricted)
    throw ValidationError(
        "standard errors and score tests are only available for independent random effects "
        "(scalar or diagonal variance model)");
}

double fraction_at_least(const Eigen::VectorXd& v, double threshold) {
  if (v.size() == 0) return 1.0;
  Eigen::Index c = 0;
  for (Eigen::Index t = 0; t < v.size(); ++t)
    if (v[t] >= threshold) ++c;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double binomial_se(double p, int T) { return T > 0 ? std::sqrt(p * (1.0 - p) / T) : 0.0; }

}  // namespace

CovarianceReport standard_errors(const Eigen::MatrixXd& D, const Eigen::MatrixXd& V,
                                 std::vector<std::string> labels) {
  if (D.rows() != D.cols() || V.rows() != D.rows() || V.cols() != D.rows())
    throw ValidationError("standard errors need a square derivative matrix");
  CovarianceReport r;
  r.labels = std::move(labels);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double lo = sv.size() ? sv[sv.size() - 1] : 1.0;
  r.condition_number = sv.size() ? (lo > 0 ? sv[0] / lo : std::numeric_limits<double>::infinity()) : 1.0;
  if (!D.allFinite() || !(r.condition_number < 1e8)) {
    // the right singular vector of the smallest singular value names the collinear parameters
    std::ostringstream msg;
    msg << "derivative matrix is near-singular (condition number " << r.condition_number
        << "); weakest direction:";
    const Eigen::VectorXd v = svd.matrixV().col(sv.size() - 1);
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (std::abs(v[k]) > 0.2)
        msg << ' ' << (k < static_cast<Eigen::Index>(r.labels.size()) ? r.labels[k] : std::to_string(k))
            << '(' << v[k] << ')';
    throw CollinearityError(msg.str());
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
  const Eigen::MatrixXd DinvV = lu.solve(V);
  r.C = lu.solve(DinvV.transpose());  // D^-1 (D^-1 V)^T = D^-1 V D^-T
  r.C = 0.5 * (r.C + r.C.transpose());
  r.standard_errors = r.C.diagonal().cwiseMax(0.0).cwiseSqrt();
  return r;
}

CovarianceReport standard_errors(const MonteCarloSummaries& s) {
  require_independent(s.variance_model);
  const auto g = static_cast<Eigen::Index>(s.n_estimation);
  if (s.D_hat.cols() != g) throw ValidationError("score columns do not match the estimation statistics");
  return standard_errors(s.D_hat.topRows(g), s.V_hat.topLeftCorner(g, g), s.parameter_labels);
}

CovarianceReport reparametrize_to_sd(const CovarianceReport& report, const Eigen::VectorXd& sigma2) {
  const Eigen::Index P = report.C.rows();
  const Eigen::Index k = sigma2.size();
  if (k > P) throw ValidationError("more variance parameters than parameters");
  for (Eigen::Index h = 0; h < k; ++h)
    if (!(sigma2[h] > 0)) throw ValidationError("variance estimate must be positive to reparametrize");
  Eigen::VectorXd jinv = Eigen::VectorXd::Ones(P);
  for (Eigen::Index h = 0; h < k; ++h) jinv[P - k + h] = 1.0 / (2.0 * std::sqrt(sigma2[h]));
  CovarianceReport out = report;
  out.C = jinv.asDiagonal() * report.C * jinv.asDiagonal();
  out.standard_errors = out.C.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.parameterization = "sigma";
  if (out.labels.size() == static_cast<std::size_t>(P))
    for (Eigen::Index h = 0; h < k; ++h) {
      auto& l = out.labels[static_cast<std::size_t>(P - k + h)];
      if (l.rfind("variance ", 0) == 0) l = "std.dev. " + l.substr(9);
    }
  return out;
}

double estimator_correlation_min_eigenvalue(const Eigen::MatrixXd& C) {
  const Eigen::VectorXd sd = C.diagonal().cwiseMax(0.0).cwiseSqrt();
  if (sd.size() == 0) return 1.0;
  if ((sd.array() <= 0).any()) return 0.0;
  const Eigen::VectorXd inv = sd.cwiseInverse();
  const Eigen::MatrixXd R = inv.asDiagonal() * C * inv.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

OrthogonalizedTest orthogonalized_test(const MonteCarloSummaries& s,
                                       const std::vector<int>& tested_rows, bool one_sided) {
  require_independent(s.variance_model);
  const auto g1 = static_cast<Eigen::Index>(s.n_estimation);
  const auto k = static_cast<Eigen::Index>(tested_rows.size());
  if (k == 0) throw ValidationError("no statistics to test");
  if (one_sided && k != 1) throw ValidationError("a one-sided test takes one statistic");
  if (s.D_hat.cols() != g1) throw ValidationError("score columns do not match the estimation statistics");
  for (int r : tested_rows)
    if (r < g1 || r >= s.rows.cols())
      throw ValidationError("tested statistic must be outside the estimation block");

  OrthogonalizedTest t;
  t.one_sided = one_sided;
  t.df = static_cast<int>(k);
  t.T = static_cast<int>(s.rows.rows());
  for (int r : tested_rows) t.tested.push_back(s.statistics[static_cast<std::size_t>(r)].label());

  const Eigen::MatrixXd D1 = s.D_hat.topRows(g1);
  Eigen::MatrixXd D2(k, g1), V12(g1, k), V22(k, k);
  Eigen::MatrixXd G2(s.rows.rows(), k);
  Eigen::VectorXd obs2(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::Index ra = tested_rows[static_cast<std::size_t>(a)];
    D2.row(a) = s.D_hat.row(ra);
    V12.col(a) = s.V_hat.block(0, ra, g1, 1);
    for (Eigen::Index b = 0; b < k; ++b) V22(a, b) = s.V_hat(ra, tested_rows[static_cast<std::size_t>(b)]);
    G2.col(a) = s.rows.col(ra);
    obs2[a] = s.observed[ra];
  }
  const Eigen::MatrixXd V11 = s.V_hat.topLeftCorner(g1, g1);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D1);
  const auto& sv = svd.singularValues();
  if (!D1.allFinite() || !(sv[sv.size() - 1] > 0) || sv[0] / sv[sv.size() - 1] >= 1e8)
    throw CollinearityError("derivative block of the null model is near-singular");

  // Gamma = D2 D1^-1, solved as D1^T Gamma^T = D2^T
  t.gamma = D1.transpose().partialPivLu().solve(D2.transpose()).transpose();
  t.xi = V22 - (t.gamma * V12 + V12.transpose() * t.gamma.transpose()) +
         t.gamma * V11 * t.gamma.transpose();
  t.xi = 0.5 * (t.xi + t.xi.transpose());

  t.y_obs = obs2 - t.gamma * s.observed.head(g1);
  t.replicate_y = G2 - s.rows.leftCols(g1) * t.gamma.transpose();
  t.y_bar = t.replicate_y.colwise().mean().transpose();

  if (one_sided) {
    const double xi = t.xi(0, 0);
    if (!(xi > 0)) throw CollinearityError("orthogonalized variance is not positive (" + std::to_string(xi) + ")");
    const double sd = std::sqrt(xi);
    t.statistic = (t.y_obs[0] - t.y_bar[0]) / sd;
    t.replicate_statistics = (t.replicate_y.col(0).array() - t.y_bar[0]) / sd;
    const boost::math::normal_distribution<double> normal;
    t.p_asymptotic = boost::math::cdf(boost::math::complement(normal, t.statistic));
    // indicator on y rather than on z keeps the comparison free of rounding in the scaling
    t.p_empirical = fraction_at_least(t.replicate_y.col(0), t.y_obs[0]);
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(t.xi);
    if (llt.info() != Eigen::Success) throw CollinearityError("orthogonalized covariance is not positive definite");
    const Eigen::VectorXd d = t.y_obs - t.y_bar;
    t.statistic = d.dot(llt.solve(d));
    const Eigen::MatrixXd centered = (t.replicate_y.rowwise() - t.y_bar.transpose()).transpose();
    const Eigen::MatrixXd sol = llt.solve(centered);
    t.replicate_statistics = (centered.array() * sol.array()).colwise().sum().transpose();
    const boost::math::chi_squared_distribution<double> chi(static_cast<double>(k));
    t.p_asymptotic = boost::math::cdf(boost::math::complement(chi, std::max(0.0, t.statistic)));
    t.p_empirical = fraction_at_least(t.replicate_statistics, t.statistic);
  }
  t.p_empirical_se = binomial_se(t.p_empirical, t.T);
  return t;
}

OrthogonalizedTest score_test_overdispersion(const MonteCarloSummaries& s, const EffectDef& effect) {
  const std::string label = StatisticDef::dispersion({effect}).label();
  const int row = s.find(label);
  if (row < 0) throw ValidationError("archive has no '" + label + "' statistic");
  return orthogonalized_test(s, {row}, true);
}

OrthogonalizedTest composite_score_test(const MonteCarloSummaries& s,
                                        const std::vector<std::string>& tested_labels) {
  std::vector<int> rows;
  for (const auto& l : tested_labels) {
    const int r = s.find(l);
    if (r < 0) throw ValidationError("archive has no '" + l + "' statistic");
    rows.push_back(r);
  }
  return orthogonalized_test(s, rows, false);
}

Penalty parse_penalty(const std::string& s) {
  if (s == "AIC" || s == "aic") return Penalty::AIC;
  if (s == "BIC" || s == "bic") return Penalty::BIC;
  throw ValidationError("unknown penalty '" + s + "' (expected AIC or BIC)");
}

DfMode parse_df_mode(const std::string& s) {
  if (s == "N" || s == "n") return DfMode::N;
  if (s == "N(N-1)" || s == "n(n-1)" || s == "pairs") return DfMode::NNMinus1;
  throw ValidationError("unknown df mode '" + s + "' (expected N or N(N-1))");
}

PscReport psc(const std::vector<PscInput>& models, const std::vector<StatisticDef>& shared,
              std::size_t n_actors, Penalty penalty, DfMode df_mode) {
  PscReport rep;
  rep.penalty = penalty;
  const double n = static_cast<double>(n_actors);
  rep.df = df_mode == DfMode::N ? n : n * (n - 1.0);
  rep.pen = penalty == Penalty::AIC ? 2.0 : std::log(rep.df);
  for (const auto& d : shared) rep.shared_statistics.push_back(d.label());
  const auto dim = static_cast<Eigen::Index>(shared.size());

  for (const auto& m : models) {
    if (!m.summaries) throw ValidationError("psc model '" + m.name + "' has no archive");
    const auto& s = *m.summaries;
    if (m.n_params > shared.size())
      throw ValidationError("shared statistic set is smaller than model '" + m.name + "'");
    std::vector<Eigen::Index> idx;
    for (const auto& d : shared) {
      const int r = s.find(d.label());
      if (r < 0) throw ValidationError("archive of '" + m.name + "' lacks '" + d.label() + "'");
      idx.push_back(r);
    }
    Eigen::MatrixXd V(dim, dim);
    Eigen::MatrixXd dev(s.rows.rows(), dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) V(a, b) = s.V_hat(idx[a], idx[b]);
      dev.col(a) = s.rows.col(idx[a]).array() - s.observed[idx[a]];
    }
    PscEntry e;
    e.name = m.name;
    e.n_params = m.n_params;
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(V).singularValues();
    if (llt.info() != Eigen::Success || !(sv[sv.size() - 1] > 1e-12 * sv[0])) {
      const double ridge = 1e-8 * V.trace() / static_cast<double>(dim);
      V.diagonal().array() += ridge;
      llt.compute(V);
      e.ridged = true;
      rep.warnings.push_back("psc: covariance of '" + m.name + "' was singular; ridge " +
                             std::to_string(ridge) + " added");
      if (llt.info() != Eigen::Success)
        throw CollinearityError("psc: covariance of '" + m.name + "' is singular after ridge");
    }
    const Eigen::MatrixXd sol = llt.solve(dev.transpose());
    e.mean_distance = (dev.transpose().array() * sol.array()).colwise().sum().mean();
    e.fit = rep.df * e.mean_distance;
    e.penalty = static_cast<double>(shared.size() - m.n_params) * rep.pen;
    e.psc = e.fit - e.penalty;
    e.psc_centered = e.psc - rep.df * static_cast<double>(dim);
    rep.models.push_back(e);
  }
  return rep;
}

GofReport gof(const Eigen::MatrixXd& aux, const Eigen::VectorXd& observed, double ridge) {
  if (aux.cols() != observed.size()) throw ValidationError("auxiliary statistic dimensions differ");
  if (aux.rows() < 2) throw ValidationError("goodness of fit needs at least two replicates");
  if (ridge < 0) throw ValidationError("ridge must be nonnegative");
  GofReport r;
  r.observed = observed;
  r.ridge = ridge;
  r.T = static_cast<int>(aux.rows());
  r.mean = aux.colwise().mean().transpose();
  const Eigen::MatrixXd centered = aux.rowwise() - r.mean.transpose();
  r.omega = centered.transpose() * centered / static_cast<double>(aux.rows());
  r.omega.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(r.omega);
  if (llt.info() != Eigen::Success)
    throw CollinearityError("auxiliary covariance is singular; increase the ridge");
  const Eigen::VectorXd d = observed - r.mean;
  r.distance_obs = d.dot(llt.solve(d));
  const Eigen::MatrixXd sol = llt.solve(centered.transpose());
  r.replicate_distances = (centered.transpose().array() * sol.array()).colwise().sum().transpose();
  r.p_value = fraction_at_least(r.replicate_distances, r.distance_obs);
  r.p_value_se = binomial_se(r.p_value, r.T);
  return r;
}

GofReport gof(const MonteCarloSummaries& s, double ridge) {
  if (s.aux.size() == 0) throw ValidationError("archive has no auxiliary statistic");
  return gof(s.aux, s.observed_aux, ridge);
}

}  // namespace saomre
