#include "saomre/simulation.hpp"

#include <cmath>
#include <Eigen/Eigenvalues>

#include "saomre/error.hpp"

namespace saomre {

Eigen::VectorXd ParameterPoint::variance_params(const ModelSpec& spec) const {
  const auto q = static_cast<Eigen::Index>(spec.q());
  if (q == 0) return Eigen::VectorXd(0);
  switch (spec.variance_model) {
    case VarianceModel::Scalar: return Eigen::VectorXd::Constant(1, sigma(0, 0));
    case VarianceModel::Diagonal: return sigma.diagonal();
    case VarianceModel::Unrestricted: return dispersion_statistics(sigma, VarianceModel::Unrestricted);
  }
  return {};
}

Eigen::VectorXd ParameterPoint::to_vector(const ModelSpec& spec) const {
  const Eigen::VectorXd v = variance_params(spec);
  Eigen::VectorXd theta(1 + beta.size() + v.size());
  theta << lambda, beta, v;
  return theta;
}

ParameterPoint ParameterPoint::from_vector(const ModelSpec& spec, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.n_params())
    throw ValidationError("parameter vector has length " + std::to_string(theta.size()) +
                          ", model expects " + std::to_string(spec.n_params()));
  const auto p = static_cast<Eigen::Index>(spec.p());
  const auto q = static_cast<Eigen::Index>(spec.q());
  ParameterPoint pp;
  pp.lambda = theta[0];
  pp.beta = theta.segment(1, p);
  pp.sigma = Eigen::MatrixXd::Zero(q, q);
  if (q == 0) return pp;
  const Eigen::VectorXd v = theta.tail(theta.size() - 1 - p);
  switch (spec.variance_model) {
    case VarianceModel::Scalar:
      pp.sigma.diagonal().setConstant(v[0]);
      break;
    case VarianceModel::Diagonal:
      pp.sigma.diagonal() = v;
      break;
    case VarianceModel::Unrestricted: {
      Eigen::Index k = 0;
      for (Eigen::Index h = 0; h < q; ++h)
        for (Eigen::Index l = h; l < q; ++l) pp.sigma(h, l) = pp.sigma(l, h) = v[k++];
      break;
    }
  }
  return pp;
}

void ParameterPoint::validate(const ModelSpec& spec) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("rate must be positive");
  if (static_cast<std::size_t>(beta.size()) != spec.p())
    throw ValidationError("beta has length " + std::to_string(beta.size()) + ", model has " +
                          std::to_string(spec.p()) + " fixed effects");
  if (static_cast<std::size_t>(sigma.rows()) != spec.q() ||
      static_cast<std::size_t>(sigma.cols()) != spec.q())
    throw ValidationError("sigma must be " + std::to_string(spec.q()) + " x " +
                          std::to_string(spec.q()));
}

namespace {

// Symmetric square root; throws unless sigma is positive semidefinite.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw ValidationError("random-effects covariance is not positive definite");
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

RandomEffectsDraw draw_random_effects(VarianceModel model, const Eigen::MatrixXd& sigma,
                                      std::size_t n_actors, Engine& rng) {
  const auto n = static_cast<Eigen::Index>(n_actors);
  const Eigen::Index q = sigma.rows();
  RandomEffectsDraw d;
  d.u.resize(n, q);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index h = 0; h < q; ++h) d.u(i, h) = normal(rng);
  if (model == VarianceModel::Unrestricted) {
    d.b = d.u * sqrt_psd(sigma);
  } else {
    if (sigma.diagonal().size() && sigma.diagonal().minCoeff() < 0.0)
      throw ValidationError("random-effects variance must be nonnegative");
    d.b.resize(n, q);
    for (Eigen::Index h = 0; h < q; ++h) d.b.col(h) = d.u.col(h) * std::sqrt(sigma(h, h));
  }
  return d;
}

Eigen::VectorXd contract_sigma_scores(VarianceModel model, const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& l_b, const Eigen::MatrixXd& b) {
  const Eigen::Index q = sigma.rows();
  if (q == 0) return Eigen::VectorXd(0);
  // d b / d sigma_h^2 = b / (2 sigma_h^2); zero variance contributes nothing
  auto term = [&](double s2, double dot) { return s2 > 0.0 ? dot / (2.0 * s2) : 0.0; };
  switch (model) {
    case VarianceModel::Scalar:
      return Eigen::VectorXd::Constant(1, term(sigma(0, 0), (l_b.array() * b.array()).sum()));
    case VarianceModel::Diagonal: {
      Eigen::VectorXd out(q);
      for (Eigen::Index h = 0; h < q; ++h) out[h] = term(sigma(h, h), l_b.col(h).dot(b.col(h)));
      return out;
    }
    case VarianceModel::Unrestricted:
      return Eigen::VectorXd(0);
  }
  return {};
}

Eigen::VectorXd ScoreContribution::as_vector() const {
  Eigen::VectorXd v(1 + l_beta.size() + l_sigma.size());
  v << l_lambda, l_beta, l_sigma;
  return v;
}

Eigen::VectorXd choice_probabilities(const Network& x, std::size_t i, const ParameterPoint& pp,
                                     const Eigen::VectorXd& b_i, const ModelSpec& spec,
                                     const CovariateSet& cov) {
  const auto candidates = adjacency_candidates(x, i);
  Eigen::VectorXd f(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c)
    f[c] = evaluation_function(apply_candidate(x, i, candidates[c]), i, pp.beta, b_i, spec, cov);
  if (!f.allFinite()) throw DegeneracyError("non-finite evaluation function");
  const Eigen::VectorXd e = (f.array() - f.maxCoeff()).exp();
  return e / e.sum();
}

Simulator::Simulator(ModelSpec spec, CovariateSet covariates)
    : spec_(std::move(spec)), cov_(std::move(covariates)), stats_(estimation_statistics(spec_)) {
  spec_.validate(cov_);
}

Simulator::Workspace Simulator::make_workspace(std::size_t n_actors) const {
  const auto n = static_cast<Eigen::Index>(n_actors);
  Workspace ws;
  ws.changes.resize(n, static_cast<Eigen::Index>(spec_.p() + spec_.q()));
  ws.utility.resize(n);
  ws.probs.resize(n);
  return ws;
}

double Simulator::ministep_cap(std::size_t n_actors, double lambda) {
  return std::max(100.0 * static_cast<double>(n_actors) * lambda, 1000.0);
}

void Simulator::kernel_probabilities(const BitNetwork& x, std::size_t i, const ParameterPoint& pp,
                                     const Eigen::Ref<const Eigen::RowVectorXd>& b_i,
                                     Workspace& ws) const {
  const std::size_t n = x.size();
  const std::size_t p = spec_.p();
  for (std::size_t k = 0; k < p; ++k)
    change_statistics(spec_.fixed_effects[k], x, i, cov_, {ws.changes.col(k).data(), n});
  for (std::size_t h = 0; h < spec_.q(); ++h)
    change_statistics(spec_.random_effects[h], x, i, cov_, {ws.changes.col(p + h).data(), n});

  ws.utility.setZero();
  for (std::size_t k = 0; k < p; ++k) ws.utility += pp.beta[k] * ws.changes.col(k);
  for (std::size_t h = 0; h < spec_.q(); ++h) ws.utility += b_i[h] * ws.changes.col(p + h);
  if (!ws.utility.allFinite()) throw DegeneracyError("non-finite evaluation function");

  const double top = ws.utility.maxCoeff();
  ws.probs = (ws.utility.array() - top).exp();
  ws.probs /= ws.probs.sum();
}

StepRecord Simulator::step(BitNetwork& x, const ParameterPoint& pp, const Eigen::MatrixXd& b,
                           Engine& rng, Workspace& ws, Eigen::VectorXd& l_beta,
                           Eigen::MatrixXd& l_b) const {
  const std::size_t n = x.size();
  std::uniform_int_distribution<std::size_t> pick_actor(0, n - 1);
  const std::size_t i = pick_actor(rng);
  kernel_probabilities(x, i, pp, b.row(static_cast<Eigen::Index>(i)), ws);

  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::size_t chosen = n - 1;
  double cum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cum += ws.probs[j];
    if (u < cum) {
      chosen = j;
      break;
    }
  }
  // rounding can leave cum slightly below 1; fall back to the last candidate with mass
  if (chosen == n - 1 && ws.probs[chosen] == 0.0)
    for (std::size_t j = n; j-- > 0;)
      if (ws.probs[j] > 0.0) {
        chosen = j;
        break;
      }

  // multinomial score: chosen change statistic minus its expectation over candidates
  const auto p = static_cast<Eigen::Index>(spec_.p());
  const auto q = static_cast<Eigen::Index>(spec_.q());
  const Eigen::RowVectorXd expected = ws.probs.transpose() * ws.changes;
  const Eigen::RowVectorXd centered = ws.changes.row(static_cast<Eigen::Index>(chosen)) - expected;
  l_beta += centered.head(p).transpose();
  if (q > 0) l_b.row(static_cast<Eigen::Index>(i)) += centered.tail(q);

  if (chosen != i) x.toggle(i, chosen);
  return {i, chosen};
}

SimOutcome Simulator::simulate(const Network& start, const ParameterPoint& pp, Engine& rng,
                               bool record_trajectory) const {
  RandomEffectsDraw draw =
      draw_random_effects(spec_.variance_model, pp.sigma, start.size(), rng);
  return simulate_with_draw(start, pp, std::move(draw), rng, record_trajectory);
}

SimOutcome Simulator::simulate_with_draw(const Network& start, const ParameterPoint& pp,
                                         RandomEffectsDraw draw, Engine& rng,
                                         bool record_trajectory) const {
  pp.validate(spec_);
  const std::size_t n = start.size();
  const auto q = static_cast<Eigen::Index>(spec_.q());
  if (draw.b.rows() != static_cast<Eigen::Index>(n) || draw.b.cols() != q)
    throw ValidationError("random-effects draw does not match the model");

  const double mean = static_cast<double>(n) * pp.lambda;
  const long k_steps = std::poisson_distribution<long>(mean)(rng);
  if (static_cast<double>(k_steps) > ministep_cap(n, pp.lambda))
    throw DegeneracyError("ministep cap exceeded (" + std::to_string(k_steps) + " ministeps)");

  SimOutcome out;
  out.scores.l_beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec_.p()));
  out.scores.l_b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), q);
  if (record_trajectory) out.trajectory.reserve(static_cast<std::size_t>(k_steps));

  BitNetwork x(start);
  Workspace ws = make_workspace(n);
  for (long s = 0; s < k_steps; ++s) {
    const StepRecord r = step(x, pp, draw.b, rng, ws, out.scores.l_beta, out.scores.l_b);
    if (record_trajectory) out.trajectory.push_back(r);
  }

  out.end_network = x.to_network();
  out.g_hat = evaluate_statistics(stats_, start, out.end_network, cov_);
  out.scores.l_lambda = static_cast<double>(k_steps) / pp.lambda - static_cast<double>(n);
  out.scores.l_sigma = contract_sigma_scores(spec_.variance_model, pp.sigma, out.scores.l_b, draw.b);
  out.draw = std::move(draw);
  out.n_ministeps = k_steps;
  return out;
}

MinistepResult ministep(const Network& x, const ParameterPoint& pp, const RandomEffectsDraw& draw,
                        const ModelSpec& spec, const CovariateSet& cov, Engine& rng) {
  const Simulator sim(spec, cov);
  pp.validate(spec);
  BitNetwork bits(x);
  auto ws = sim.make_workspace(x.size());
  MinistepResult r;
  r.increment.l_beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.p()));
  r.increment.l_b =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(spec.q()));
  r.step = sim.step(bits, pp, draw.b, rng, ws, r.increment.l_beta, r.increment.l_b);
  r.network = bits.to_network();
  return r;
}

SimOutcome simulate_period(const Network& x1, const ParameterPoint& pp, const ModelSpec& spec,
                           const CovariateSet& cov, Engine& rng) {
  return Simulator(spec, cov).simulate(x1, pp, rng);
}

}  // namespace saomre
