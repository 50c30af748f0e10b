#include "saomre/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <sstream>

#include "saomre/error.hpp"
#include "saomre/rng.hpp"

namespace saomre {

void Phase2Schedule::validate() const {
  if (subphase_lengths.empty()) throw ValidationError("schedule needs at least one subphase");
  if (subphase_lengths.size() != tail_lengths.size())
    throw ValidationError("subphase_lengths and tail_lengths differ in length");
  for (std::size_t k = 0; k < subphase_lengths.size(); ++k) {
    if (subphase_lengths[k] < 1) throw ValidationError("subphase length must be positive");
    if (tail_lengths[k] < 1 || tail_lengths[k] > subphase_lengths[k])
      throw ValidationError("tail length must lie in [1, subphase length]");
  }
  if (!(initial_gain_theta > 0)) throw ValidationError("initial_gain_theta must be positive");
  if (initial_gain_sigma && !(*initial_gain_sigma > 0))
    throw ValidationError("initial_gain_sigma must be positive");
  if (!(gain_reduction > 0 && gain_reduction < 1))
    throw ValidationError("gain_reduction must lie in (0, 1)");
  if (!(sigma_min > 0)) throw ValidationError("sigma_min must be positive");
  if (!(diagonalize >= 0 && diagonalize <= 1)) throw ValidationError("diagonalize must lie in [0, 1]");
  if (!(divergence_bound > 0)) throw ValidationError("divergence_bound must be positive");
}

int Phase2Schedule::total_iterations() const {
  int s = 0;
  for (int l : subphase_lengths) s += l;
  return s;
}

namespace {

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double lo = sv[sv.size() - 1];
  if (!(lo > 0)) return std::numeric_limits<double>::infinity();
  return sv[0] / lo;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

Eigen::VectorXd observed_statistics(const std::vector<StatisticDef>& defs, const PanelData& panel) {
  return evaluate_statistics(defs, panel.wave1, panel.wave2, panel.covariates);
}

struct Draw {
  Eigen::VectorXd g;
  Eigen::VectorXd l;
};

}  // namespace

Eigen::MatrixXd project_pd(const Eigen::MatrixXd& m, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.size() == 0 || ev.minCoeff() >= floor) return sym;
  const Eigen::MatrixXd out =
      es.eigenvectors() * ev.cwiseMax(floor).asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Phase1Result phase1_precondition(const ModelSpec& spec, const PanelData& panel,
                                 const ParameterPoint& pp0, int n1, std::uint64_t seed,
                                 double diagonalize, double initial_gain_theta, Execution mode) {
  if (n1 < 50) throw ValidationError("Phase 1 needs at least 50 replicates");
  const Simulator sim(spec, panel.covariates);
  pp0.validate(spec);
  const auto r = static_cast<Eigen::Index>(1 + spec.p());
  const auto nv = static_cast<Eigen::Index>(spec.n_variance_params());

  auto results = run_replicates<DegeneracyError>(
      static_cast<std::size_t>(n1),
      [&](std::size_t t) {
        Engine rng = make_stream(seed, Stream::Phase1, t);
        SimOutcome o = sim.simulate(panel.wave1, pp0, rng);
        return Draw{o.g_hat, o.scores.as_vector()};
      },
      mode);

  std::vector<Draw> draws;
  for (auto& d : results)
    if (d) draws.push_back(std::move(*d));
  if (draws.size() < static_cast<std::size_t>(n1) * 9 / 10)
    throw DegeneracyError("Phase 1: " + std::to_string(n1 - static_cast<int>(draws.size())) +
                          " of " + std::to_string(n1) + " simulations degenerated");
  const double T = static_cast<double>(draws.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(r);
  for (const auto& d : draws) mean += d.g.head(r);
  mean /= T;
  Eigen::MatrixXd D0 = Eigen::MatrixXd::Zero(r, r);
  for (const auto& d : draws) D0 += (d.g.head(r) - mean) * d.l.head(r).transpose();
  D0 /= T;

  Phase1Result out;
  out.replicates = static_cast<int>(draws.size());
  out.D0 = D0;
  Eigen::MatrixXd used = (1.0 - diagonalize) * D0;
  used.diagonal() += diagonalize * D0.diagonal();
  out.condition_number = condition_number(used);
  if (!used.allFinite())
    throw CollinearityError("Phase 1 derivative matrix is not finite");
  if (!(out.condition_number <= 1e8)) {
    used.diagonal() += 0.05 * used.diagonal();
    out.ridged = true;
    const double c = condition_number(used);
    if (!(c <= 1e8)) {
      std::ostringstream msg;
      msg << "Phase 1 derivative matrix is singular (condition number " << c
          << " after ridge); diagonal:";
      for (Eigen::Index k = 0; k < r; ++k) msg << ' ' << D0(k, k);
      throw CollinearityError(msg.str());
    }
  }
  out.D0_inv = used.inverse();

  if (nv > 0) {
    // match the size of the first variance steps to the typical (rate, fixed) step
    const Eigen::VectorXd obs = observed_statistics(sim.statistics(), panel);
    std::vector<double> theta_steps, w_steps;
    for (const auto& d : draws) {
      const Eigen::VectorXd step = initial_gain_theta * out.D0_inv * (d.g.head(r) - obs.head(r));
      for (Eigen::Index k = 0; k < r; ++k) theta_steps.push_back(std::abs(step[k]));
      for (Eigen::Index k = 0; k < nv; ++k) w_steps.push_back(std::abs(d.g[r + k] - obs[r + k]));
    }
    const double num = median(theta_steps);
    const double den = median(w_steps);
    out.sigma_gain = (den > 0 && num > 0) ? num / den : initial_gain_theta;
  }
  return out;
}

EstimationResult phase2(const ModelSpec& spec, const PanelData& panel, const ParameterPoint& pp0,
                        const Phase2Schedule& schedule, const Phase1Result& phase1,
                        std::uint64_t seed) {
  schedule.validate();
  const Simulator sim(spec, panel.covariates);
  pp0.validate(spec);
  const auto r = static_cast<Eigen::Index>(1 + spec.p());
  const auto nv = static_cast<Eigen::Index>(spec.n_variance_params());
  const auto q = static_cast<Eigen::Index>(spec.q());
  if (phase1.D0_inv.rows() != r || phase1.D0_inv.cols() != r)
    throw ValidationError("preconditioner does not match the model");

  const Eigen::VectorXd obs = observed_statistics(sim.statistics(), panel);
  const double zeta0 = schedule.initial_gain_sigma.value_or(
      phase1.sigma_gain > 0 ? phase1.sigma_gain : schedule.initial_gain_theta);

  EstimationResult res;
  res.parameter_labels = spec.parameter_labels();
  res.chain.reserve(static_cast<std::size_t>(schedule.total_iterations()));

  Engine rng = make_stream(seed, Stream::Phase2, 0);
  ParameterPoint pp = pp0;
  if (q > 0) {
    // start inside the feasible region
    if (spec.variance_model == VarianceModel::Unrestricted)
      pp.sigma = project_pd(pp.sigma, schedule.sigma_min);
    else
      pp.sigma.diagonal() = pp.sigma.diagonal().cwiseMax(schedule.sigma_min);
  }

  double gain = schedule.initial_gain_theta;
  double zeta = zeta0;
  for (std::size_t k = 0; k < schedule.subphase_lengths.size(); ++k) {
    const int len = schedule.subphase_lengths[k];
    const int tail = schedule.tail_lengths[k];
    Eigen::VectorXd tail_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.n_params()));
    for (int it = 0; it < len; ++it) {
      const SimOutcome o = sim.simulate(panel.wave1, pp, rng);
      const Eigen::VectorXd dev = o.g_hat - obs;
      Eigen::VectorXd theta = pp.to_vector(spec);

      const Eigen::VectorXd step = gain * phase1.D0_inv * dev.head(r);
      const double lambda_old = theta[0];
      theta.head(r) -= step;
      if (theta[0] <= 0.0) theta[0] = 0.5 * lambda_old;

      ParameterPoint next = ParameterPoint::from_vector(spec, theta);
      if (nv > 0) {
        switch (spec.variance_model) {
          case VarianceModel::Scalar: {
            const double s2 = std::max(pp.sigma(0, 0) - zeta * dev[r], schedule.sigma_min);
            next.sigma = Eigen::MatrixXd::Identity(q, q) * s2;
            break;
          }
          case VarianceModel::Diagonal:
            for (Eigen::Index h = 0; h < q; ++h)
              next.sigma(h, h) = std::max(pp.sigma(h, h) - zeta * dev[r + h], schedule.sigma_min);
            break;
          case VarianceModel::Unrestricted: {
            Eigen::MatrixXd dW(q, q);
            Eigen::Index c = 0;
            for (Eigen::Index h = 0; h < q; ++h)
              for (Eigen::Index l = h; l < q; ++l) dW(h, l) = dW(l, h) = dev[r + c++];
            next.sigma = project_pd(pp.sigma - zeta * dW, schedule.sigma_min);
            break;
          }
        }
      }
      pp = next;
      theta = pp.to_vector(spec);
      res.chain.push_back(ChainRow{static_cast<int>(k) + 1, gain, nv > 0 ? zeta : 0.0, theta, dev});

      if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > schedule.divergence_bound) {
        std::ostringstream msg;
        msg << "Phase 2 diverged in subphase " << k + 1 << " at iteration " << it + 1
            << ": parameters";
        for (Eigen::Index j = 0; j < theta.size(); ++j)
          msg << ' ' << res.parameter_labels[static_cast<std::size_t>(j)] << '=' << theta[j];
        throw ChainDivergence(msg.str(), std::move(res.chain), res.parameter_labels);
      }
      if (it >= len - tail) tail_sum += theta;
    }
    pp = ParameterPoint::from_vector(spec, tail_sum / static_cast<double>(tail));
    gain *= schedule.gain_reduction;
    zeta *= schedule.gain_reduction;
  }
  res.theta_hat = pp;
  return res;
}

int MonteCarloSummaries::find(const std::string& label) const {
  for (std::size_t k = 0; k < statistics.size(); ++k)
    if (statistics[k].label() == label) return static_cast<int>(k);
  return -1;
}

void summarize(MonteCarloSummaries& s) {
  const double T = static_cast<double>(s.rows.rows());
  if (T < 1) throw DegeneracyError("no Monte-Carlo replicates to summarize");
  s.T = static_cast<int>(s.rows.rows());
  s.m_bar = s.rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = s.rows.rowwise() - s.m_bar.transpose();
  s.V_hat = centered.transpose() * centered / T;
  const Eigen::MatrixXd dev = s.rows.rowwise() - s.observed.transpose();
  s.D_hat = dev.transpose() * s.scores / T;
}

MonteCarloSummaries phase3(const ModelSpec& spec, const PanelData& panel,
                           const ParameterPoint& theta_hat, int T, std::uint64_t seed,
                           const Phase3Options& options) {
  if (T < 1) throw ValidationError("Phase 3 needs at least one replicate");
  const Simulator sim(spec, panel.covariates);
  theta_hat.validate(spec);

  MonteCarloSummaries s;
  s.statistics = sim.statistics();
  s.n_estimation = s.statistics.size();
  s.parameter_labels = spec.parameter_labels();
  s.theta = theta_hat;
  s.variance_model = spec.variance_model;
  s.p = spec.p();
  s.q = spec.q();
  auto add = [&](const StatisticDef& d) {
    if (std::find(s.statistics.begin(), s.statistics.end(), d) == s.statistics.end())
      s.statistics.push_back(d);
  };
  // the overdispersion test of a model without random effects needs this row
  if (spec.q() == 0) add(StatisticDef::dispersion({EffectDef{EffectKind::OutDegree, {}}}));
  for (const auto& d : options.extra_statistics) add(d);

  s.observed = observed_statistics(s.statistics, panel);
  const bool with_aux = options.aux_max_degree >= 0;
  if (with_aux) s.observed_aux = out_degree_distribution(panel.wave2, options.aux_max_degree);

  struct Row {
    Eigen::VectorXd g, l, a;
  };
  auto results = run_replicates<DegeneracyError>(
      static_cast<std::size_t>(T),
      [&](std::size_t t) {
        Engine rng = make_stream(seed, Stream::Phase3, t);
        const SimOutcome o = sim.simulate(panel.wave1, theta_hat, rng);
        Row row;
        row.g = evaluate_statistics(s.statistics, panel.wave1, o.end_network, panel.covariates);
        row.l = o.scores.as_vector();
        if (with_aux) row.a = out_degree_distribution(o.end_network, options.aux_max_degree);
        return row;
      },
      options.execution);

  std::vector<const Row*> ok;
  for (const auto& r : results)
    if (r) ok.push_back(&*r);
  s.aborted = T - static_cast<int>(ok.size());
  if (static_cast<double>(s.aborted) > options.max_abort_fraction * T || ok.empty())
    throw DegeneracyError("Phase 3: " + std::to_string(s.aborted) + " of " + std::to_string(T) +
                          " simulations degenerated");

  const auto n = static_cast<Eigen::Index>(ok.size());
  s.rows.resize(n, static_cast<Eigen::Index>(s.statistics.size()));
  s.scores.resize(n, ok.front()->l.size());
  if (with_aux) s.aux.resize(n, s.observed_aux.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    s.rows.row(t) = ok[static_cast<std::size_t>(t)]->g.transpose();
    s.scores.row(t) = ok[static_cast<std::size_t>(t)]->l.transpose();
    if (with_aux) s.aux.row(t) = ok[static_cast<std::size_t>(t)]->a.transpose();
  }
  summarize(s);
  return s;
}

ConvergenceReport convergence_check(const MonteCarloSummaries& s) {
  const auto g = static_cast<Eigen::Index>(s.n_estimation);
  ConvergenceReport rep;
  rep.t_ratios.resize(g);
  const Eigen::VectorXd d = s.m_bar.head(g) - s.observed.head(g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const double v = s.V_hat(k, k);
    if (v > 0) {
      rep.t_ratios[k] = d[k] / std::sqrt(v);
    } else if (d[k] == 0.0) {
      rep.t_ratios[k] = 0.0;
    } else {
      throw DegeneracyError("statistic '" + s.statistics[static_cast<std::size_t>(k)].label() +
                            "' is constant across simulations and misses its target");
    }
  }
  const Eigen::MatrixXd V = s.V_hat.topLeftCorner(g, g);
  const Eigen::VectorXd sol = V.completeOrthogonalDecomposition().solve(d);
  rep.max_convergence_ratio = std::sqrt(std::max(0.0, d.dot(sol)));
  rep.converged = (rep.t_ratios.size() == 0 || rep.t_ratios.cwiseAbs().maxCoeff() < 0.1) &&
                  rep.max_convergence_ratio < 0.25;
  return rep;
}

ParameterPoint default_start(const ModelSpec& spec, const PanelData& panel, double sigma_min) {
  const double n = static_cast<double>(panel.n_actors());
  ParameterPoint pp;
  const double dist = hamming_distance(panel.wave1, panel.wave2);
  pp.lambda = std::max(dist / n * n / std::max(n - 1.0, 1.0), 0.5);
  pp.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.p()));
  const double pairs = n * (n - 1.0);
  const double dens = std::clamp(pairs > 0 ? panel.wave2.tie_count() / pairs : 0.5, 0.01, 0.99);
  for (std::size_t k = 0; k < spec.p(); ++k)
    if (spec.fixed_effects[k].kind == EffectKind::OutDegree)
      pp.beta[static_cast<Eigen::Index>(k)] = std::log(dens / (1.0 - dens));
  const auto q = static_cast<Eigen::Index>(spec.q());
  pp.sigma = Eigen::MatrixXd::Identity(q, q) * sigma_min;
  return pp;
}

FullEstimate estimate(const ModelSpec& spec, const PanelData& panel, const ParameterPoint& start,
                      const EstimateOptions& options, std::uint64_t seed) {
  FullEstimate out;
  out.phase1 = options.phase1
                   ? *options.phase1
                   : phase1_precondition(spec, panel, start, options.phase1_replicates, seed,
                                         options.schedule.diagonalize,
                                         options.schedule.initial_gain_theta,
                                         options.phase3.execution);
  out.estimation = phase2(spec, panel, start, options.schedule, out.phase1, seed);
  out.summaries = phase3(spec, panel, out.estimation.theta_hat, options.phase3_replicates, seed,
                         options.phase3);
  const ConvergenceReport c = convergence_check(out.summaries);
  out.estimation.t_ratios = c.t_ratios;
  out.estimation.max_convergence_ratio = c.max_convergence_ratio;
  out.estimation.converged = c.converged;
  return out;
}

}  // namespace saomre
