#include "holonic/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "holonic/errors.hpp"

namespace holonic {

void validate_solver(const SolverConfig& c) {
  if (c.inner_iterations < 1) throw ConfigError("inner_iterations must be >= 1");
  if (!(c.inner_step_size > 0.0)) throw ConfigError("inner_step_size must be > 0");
  if (c.gradient_samples < 1) throw ConfigError("gradient_samples must be >= 1");
  if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) {
    throw ConfigError("tolerance must lie in (0,1)");
  }
  if (c.max_picard_iterations < 1) {
    throw ConfigError("max_picard_iterations must be >= 1");
  }
}

namespace {

constexpr double kThetaBound = 4.0;   // projection box for numeric theta
constexpr double kFdStep = 1e-5;      // central finite-difference step

struct AgentBatch {
  Eigen::VectorXd own_types;      // xi_k per sample
  Eigen::VectorXd peer_sums;      // sum of peers' actions per sample
  Eigen::VectorXd thresholds;     // coupled threshold per sample
  double incentive = 1.0;
  double penalty = 0.0;
  double inv_n = 0.0;
};

// One common-random-number batch shared by every objective evaluation in
// an inner loop: peers' actions and external draws do not depend on the
// agent's own theta, so they are drawn once.
AgentBatch draw_batch(const GameSpec& game, int holon, int agent,
                      const StrategyProfile& profile,
                      const BeliefProfile& beliefs, int samples, Stream& rng) {
  AgentBatch batch;
  const int n = game.agents;
  batch.own_types.resize(samples);
  batch.peer_sums.resize(samples);
  batch.thresholds.resize(samples);
  batch.incentive = incentive_weight(game, beliefs.external_means(holon));
  batch.penalty = game.penalty(holon);
  batch.inv_n = 1.0 / static_cast<double>(n);
  const bool moment = beliefs.mode() == BeliefMode::Moment;
  const double fixed_threshold =
      coupled_threshold(game, beliefs.external_means(holon));
  Eigen::VectorXd ext(game.holons - 1);
  for (int s = 0; s < samples; ++s) {
    batch.own_types[s] = game.types.sample(rng);
    double peer = 0.0;
    for (int l = 0; l < n; ++l) {
      if (l == agent) continue;
      peer += act(profile.strategy(holon, l), game.types.sample(rng));
    }
    batch.peer_sums[s] = peer;
    if (moment) {
      batch.thresholds[s] = fixed_threshold;
    } else {
      int m = 0;
      for (int j = 0; j < game.holons; ++j) {
        if (j == holon) continue;
        const ParticleMeasure& q = beliefs.particle(j);
        double u = rng.uniform01();
        Eigen::Index idx = 0;
        double cum = q.weights()[0];
        while (cum < u && idx + 1 < q.size()) cum += q.weights()[++idx];
        ext[m++] = q.values()[idx];
      }
      batch.thresholds[s] = coupled_threshold(game, ext);
    }
  }
  return batch;
}

double batch_cost(const AgentBatch& b, const LinearClippedStrategy& theta) {
  const int samples = static_cast<int>(b.own_types.size());
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    double xi = b.own_types[s];
    double x = act(theta, xi);
    double omega = (x + b.peer_sums[s]) * b.inv_n - b.thresholds[s];
    total += 0.5 * x * x + (1.0 - omega) * (b.penalty - xi) * b.incentive;
  }
  return total / static_cast<double>(samples);
}

struct NumericBr {
  LinearClippedStrategy theta;
  bool converged = true;
};

NumericBr numeric_best_response(const GameSpec& game, int holon, int agent,
                                const StrategyProfile& profile,
                                const BeliefProfile& beliefs,
                                const SolverConfig& cfg, Stream rng) {
  AgentBatch batch = draw_batch(game, holon, agent, profile, beliefs,
                                cfg.gradient_samples, rng);
  LinearClippedStrategy theta = profile.strategy(holon, agent);
  LinearClippedStrategy best = theta;
  double best_cost = batch_cost(batch, theta);
  double last_move = 0.0;
  for (int j = 0; j < cfg.inner_iterations; ++j) {
    LinearClippedStrategy up = theta, dn = theta;
    up.slope += kFdStep;
    dn.slope -= kFdStep;
    double g_slope = (batch_cost(batch, up) - batch_cost(batch, dn)) / (2.0 * kFdStep);
    up = theta;
    dn = theta;
    up.intercept += kFdStep;
    dn.intercept -= kFdStep;
    double g_intercept =
        (batch_cost(batch, up) - batch_cost(batch, dn)) / (2.0 * kFdStep);
    if (!std::isfinite(g_slope) || !std::isfinite(g_intercept)) {
      throw NumericError("non-finite best-response gradient", holon);
    }
    double step = cfg.inner_step_size / (1.0 + static_cast<double>(j));
    LinearClippedStrategy next{
        std::clamp(theta.slope - step * g_slope, -kThetaBound, kThetaBound),
        std::clamp(theta.intercept - step * g_intercept, -kThetaBound, kThetaBound)};
    last_move = std::max(std::abs(next.slope - theta.slope),
                         std::abs(next.intercept - theta.intercept));
    theta = next;
    double cost = batch_cost(batch, theta);
    if (cost < best_cost) {
      best_cost = cost;
      best = theta;
    }
  }
  return {best, last_move < 1e-3};
}

}  // namespace

BestResponseResult best_response_operator(const GameSpec& game,
                                          const StrategyProfile& profile,
                                          const BeliefProfile& beliefs,
                                          const SolverConfig& config,
                                          Stream rng) {
  BestResponseResult out{StrategyProfile::zeros(game.holons, game.agents), true};
  for (int i = 0; i < game.holons; ++i) {
    if (!config.force_numeric) {
      LinearClippedStrategy s =
          best_response_strategy(game, i, beliefs.external_means(i));
      out.profile.slopes.row(i).setConstant(s.slope);
      out.profile.intercepts.row(i).setConstant(s.intercept);
      continue;
    }
    for (int k = 0; k < game.agents; ++k) {
      Stream agent_rng = rng.child("agent").child(
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(game.agents) +
          static_cast<std::uint64_t>(k));
      NumericBr br =
          numeric_best_response(game, i, k, profile, beliefs, config, agent_rng);
      out.profile.slopes(i, k) = br.theta.slope;
      out.profile.intercepts(i, k) = br.theta.intercept;
      out.converged = out.converged && br.converged;
    }
  }
  return out;
}

namespace {

BeliefProfile realized_outcomes(const GameSpec& game,
                                const StrategyProfile& profile,
                                BeliefMode mode, int n_samples, Stream rng) {
  const int M = game.holons, n = game.agents;
  const Eigen::MatrixXd A = realized_coupling_matrix(game);
  const double shift =
      game.params.kappa + game.params.gamma * static_cast<double>(M - 1);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

  if (mode == BeliefMode::Moment) {
    // Try analytic X moments first; the solved outcomes are affine in the
    // independent per-holon X's.
    Eigen::VectorXd mean_X(M), var_X(M);
    bool closed_form = true;
    for (int i = 0; i < M && closed_form; ++i) {
      double mi = 0.0, vi = 0.0;
      for (int k = 0; k < n; ++k) {
        LinearClippedStrategy s = profile.strategy(i, k);
        auto mv = game.types.clip_moments(s.slope, s.intercept);
        if (!mv) {
          closed_form = false;
          break;
        }
        mi += mv->first;
        vi += mv->second;
      }
      double dn = static_cast<double>(n);
      mean_X[i] = mi / dn;
      var_X[i] = vi / (dn * dn);
    }
    if (closed_form) {
      Eigen::VectorXd means =
          lu.solve((mean_X.array() - shift).matrix().eval());
      Eigen::MatrixXd Ainv = A.inverse();
      std::vector<MomentBelief> out(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) {
        double v = Ainv.row(i).array().square().matrix().dot(var_X);
        out[static_cast<std::size_t>(i)] = {means[i], v};
      }
      return BeliefProfile::moments(std::move(out));
    }
  }

  // Joint sampling: draw every holon's X, solve the coupled system per
  // sample, collect per-holon outcome particles.
  std::vector<Eigen::VectorXd> omegas(static_cast<std::size_t>(M),
                                      Eigen::VectorXd(n_samples));
  Eigen::VectorXd X(M);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < M; ++i) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        sum += act(profile.strategy(i, k), game.types.sample(rng));
      }
      X[i] = sum / static_cast<double>(n);
    }
    Eigen::VectorXd omega = lu.solve((X.array() - shift).matrix().eval());
    for (int i = 0; i < M; ++i) omegas[static_cast<std::size_t>(i)][s] = omega[i];
  }
  if (mode == BeliefMode::Moment) {
    std::vector<MomentBelief> out(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
      ParticleMeasure m = ParticleMeasure::equal_weights(omegas[static_cast<std::size_t>(i)]);
      out[static_cast<std::size_t>(i)] = {m.mean(), m.variance()};
    }
    return BeliefProfile::moments(std::move(out));
  }
  std::vector<ParticleMeasure> out;
  out.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    out.push_back(ParticleMeasure::equal_weights(std::move(omegas[static_cast<std::size_t>(i)])));
  }
  return BeliefProfile::particles(std::move(out));
}

}  // namespace

BeliefProfile outcome_operator(const GameSpec& game,
                               const BeliefProfile& beliefs,
                               const StrategyProfile& profile, int n_samples,
                               Stream rng) {
  if (game.coupling == CouplingSemantics::Realized) {
    return realized_outcomes(game, profile, beliefs.mode(), n_samples,
                             rng.child("joint"));
  }
  if (beliefs.mode() == BeliefMode::Moment) {
    std::vector<MomentBelief> out(static_cast<std::size_t>(game.holons));
    for (int i = 0; i < game.holons; ++i) {
      out[static_cast<std::size_t>(i)] = pushforward_moments(
          game, i, profile, beliefs, n_samples,
          rng.child("holon").child(static_cast<std::uint64_t>(i)));
    }
    return BeliefProfile::moments(std::move(out));
  }
  std::vector<ParticleMeasure> out;
  out.reserve(static_cast<std::size_t>(game.holons));
  for (int i = 0; i < game.holons; ++i) {
    out.push_back(pushforward_particles(
        game, i, profile, beliefs, n_samples,
        rng.child("holon").child(static_cast<std::uint64_t>(i))));
  }
  return BeliefProfile::particles(std::move(out));
}

PicardResult picard_fixed_point(const GameSpec& game,
                                const SolverConfig& config, BeliefMode mode,
                                int n_samples, int particle_cap, Stream rng) {
  validate_solver(config);
  BeliefProfile q = BeliefProfile::point_masses(game.holons, 0.0, mode);
  StrategyProfile mu = StrategyProfile::zeros(game.holons, game.agents);
  double distance = 0.0;
  for (int j = 0; j <= config.max_picard_iterations; ++j) {
    Stream iter = rng.child("picard").child(static_cast<std::uint64_t>(j));
    mu = best_response_operator(game, mu, q, config, iter.child("br")).profile;
    BeliefProfile next =
        outcome_operator(game, q, mu, n_samples, iter.child("push"));
    if (mode == BeliefMode::Particle) {
      // Compression keeps repeated iterates comparable in size.
      std::vector<ParticleMeasure> capped;
      capped.reserve(static_cast<std::size_t>(game.holons));
      for (int i = 0; i < game.holons; ++i) {
        capped.push_back(compress(next.particle(i), particle_cap,
                                  iter.child("compress").child(static_cast<std::uint64_t>(i))));
      }
      next = BeliefProfile::particles(std::move(capped));
    }
    distance = belief_distance(next, q);
    if (distance < config.tolerance) {
      return {std::move(mu), std::move(q), j};
    }
    q = std::move(next);
  }
  std::ostringstream msg;
  msg << "Picard iteration did not converge in " << config.max_picard_iterations
      << " iterations (last belief distance " << distance
      << "); the contraction condition may fail for these parameters";
  throw NonConvergenceError(msg.str(), distance);
}

double contraction_estimate(const GameSpec& game, const SolverConfig& config,
                            int trials, Stream rng, BeliefMode mode,
                            int n_samples, double box_lo, double box_hi) {
  if (trials < 1) throw InvalidArgumentError("contraction_estimate needs trials >= 1");
  const int M = game.holons;
  const StrategyProfile mu0 = StrategyProfile::zeros(M, game.agents);

  auto make_profile = [&](const Eigen::VectorXd& means) {
    if (mode == BeliefMode::Moment) {
      std::vector<MomentBelief> b(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) b[static_cast<std::size_t>(i)] = {means[i], 0.0};
      return BeliefProfile::moments(std::move(b));
    }
    std::vector<ParticleMeasure> b;
    b.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) b.push_back(ParticleMeasure::point_mass(means[i]));
    return BeliefProfile::particles(std::move(b));
  };

  auto apply = [&](const BeliefProfile& q, Stream s) {
    StrategyProfile mu =
        best_response_operator(game, mu0, q, config, s.child("br")).profile;
    return outcome_operator(game, q, mu, n_samples, s.child("push"));
  };

  double estimate = 0.0;
  for (int r = 0; r < trials; ++r) {
    Stream trial = rng.child("trial").child(static_cast<std::uint64_t>(r));
    Eigen::VectorXd m1(M), m2(M);
    double d0 = 0.0;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Stream draw = trial.child("draw").child(static_cast<std::uint64_t>(attempt));
      for (int i = 0; i < M; ++i) m1[i] = draw.uniform(box_lo, box_hi);
      if (r % 2 == 0) {
        for (int i = 0; i < M; ++i) m2[i] = draw.uniform(box_lo, box_hi);
      } else {
        // Directional probe: common shift (every holon) or single holon,
        // log-uniform magnitude down to 1e-4.
        double magnitude = std::pow(10.0, draw.uniform(-4.0, std::log10(0.5)));
        double delta = (draw.uniform01() < 0.5 ? -1.0 : 1.0) * magnitude;
        m2 = m1;
        if (r % 4 == 1) {
          m2.array() += delta;
        } else {
          m2[static_cast<int>(draw.next_u64() % static_cast<std::uint64_t>(M))] += delta;
        }
      }
      d0 = (m1 - m2).cwiseAbs().maxCoeff();
      if (d0 > 1e-12) break;  // degenerate pair: resample, not counted
    }
    if (d0 <= 1e-12) continue;
    BeliefProfile q1 = make_profile(m1);
    BeliefProfile q2 = make_profile(m2);
    double dq = belief_distance(q1, q2);
    if (dq <= 1e-12) continue;
    // Common random numbers across the two applications: the ratio then
    // measures the operator, not sampling noise.
    Stream apply_rng = trial.child("apply");
    double dT = belief_distance(apply(q1, apply_rng), apply(q2, apply_rng));
    estimate = std::max(estimate, dT / dq);
  }
  return estimate;
}

}  // namespace holonic
