#include "holonic/learner.hpp"

#include <cmath>

#include "holonic/errors.hpp"

namespace holonic {

StepSchedule::StepSchedule(double a0, double b0, double exponent_alpha,
                           double exponent_beta, int offset)
    : a0_(a0),
      b0_(b0),
      exponent_alpha_(exponent_alpha),
      exponent_beta_(exponent_beta),
      offset_(offset) {
  if (!(a0 > 0.0) || !(b0 > 0.0)) {
    throw ConfigError("step-size scales a0, b0 must be > 0");
  }
  if (offset < 1) throw ConfigError("schedule offset must be >= 1");
  if (!(exponent_alpha > 0.5) || !(exponent_beta > 0.5)) {
    throw ConfigError(
        "schedule exponents must exceed 1/2 so the squared step sums converge");
  }
  if (!(exponent_alpha <= 1.0) || !(exponent_beta <= 1.0)) {
    throw ConfigError("schedule exponents must be <= 1 so the step sums diverge");
  }
  if (!(exponent_beta > exponent_alpha)) {
    throw ConfigError(
        "exponent_beta must exceed exponent_alpha (beta_t/alpha_t -> 0)");
  }
  if (a0 > std::pow(static_cast<double>(offset), exponent_alpha) ||
      b0 > std::pow(static_cast<double>(offset), exponent_beta)) {
    throw ConfigError("a0 and b0 must keep the first step within (0, 1]");
  }
}

std::pair<double, double> StepSchedule::values(long t) const {
  if (t < 0) throw InvalidArgumentError("schedule evaluated at t < 0");
  double base = static_cast<double>(t) + static_cast<double>(offset_);
  return {a0_ / std::pow(base, exponent_alpha_),
          b0_ / std::pow(base, exponent_beta_)};
}

std::pair<double, double> StepSchedule::partial_sums(long T) const {
  double sa = 0.0, sb = 0.0;
  for (long t = 0; t < T; ++t) {
    auto [a, b] = values(t);
    sa += a;
    sb += b;
  }
  return {sa, sb};
}

double StepSchedule::square_sum_tail_bound(double T) const {
  // sum_{t >= T} c^2 (t+offset)^-2e <= c^2 (T-1+offset)^(1-2e) / (2e-1).
  auto tail = [this, T](double c, double e) {
    double base = T - 1.0 + static_cast<double>(offset_);
    return c * c * std::pow(base, 1.0 - 2.0 * e) / (2.0 * e - 1.0);
  };
  return tail(a0_, exponent_alpha_) + tail(b0_, exponent_beta_);
}

LearnerState initial_state(const GameSpec& game, BeliefMode mode,
                           std::uint64_t seed) {
  // Pessimistic cold start: zero contribution, beliefs at a point mass on 0.
  return {0, StrategyProfile::zeros(game.holons, game.agents),
          BeliefProfile::point_masses(game.holons, 0.0, mode), seed};
}

ReferencePoint make_reference(const GameSpec& game, const Equilibrium& eq,
                              BeliefMode mode, int particle_count,
                              std::uint64_t seed) {
  ReferencePoint ref{eq, {}};
  if (mode == BeliefMode::Particle) {
    StrategyProfile profile = eq.profile(game.agents);
    std::vector<MomentBelief> beliefs(static_cast<std::size_t>(game.holons));
    for (int i = 0; i < game.holons; ++i) {
      beliefs[static_cast<std::size_t>(i)] = {eq.omega_mean[i], 0.0};
    }
    BeliefProfile q = BeliefProfile::moments(std::move(beliefs));
    Stream rng = Stream(seed).child("reference");
    for (int i = 0; i < game.holons; ++i) {
      ref.particles.push_back(pushforward_particles(
          game, i, profile, q, particle_count,
          rng.child(static_cast<std::uint64_t>(i))));
    }
  }
  return ref;
}

StepResult step_with_rates(const GameSpec& game, const LearnerState& state,
                           double alpha, double beta,
                           const LearnerOptions& options) {
  Stream root(state.seed);
  Stream iter = root.child("step").child(static_cast<std::uint64_t>(state.t));

  BestResponseResult br = best_response_operator(
      game, state.profile, state.beliefs, options.solver, iter.child("br"));

  StrategyProfile next_profile{
      (1.0 - alpha) * state.profile.slopes + alpha * br.profile.slopes,
      (1.0 - alpha) * state.profile.intercepts + alpha * br.profile.intercepts};

  // mu'(q_t) is already in hand, so the tracking-error surrogate is free.
  double eps = profile_distance(next_profile, br.profile);

  const StrategyProfile& target_profile =
      options.update_with_next_profile ? next_profile : state.profile;
  BeliefProfile target = outcome_operator(game, state.beliefs, target_profile,
                                          options.n_samples, iter.child("push"));
  BeliefProfile next_beliefs = mixture(state.beliefs, target, beta,
                                       options.particle_cap, iter.child("mix"));

  return {{state.t + 1, std::move(next_profile), std::move(next_beliefs),
           state.seed},
          eps, br.converged};
}

StepResult step(const GameSpec& game, const LearnerState& state,
                const StepSchedule& schedule, const LearnerOptions& options) {
  auto [alpha, beta] = schedule.values(state.t);
  return step_with_rates(game, state, alpha, beta, options);
}

namespace {

double reference_distance(const BeliefProfile& beliefs,
                          const ReferencePoint& ref) {
  double d = 0.0;
  for (int i = 0; i < beliefs.holons(); ++i) {
    double di = beliefs.mode() == BeliefMode::Moment
                    ? std::abs(beliefs.mean(i) - ref.equilibrium.omega_mean[i])
                    : wasserstein1(beliefs.particle(i),
                                   ref.particles[static_cast<std::size_t>(i)]);
    d = std::max(d, di);
  }
  return d;
}

}  // namespace

std::pair<LearnerState, Trace> run(
    const GameSpec& game, const StepSchedule& schedule,
    const LearnerOptions& options,
    const std::optional<ReferencePoint>& reference) {
  if (options.iterations < 1) throw ConfigError("iterations must be >= 1");
  LearnerState state = initial_state(game, options.mode, options.seed);
  Trace trace;
  trace.holons = game.holons;
  trace.rows.reserve(static_cast<std::size_t>(options.iterations));
  Stream root(options.seed);

  for (long t = 0; t < options.iterations; ++t) {
    auto [alpha, beta] = schedule.values(t);
    StepResult res = step_with_rates(game, state, alpha, beta, options);
    state = std::move(res.state);

    TraceRow row;
    row.t = t;
    row.alpha = alpha;
    row.beta = beta;
    row.belief_means = state.beliefs.means();
    row.theta0_avg = state.profile.mean_intercept();
    row.theta1_avg = state.profile.mean_slope();
    row.eps_t = res.eps;
    if (reference) row.d_t = reference_distance(state.beliefs, *reference);
    if (options.risk_every > 0 && t % options.risk_every == 0) {
      row.risk = mean_holonic_risk(
          game, state.profile, state.beliefs, options.risk_samples,
          root.child("risk").child(static_cast<std::uint64_t>(t)));
    }
    trace.rows.push_back(std::move(row));
  }
  return {std::move(state), std::move(trace)};
}

double tracking_error(const LearnerState& before, const LearnerState& after,
                      const GameSpec& game, const SolverConfig& solver) {
  Stream root(before.seed);
  Stream rng = root.child("tracking").child(static_cast<std::uint64_t>(before.t));
  BestResponseResult target =
      best_response_operator(game, before.profile, before.beliefs, solver, rng);
  return profile_distance(after.profile, target.profile);
}

}  // namespace holonic
