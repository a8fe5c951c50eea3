#include <cmath>
#include <vector>

#include "doctest.h"

#include "holonic/errors.hpp"
#include "holonic/learner.hpp"
#include "holonic/output.hpp"

using namespace holonic;

namespace {

GameSpec baseline() {
  return make_public_good(3, 5, PublicGoodParams{3.0, 0.2, 0.1, 0.0});
}

StepSchedule defaults() { return StepSchedule(0.5, 0.5, 0.6, 0.9, 1); }

LearnerState equilibrium_state(const GameSpec& game, const Equilibrium& eq,
                               std::uint64_t seed) {
  std::vector<MomentBelief> b(static_cast<std::size_t>(game.holons));
  for (int i = 0; i < game.holons; ++i) {
    b[static_cast<std::size_t>(i)] = {eq.omega_mean[i], eq.omega_variance[i]};
  }
  return {0, eq.profile(game.agents), BeliefProfile::moments(std::move(b)), seed};
}

}  // namespace

TEST_CASE("schedule values") {
  StepSchedule s = defaults();
  auto [a0, b0] = s.values(0);
  CHECK(a0 == 0.5);
  CHECK(b0 == 0.5);

  auto [a, b] = s.values(1000000);
  CHECK(b / a < 0.016);  // ratio (t+1)^-0.3 at t = 1e6

  // a0/(t+offset)^e at e -> 1: exponent_alpha = 1 itself cannot pair with
  // any valid exponent_beta <= 1, so probe the formula just below 1.
  CHECK(StepSchedule(1.0, 1.0, 0.9999999, 1.0, 1).values(9).first ==
        doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("schedule invariants are enforced at construction") {
  CHECK_THROWS_AS(StepSchedule(0.5, 0.5, 0.9, 0.6, 1), ConfigError);   // swapped
  CHECK_THROWS_AS(StepSchedule(0.5, 0.5, 0.6, 0.6, 1), ConfigError);   // equal
  CHECK_THROWS_AS(StepSchedule(0.5, 0.5, 0.4, 0.9, 1), ConfigError);   // sum alpha^2 diverges
  CHECK_THROWS_AS(StepSchedule(0.5, 0.5, 0.6, 1.1, 1), ConfigError);   // sum beta diverges fails
  CHECK_THROWS_AS(StepSchedule(-0.5, 0.5, 0.6, 0.9, 1), ConfigError);  // a0 <= 0
  CHECK_THROWS_AS(StepSchedule(0.5, 0.5, 0.6, 0.9, 0), ConfigError);   // offset < 1
  CHECK_THROWS_AS(StepSchedule(2.0, 0.5, 0.6, 0.9, 1), ConfigError);   // alpha_0 > 1
  CHECK_NOTHROW(StepSchedule(2.0, 0.5, 0.6, 0.9, 4));  // larger offset allows it
}

TEST_CASE("schedule sums: divergence witnesses and square-sum tails") {
  StepSchedule s = defaults();
  auto [sa, sb] = s.partial_sums(1000000);
  CHECK(sa > 10.0);
  CHECK(sb > 10.0);
  CHECK(sa > sb);  // alpha is the fast timescale

  // The squared-step tail bound is finite, decreasing, and can be driven
  // below 1e-6 at an explicitly computable index.
  double t1 = s.square_sum_tail_bound(1e3);
  double t2 = s.square_sum_tail_bound(1e6);
  CHECK(std::isfinite(t1));
  CHECK(t2 < t1);
  CHECK(s.square_sum_tail_bound(1e31) < 1e-6);

  // Direct Cauchy behavior of the partial sums of squares on a reachable
  // window: increments shrink monotonically.
  auto sq_partial = [&](long T) {
    double total = 0.0;
    for (long t = 0; t < T; ++t) {
      auto [a, b] = s.values(t);
      total += a * a + b * b;
    }
    return total;
  };
  double inc1 = sq_partial(20000) - sq_partial(10000);
  double inc2 = sq_partial(40000) - sq_partial(20000);
  double inc3 = sq_partial(80000) - sq_partial(40000);
  CHECK(inc2 < inc1);
  CHECK(inc3 < inc2);
}

TEST_CASE("step at the exact equilibrium is stationary in moment mode") {
  for (double rho : {0.0, 0.5}) {
    GameSpec game = rho == 0.0
                        ? baseline()
                        : make_coupled_incentive(3, 5, PublicGoodParams{3.0, 0.2, 0.1, rho});
    Equilibrium eq = analytic_equilibrium(game);
    LearnerState state = equilibrium_state(game, eq, 7);
    LearnerOptions options;
    StepResult res = step_with_rates(game, state, 0.5, 0.5, options);
    CHECK(profile_distance(res.state.profile, state.profile) <= 1e-12);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(res.state.beliefs.mean(i) - state.beliefs.mean(i)) <= 1e-12);
    }
    CHECK(res.eps <= 1e-12);
  }
}

TEST_CASE("step with zero rates leaves the state untouched") {
  GameSpec game = baseline();
  LearnerOptions options;
  LearnerState state = initial_state(game, BeliefMode::Moment, 11);
  state.profile.intercepts.setConstant(0.31);
  StepResult res = step_with_rates(game, state, 0.0, 0.0, options);
  CHECK((res.state.profile.intercepts.array() == 0.31).all());
  CHECK(res.state.beliefs.mean(0) == state.beliefs.mean(0));
  CHECK(res.state.t == state.t + 1);
}

TEST_CASE("gamma = 0: one holon's beliefs cannot influence another's update") {
  GameSpec game = make_decoupled(3, 5, 3.0, 0.2);
  LearnerOptions options;
  LearnerState a = initial_state(game, BeliefMode::Moment, 13);
  LearnerState b = a;
  std::vector<MomentBelief> perturbed{{0.0, 0.0}, {0.9, 0.1}, {0.0, 0.0}};
  b.beliefs = BeliefProfile::moments(std::move(perturbed));
  StepResult ra = step_with_rates(game, a, 0.5, 0.5, options);
  StepResult rb = step_with_rates(game, b, 0.5, 0.5, options);
  for (int i : {0, 2}) {
    CHECK(ra.state.beliefs.mean(i) == rb.state.beliefs.mean(i));
    CHECK(ra.state.profile.intercepts(i, 0) == rb.state.profile.intercepts(i, 0));
  }
  CHECK(ra.state.beliefs.mean(1) != rb.state.beliefs.mean(1));
}

TEST_CASE("baseline run converges to the closed-form equilibrium") {
  GameSpec game = baseline();
  Equilibrium eq = analytic_equilibrium(game);
  LearnerOptions options;
  options.iterations = 5000;
  options.seed = 7;
  auto reference = make_reference(game, eq, options.mode, 1024, options.seed);
  auto [state, trace] = run(game, defaults(), options, reference);

  CHECK(std::abs(state.profile.mean_slope() + 0.2) < 0.02);
  CHECK(std::abs(state.profile.mean_intercept() - 0.6) < 0.02);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(state.beliefs.mean(i) - 0.125) < 0.02);
  }
  CHECK(trace.rows.size() == 5000);

  // d_t is non-increasing after burn-in on the affine moment dynamics.
  for (std::size_t t = 100; t + 1 < trace.rows.size(); ++t) {
    CHECK(trace.rows[t + 1].d_t <= trace.rows[t].d_t + 1e-9);
  }

  // Tracking error settles: late-window mean far below the early window.
  double early = 0.0, late = 0.0;
  for (int t = 0; t < 1000; ++t) early += trace.rows[static_cast<std::size_t>(t)].eps_t;
  for (int t = 4000; t < 5000; ++t) late += trace.rows[static_cast<std::size_t>(t)].eps_t;
  CHECK(late < early);

  // Risk is sampled every 100 iterations and settles near the
  // closed-form equilibrium risk.
  CHECK(std::isfinite(trace.rows[0].risk));
  CHECK(!std::isfinite(trace.rows[1].risk));
  CHECK(trace.rows[4900].risk == doctest::Approx(2.31083).epsilon(0.01));
}

TEST_CASE("incentive variant run reaches 1/3") {
  GameSpec game = make_coupled_incentive(3, 5, PublicGoodParams{3.0, 0.2, 0.1, 0.5});
  LearnerOptions options;
  options.iterations = 10000;
  options.seed = 7;
  options.risk_every = 0;  // skip risk sampling for speed
  auto [state, trace] = run(game, defaults(), options);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(state.beliefs.mean(i) - 1.0 / 3.0) < 0.02);
  }
}

TEST_CASE("identical seeds give bit-identical traces") {
  GameSpec game = baseline();
  LearnerOptions options;
  options.iterations = 400;
  options.seed = 99;
  options.mode = BeliefMode::Particle;
  options.n_samples = 64;
  auto [s1, t1] = run(game, defaults(), options);
  auto [s2, t2] = run(game, defaults(), options);
  CHECK(trace_csv(t1) == trace_csv(t2));
  CHECK(s1.beliefs.mean(0) == s2.beliefs.mean(0));
  options.seed = 100;
  auto [s3, t3] = run(game, defaults(), options);
  CHECK(trace_csv(t1) != trace_csv(t3));
  CHECK(s3.t == s1.t);
}

TEST_CASE("fast update stays in the interval hull of mu_t and B(mu_t)") {
  GameSpec game = make_coupled_incentive(3, 5, PublicGoodParams{3.0, 0.2, 0.1, 0.5});
  LearnerOptions options;
  StepSchedule schedule = defaults();
  LearnerState state = initial_state(game, BeliefMode::Moment, 21);
  for (int t = 0; t < 50; ++t) {
    StrategyProfile br =
        best_response_operator(game, state.profile, state.beliefs, options.solver,
                               Stream(0))
            .profile;
    StepResult res = step(game, state, schedule, options);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 5; ++k) {
        double lo = std::min(state.profile.intercepts(i, k), br.intercepts(i, k));
        double hi = std::max(state.profile.intercepts(i, k), br.intercepts(i, k));
        CHECK(res.state.profile.intercepts(i, k) >= lo - 1e-15);
        CHECK(res.state.profile.intercepts(i, k) <= hi + 1e-15);
        lo = std::min(state.profile.slopes(i, k), br.slopes(i, k));
        hi = std::max(state.profile.slopes(i, k), br.slopes(i, k));
        CHECK(res.state.profile.slopes(i, k) >= lo - 1e-15);
        CHECK(res.state.profile.slopes(i, k) <= hi + 1e-15);
      }
    }
    state = res.state;
  }
}

TEST_CASE("particle-mode run: log distance to the reference trends down") {
  GameSpec game = baseline();
  Equilibrium eq = analytic_equilibrium(game);
  LearnerOptions options;
  options.mode = BeliefMode::Particle;
  options.iterations = 5000;
  options.n_samples = 256;
  options.seed = 3;
  options.risk_every = 0;
  auto reference = make_reference(game, eq, options.mode, 4096, options.seed);
  auto [state, trace] = run(game, defaults(), options, reference);

  // Least-squares slope of log d_t over t in [500, 5000).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int t = 500; t < 5000; ++t) {
    double y = std::log(trace.rows[static_cast<std::size_t>(t)].d_t);
    double x = static_cast<double>(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  CHECK(slope < 0.0);
  CHECK(std::abs(state.beliefs.mean(0) - 0.125) < 0.02);
}

TEST_CASE("realized coupling semantics converges to the same means") {
  GameSpec game = baseline();
  game.coupling = CouplingSemantics::Realized;
  LearnerOptions options;
  options.iterations = 3000;
  options.risk_every = 0;
  auto [state, trace] = run(game, defaults(), options);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(state.beliefs.mean(i) - 0.125) < 0.02);
  }
  // The simultaneous system feeds the other holons' variance back in.
  CHECK(state.beliefs.variance(0) > 1.0 / 1500.0);
}

TEST_CASE("beta-distributed types: closed form and learner agree") {
  GameSpec game = make_public_good(3, 5, PublicGoodParams{3.0, 0.2, 0.1, 0.0},
                                   TypeDistribution::beta(2.0, 5.0));
  Equilibrium eq = analytic_equilibrium(game);
  double c = (3.0 - 2.0 / 7.0) / 5.0;
  double expected_mean = (c - 0.2 - 0.2) / 0.8;
  CHECK(eq.omega_mean[0] == doctest::Approx(expected_mean).epsilon(1e-13));

  SolverConfig solver;
  PicardResult picard =
      picard_fixed_point(game, solver, BeliefMode::Moment, 1, 512, Stream(41));
  CHECK(std::abs(picard.beliefs.mean(0) - expected_mean) < 1e-10);

  LearnerOptions options;
  options.iterations = 4000;
  options.risk_every = 0;
  auto [state, trace] = run(game, defaults(), options);
  CHECK(std::abs(state.beliefs.mean(1) - expected_mean) < 0.02);
}

TEST_CASE("tracking_error vanishes at the equilibrium") {
  GameSpec game = baseline();
  Equilibrium eq = analytic_equilibrium(game);
  LearnerState before = equilibrium_state(game, eq, 5);
  LearnerOptions options;
  StepResult res = step_with_rates(game, before, 0.4, 0.3, options);
  CHECK(tracking_error(before, res.state, game, options.solver) <= 1e-13);
}

TEST_CASE("the t_argument switch selects the profile fed to T") {
  GameSpec game = make_coupled_incentive(3, 5, PublicGoodParams{3.0, 0.2, 0.1, 0.5});
  LearnerOptions next;
  LearnerOptions current;
  current.update_with_next_profile = false;
  LearnerState state = initial_state(game, BeliefMode::Moment, 31);
  // T(q_0, mu_1) vs T(q_0, mu_0): mu_0 is all zeros, mu_1 is not, so the
  // first belief update already separates the two conventions.
  StepResult a1 = step_with_rates(game, state, 0.5, 0.5, next);
  StepResult b1 = step_with_rates(game, state, 0.5, 0.5, current);
  CHECK(a1.state.beliefs.mean(0) != b1.state.beliefs.mean(0));
}
