#pragma once

#include "holonic/games.hpp"
#include "holonic/measures.hpp"
#include "holonic/model.hpp"

namespace holonic {

struct SolverConfig {
  int inner_iterations = 300;    // numeric best-response gradient steps
  double inner_step_size = 1.0;  // step j uses inner_step_size/(1+j)
  int gradient_samples = 1024;   // common-random-number batch size
  double tolerance = 1e-12;      // Picard residual tolerance
  int max_picard_iterations = 200;
  bool force_numeric = false;    // bypass the analytic responder
};

void validate_solver(const SolverConfig& config);

struct BestResponseResult {
  StrategyProfile profile;
  // False when some numeric inner loop hit its iteration budget while
  // still moving; the best iterate is returned regardless.
  bool converged = true;
};

// Best-response operator B: the profile of cost-minimizing strategies
// given the peers' strategies and the beliefs. Analytic games fit theta
// from the responder at xi = 0 and xi = 1; the numeric path runs
// projected finite-difference gradient descent on the Monte Carlo cost
// with common random numbers.
BestResponseResult best_response_operator(const GameSpec& game,
                                          const StrategyProfile& profile,
                                          const BeliefProfile& beliefs,
                                          const SolverConfig& config,
                                          Stream rng);

// Outcome operator T(q, mu): the outcome distribution each holon would
// generate under `profile`, with external coupling read from `beliefs`.
// Realized coupling semantics instead solves the MxM simultaneous system
// on jointly sampled outcomes (diagnostic mode).
BeliefProfile outcome_operator(const GameSpec& game,
                               const BeliefProfile& beliefs,
                               const StrategyProfile& profile, int n_samples,
                               Stream rng);

struct PicardResult {
  StrategyProfile profile;
  BeliefProfile beliefs;
  // Belief updates applied before the fixed-point residual dropped below
  // tolerance; the returned beliefs move by less than the tolerance under
  // one further application of the loop body.
  int iterations = 0;
};

// Picard iteration q <- T(q, B(q)). Throws NonConvergenceError with the
// final residual when max_picard_iterations is exhausted.
PicardResult picard_fixed_point(const GameSpec& game,
                                const SolverConfig& config, BeliefMode mode,
                                int n_samples, int particle_cap, Stream rng);

// Empirical contraction modulus of q -> T(q, B(q)): max over sampled
// belief-profile pairs of distance(T1, T2) / distance(q1, q2). Sampled
// means are uniform in [box_lo, box_hi]; odd trials perturb q1 along a
// common-shift or single-holon direction with log-uniform magnitude,
// which probes the worst-case directions of the max-over-holons metric.
// A value below 1 is empirical evidence for the uniqueness regime.
double contraction_estimate(const GameSpec& game, const SolverConfig& config,
                            int trials, Stream rng,
                            BeliefMode mode = BeliefMode::Moment,
                            int n_samples = 256, double box_lo = 0.0,
                            double box_hi = 1.0);

}  // namespace holonic
