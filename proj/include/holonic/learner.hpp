#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "holonic/solvers.hpp"

namespace holonic {

// Step-size schedule alpha_t = a0/(t+offset)^ea, beta_t = b0/(t+offset)^eb.
// Construction enforces the two-timescale conditions: eb > ea so that
// beta_t/alpha_t -> 0, exponents in (1/2, 1] so the sums diverge while the
// squared sums converge, and a0 <= offset^ea (resp. b0) so steps stay in
// (0, 1].
class StepSchedule {
 public:
  StepSchedule(double a0, double b0, double exponent_alpha,
               double exponent_beta, int offset);

  std::pair<double, double> values(long t) const;

  double a0() const { return a0_; }
  double b0() const { return b0_; }
  double exponent_alpha() const { return exponent_alpha_; }
  double exponent_beta() const { return exponent_beta_; }
  int offset() const { return offset_; }

  // Direct partial sums up to (excluding) T, divergence witnesses.
  std::pair<double, double> partial_sums(long T) const;
  // Closed-form upper bound on sum_{t >= T} (alpha_t^2 + beta_t^2); finite
  // for any T >= 1 because both exponents exceed 1/2.
  double square_sum_tail_bound(double T) const;

 private:
  double a0_, b0_, exponent_alpha_, exponent_beta_;
  int offset_;
};

struct LearnerState {
  long t = 0;
  StrategyProfile profile;
  BeliefProfile beliefs;
  std::uint64_t seed = 0;
};

// Reference equilibrium used for trace distances. The particle measures
// are a frozen high-resolution pushforward at the equilibrium, used as
// the W1 reference in particle mode.
struct ReferencePoint {
  Equilibrium equilibrium;
  std::vector<ParticleMeasure> particles;  // empty in moment mode
};

ReferencePoint make_reference(const GameSpec& game, const Equilibrium& eq,
                              BeliefMode mode, int particle_count,
                              std::uint64_t seed);

struct TraceRow {
  long t = 0;
  double alpha = 0.0;
  double beta = 0.0;
  Eigen::VectorXd belief_means;
  double theta0_avg = 0.0;
  double theta1_avg = 0.0;
  double d_t = std::numeric_limits<double>::quiet_NaN();
  double eps_t = std::numeric_limits<double>::quiet_NaN();
  double risk = std::numeric_limits<double>::quiet_NaN();
};

struct Trace {
  int holons = 0;
  std::vector<TraceRow> rows;
};

struct LearnerOptions {
  SolverConfig solver;
  long iterations = 5000;
  int n_samples = 256;
  BeliefMode mode = BeliefMode::Moment;
  int particle_cap = 512;
  std::uint64_t seed = 7;
  // Belief target T(q_t, mu_{t+1}) (the proof's indexing) when true;
  // T(q_t, mu_t) (the displayed algorithm) when false.
  bool update_with_next_profile = true;
  int risk_every = 100;
  int risk_samples = 10000;
};

LearnerState initial_state(const GameSpec& game, BeliefMode mode,
                           std::uint64_t seed);

struct StepResult {
  LearnerState state;
  double eps = 0.0;  // tracking-error surrogate recorded in the trace
  bool br_converged = true;
};

// One iteration with explicit rates: mu' = B(mu_t, q_t);
// mu_{t+1} = (1-alpha) mu_t + alpha mu' (parameter-space mixing);
// q_{t+1} = (1-beta) q_t + beta T(q_t, mu_{t+1} or mu_t).
StepResult step_with_rates(const GameSpec& game, const LearnerState& state,
                           double alpha, double beta,
                           const LearnerOptions& options);

StepResult step(const GameSpec& game, const LearnerState& state,
                const StepSchedule& schedule, const LearnerOptions& options);

// Full run. When a reference is supplied, d_t records the max-holon
// belief distance to the reference after each step.
std::pair<LearnerState, Trace> run(
    const GameSpec& game, const StepSchedule& schedule,
    const LearnerOptions& options,
    const std::optional<ReferencePoint>& reference = std::nullopt);

// Distance between the realized profile mu_{t+1} and the best response to
// the pre-step beliefs mu*(q_t): the surrogate for the tracking error of
// the fast variable.
double tracking_error(const LearnerState& before, const LearnerState& after,
                      const GameSpec& game, const SolverConfig& solver);

}  // namespace holonic
