#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "holonic/measures.hpp"
#include "holonic/rng.hpp"

namespace holonic {

// Scalar private-type distribution on [0,1], i.i.d. across agents.
class TypeDistribution {
 public:
  static TypeDistribution uniform();
  static TypeDistribution beta(double alpha, double beta);

  double sample(Stream& rng) const;
  double mean() const;
  double variance() const;

  // First two moments of clip(slope*xi + intercept, 0, 1) under this
  // distribution, when available in closed form. Uniform types always
  // have one (piecewise polynomial); Beta types only when the line never
  // leaves [0,1]. Returns (mean, variance).
  std::optional<std::pair<double, double>> clip_moments(double slope,
                                                        double intercept) const;

  bool is_uniform() const { return kind_ == Kind::Uniform; }
  double beta_alpha() const { return alpha_; }
  double beta_beta() const { return beta_; }

 private:
  enum class Kind { Uniform, Beta };
  Kind kind_ = Kind::Uniform;
  double alpha_ = 1.0;
  double beta_ = 1.0;
};

// x = clip(slope*xi + intercept, 0, 1).
struct LinearClippedStrategy {
  double slope = 0.0;
  double intercept = 0.0;
};

double act(const LinearClippedStrategy& strategy, double xi);

// Per-agent strategy parameters for all holons, stored as M x n matrices.
struct StrategyProfile {
  Eigen::MatrixXd slopes;      // theta_1
  Eigen::MatrixXd intercepts;  // theta_0

  static StrategyProfile zeros(int holons, int agents) {
    return {Eigen::MatrixXd::Zero(holons, agents),
            Eigen::MatrixXd::Zero(holons, agents)};
  }
  LinearClippedStrategy strategy(int holon, int agent) const {
    return {slopes(holon, agent), intercepts(holon, agent)};
  }
  int holons() const { return static_cast<int>(slopes.rows()); }
  int agents() const { return static_cast<int>(slopes.cols()); }

  double mean_slope() const { return slopes.mean(); }
  double mean_intercept() const { return intercepts.mean(); }
};

// Max absolute difference over all strategy parameters.
double profile_distance(const StrategyProfile& a, const StrategyProfile& b);

enum class GameKind { PublicGood, CoupledIncentive, Decoupled };

// How the outcome operator couples holons. Belief-mediated coupling reads
// other holons' belief means (the default); realized coupling solves the
// MxM simultaneous linear system on jointly sampled outcomes and exists
// for diagnostics only.
enum class CouplingSemantics { Belief, Realized };

struct PublicGoodParams {
  double D = 3.0;       // baseline penalty
  double kappa = 0.2;   // holonic threshold
  double gamma = 0.1;   // inter-holon coupling
  double rho = 0.0;     // incentive coupling (0 = plain public good)
};

// Full game definition: M holons of n agents each, one cost/outcome
// family with per-kind parameter regimes.
struct GameSpec {
  GameKind kind = GameKind::PublicGood;
  int holons = 3;  // M
  int agents = 5;  // n
  PublicGoodParams params;
  Eigen::VectorXd holon_D;  // per-holon penalty; == params.D unless decoupled
  TypeDistribution types = TypeDistribution::uniform();
  CouplingSemantics coupling = CouplingSemantics::Belief;

  double penalty(int holon) const { return holon_D[holon]; }
};

// Monte Carlo estimate of the agent's conditional expected cost at action
// x and own type xi: peers' types are sampled from the type distribution,
// external outcomes are read from the beliefs (sampled in particle mode,
// taken in closed form from the means in moment mode; the shipped costs
// are affine in external outcomes so the moment path is exact).
double expected_cost(const GameSpec& game, int holon, int agent, double x,
                     double xi, const StrategyProfile& profile,
                     const BeliefProfile& beliefs, int n_samples, Stream rng);

// Holonic risk: like expected_cost but the agent's own type is also
// integrated out, so this is the agent's total risk exposure under the
// given strategies and beliefs.
double holonic_risk(const GameSpec& game, int holon, int agent,
                    const StrategyProfile& profile,
                    const BeliefProfile& beliefs, int n_samples, Stream rng);

// Average of holonic_risk over all agents of all holons, evaluated with
// shared joint draws (one pass).
double mean_holonic_risk(const GameSpec& game, const StrategyProfile& profile,
                         const BeliefProfile& beliefs, int n_samples,
                         Stream rng);

}  // namespace holonic
