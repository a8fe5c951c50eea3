#pragma once

#include <Eigen/Dense>

#include "holonic/model.hpp"

namespace holonic {

// Holon outcome: X = (sum of actions)/n, coupled threshold
// kappa~ = kappa + gamma * sum_{j != i}(1 - m_j), omega = X - kappa~.
// The margin is not clipped; clipping would destroy the affine structure
// behind the closed-form equilibrium.
double outcome_map(const GameSpec& game, int holon,
                   const Eigen::VectorXd& actions,
                   const Eigen::VectorXd& external_means);

// Coupled threshold alone.
double coupled_threshold(const GameSpec& game,
                         const Eigen::VectorXd& external_means);

// Incentive weight 1 + rho * Fbar with Fbar = mean_{j != i}(1 - m_j).
// Equals 1 for the plain public-good game (rho = 0).
double incentive_weight(const GameSpec& game,
                        const Eigen::VectorXd& external_means);

// Agent cost J = x^2/2 + (1 - omega) * (D_i - xi) * incentive.
double agent_cost(const GameSpec& game, int holon, double x, double omega,
                  double xi, double incentive);

// First-order condition of the cost above: clip((D_i - xi)*w/n, 0, 1).
double analytic_best_response(const GameSpec& game, int holon, double xi,
                              const Eigen::VectorXd& external_means);

// Strategy parameters fitted from the analytic responder at xi = 0 and
// xi = 1 (exact whenever the responder is affine and interior).
LinearClippedStrategy best_response_strategy(
    const GameSpec& game, int holon, const Eigen::VectorXd& external_means);

struct Equilibrium {
  Eigen::VectorXd slope;           // theta_1* per holon
  Eigen::VectorXd intercept;       // theta_0* per holon
  Eigen::VectorXd omega_mean;      // E[omega]* per holon
  Eigen::VectorXd omega_variance;  // Var[omega]* per holon

  StrategyProfile profile(int agents) const;
  double mean_slope() const { return slope.mean(); }
  double mean_intercept() const { return intercept.mean(); }
};

// Closed-form equilibrium of the affine family. Throws
// UnsupportedRegimeError when the implied actions are not interior
// (clipping breaks the closed form).
Equilibrium analytic_equilibrium(const GameSpec& game);

// Matrix A of the realized-coupling system A*omega = X - (kappa +
// gamma*(M-1)) * 1, i.e. A = I - gamma*(ones - I).
Eigen::MatrixXd realized_coupling_matrix(const GameSpec& game);

// Parameter-range validation shared by config loading and constructors.
// Throws ConfigError naming the violated bound.
void validate_game(const GameSpec& game);

GameSpec make_public_good(int holons, int agents, PublicGoodParams params,
                          TypeDistribution types = TypeDistribution::uniform());
GameSpec make_coupled_incentive(int holons, int agents, PublicGoodParams params,
                                TypeDistribution types = TypeDistribution::uniform());
// Independent holons: gamma = rho = 0, optionally heterogeneous penalties.
GameSpec make_decoupled(int holons, int agents, double D, double kappa,
                        Eigen::VectorXd holon_D = {},
                        TypeDistribution types = TypeDistribution::uniform());

}  // namespace holonic
