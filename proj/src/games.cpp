#include "holonic/games.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "holonic/errors.hpp"

namespace holonic {

double coupled_threshold(const GameSpec& game,
                         const Eigen::VectorXd& external_means) {
  const auto& p = game.params;
  return p.kappa + p.gamma * (1.0 - external_means.array()).sum();
}

double outcome_map(const GameSpec& game, int holon,
                   const Eigen::VectorXd& actions,
                   const Eigen::VectorXd& external_means) {
  double X = actions.mean();
  double omega = X - coupled_threshold(game, external_means);
  if (!std::isfinite(omega)) {
    throw NumericError("outcome map produced a non-finite value", holon);
  }
  return omega;
}

double incentive_weight(const GameSpec& game,
                        const Eigen::VectorXd& external_means) {
  if (game.params.rho == 0.0) return 1.0;
  double fbar = (1.0 - external_means.array()).mean();
  return 1.0 + game.params.rho * fbar;
}

double agent_cost(const GameSpec& game, int holon, double x, double omega,
                  double xi, double incentive) {
  return 0.5 * x * x + (1.0 - omega) * (game.penalty(holon) - xi) * incentive;
}

double analytic_best_response(const GameSpec& game, int holon, double xi,
                              const Eigen::VectorXd& external_means) {
  double w = incentive_weight(game, external_means);
  double x = (game.penalty(holon) - xi) * w / static_cast<double>(game.agents);
  return std::clamp(x, 0.0, 1.0);
}

LinearClippedStrategy best_response_strategy(
    const GameSpec& game, int holon, const Eigen::VectorXd& external_means) {
  double x0 = analytic_best_response(game, holon, 0.0, external_means);
  double x1 = analytic_best_response(game, holon, 1.0, external_means);
  return {x1 - x0, x0};
}

StrategyProfile Equilibrium::profile(int agents) const {
  int holons = static_cast<int>(slope.size());
  StrategyProfile p = StrategyProfile::zeros(holons, agents);
  for (int i = 0; i < holons; ++i) {
    p.slopes.row(i).setConstant(slope[i]);
    p.intercepts.row(i).setConstant(intercept[i]);
  }
  return p;
}

namespace {

// Interior check of a fitted strategy: the underlying affine responder
// must stay strictly inside (0, 1) at both type extremes.
void require_interior(const GameSpec& game, int holon, double w) {
  double n = static_cast<double>(game.agents);
  double x0 = game.penalty(holon) * w / n;
  double x1 = (game.penalty(holon) - 1.0) * w / n;
  if (!(x0 > 0.0 && x0 < 1.0 && x1 > 0.0 && x1 < 1.0)) {
    std::ostringstream msg;
    msg << "equilibrium actions for holon " << holon
        << " are not interior (x(0)=" << x0 << ", x(1)=" << x1
        << "); the closed form requires unclipped strategies";
    throw UnsupportedRegimeError(msg.str());
  }
}

}  // namespace

Equilibrium analytic_equilibrium(const GameSpec& game) {
  const auto& p = game.params;
  const int M = game.holons;
  const double n = static_cast<double>(game.agents);
  const double type_mean = game.types.mean();

  Eigen::VectorXd means(M);
  if (p.gamma == 0.0 && p.rho == 0.0) {
    // Decoupled: per-holon fixed point E[omega]_i = (D_i - E[xi])/n - kappa.
    for (int i = 0; i < M; ++i) {
      means[i] = (game.penalty(i) - type_mean) / n - p.kappa;
    }
  } else {
    // Symmetric case. With c = (D - E[xi])/n the two affine equilibrium
    // equations
    //   E[X] = c * (1 + rho*(1 - m)),   m = E[X] - kappa - gamma*(M-1)*(1 - m)
    // reduce to m * (1 + c*rho - gamma*(M-1)) = c*(1 + rho) - kappa - gamma*(M-1).
    const double c = (p.D - type_mean) / n;
    const double gM = p.gamma * static_cast<double>(M - 1);
    const double denom = 1.0 + c * p.rho - gM;
    if (std::abs(denom) < 1e-12) {
      throw UnsupportedRegimeError("equilibrium system is singular");
    }
    means.setConstant((c * (1.0 + p.rho) - p.kappa - gM) / denom);
  }

  Equilibrium eq;
  eq.slope.resize(M);
  eq.intercept.resize(M);
  eq.omega_mean = means;
  eq.omega_variance.resize(M);
  BeliefProfile beliefs = BeliefProfile::moments([&] {
    std::vector<MomentBelief> b(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) b[static_cast<std::size_t>(i)] = {means[i], 0.0};
    return b;
  }());
  for (int i = 0; i < M; ++i) {
    Eigen::VectorXd ext = beliefs.external_means(i);
    require_interior(game, i, incentive_weight(game, ext));
    // Same fit path as the best-response operator, so the equilibrium is
    // a fixed point of B to machine precision.
    LinearClippedStrategy s = best_response_strategy(game, i, ext);
    eq.slope[i] = s.slope;
    eq.intercept[i] = s.intercept;
    auto mv = game.types.clip_moments(s.slope, s.intercept);
    double var_x = mv ? mv->second
                      : s.slope * s.slope * game.types.variance();
    eq.omega_variance[i] = var_x / n;
  }
  return eq;
}

Eigen::MatrixXd realized_coupling_matrix(const GameSpec& game) {
  const int M = game.holons;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M);
  A.array() -= game.params.gamma;
  A.diagonal().setConstant(1.0);
  return A;
}

void validate_game(const GameSpec& game) {
  const auto& p = game.params;
  std::ostringstream msg;
  if (game.holons < 2) {
    throw ConfigError("holon count M must be >= 2");
  }
  if (game.agents < 1) {
    throw ConfigError("agents per holon n must be >= 1");
  }
  if (!(p.D > 1.0)) {
    throw ConfigError("baseline penalty D must be > 1");
  }
  if (!(p.kappa > 0.0 && p.kappa < 1.0)) {
    throw ConfigError("holonic threshold kappa must lie in (0,1)");
  }
  const double gamma_bound = (1.0 - p.kappa) / static_cast<double>(game.holons - 1);
  if (!(p.gamma >= 0.0 && p.gamma < gamma_bound)) {
    msg << "coupling gamma=" << p.gamma
        << " must satisfy 0 <= gamma < (1-kappa)/(M-1) = " << gamma_bound;
    throw ConfigError(msg.str());
  }
  if (!(p.rho >= 0.0)) {
    throw ConfigError("incentive coupling rho must be >= 0");
  }
  switch (game.kind) {
    case GameKind::PublicGood:
      if (p.rho != 0.0) throw ConfigError("public_good requires rho = 0");
      break;
    case GameKind::CoupledIncentive:
      if (!(p.rho > 0.0)) {
        throw ConfigError("coupled_incentive requires rho > 0");
      }
      break;
    case GameKind::Decoupled:
      if (p.gamma != 0.0 || p.rho != 0.0) {
        throw ConfigError("decoupled requires gamma = 0 and rho = 0");
      }
      break;
  }
  if (game.holon_D.size() != game.holons) {
    throw ConfigError("per-holon penalty vector has wrong length");
  }
  for (int i = 0; i < game.holons; ++i) {
    if (!(game.holon_D[i] > 1.0)) {
      throw ConfigError("per-holon penalty D must be > 1");
    }
    if (game.kind != GameKind::Decoupled && game.holon_D[i] != p.D) {
      throw ConfigError("per-holon penalties are only supported by the decoupled game");
    }
  }
}

namespace {

GameSpec make_game(GameKind kind, int holons, int agents,
                   PublicGoodParams params, Eigen::VectorXd holon_D,
                   TypeDistribution types) {
  GameSpec g;
  g.kind = kind;
  g.holons = holons;
  g.agents = agents;
  g.params = params;
  g.holon_D = holon_D.size() > 0
                  ? std::move(holon_D)
                  : Eigen::VectorXd::Constant(holons, params.D).eval();
  g.types = types;
  validate_game(g);
  return g;
}

}  // namespace

GameSpec make_public_good(int holons, int agents, PublicGoodParams params,
                          TypeDistribution types) {
  return make_game(GameKind::PublicGood, holons, agents, params, {}, types);
}

GameSpec make_coupled_incentive(int holons, int agents, PublicGoodParams params,
                                TypeDistribution types) {
  return make_game(GameKind::CoupledIncentive, holons, agents, params, {}, types);
}

GameSpec make_decoupled(int holons, int agents, double D, double kappa,
                        Eigen::VectorXd holon_D, TypeDistribution types) {
  PublicGoodParams p;
  p.D = D;
  p.kappa = kappa;
  p.gamma = 0.0;
  p.rho = 0.0;
  return make_game(GameKind::Decoupled, holons, agents, p, std::move(holon_D),
                   types);
}

}  // namespace holonic
