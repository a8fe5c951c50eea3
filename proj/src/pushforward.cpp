#include <cmath>

#include "holonic/errors.hpp"
#include "holonic/games.hpp"
#include "holonic/measures.hpp"

namespace holonic {

ParticleMeasure pushforward_particles(const GameSpec& game, int holon,
                                      const StrategyProfile& profile,
                                      const BeliefProfile& beliefs,
                                      int n_samples, Stream rng) {
  if (n_samples < 1) throw InvalidArgumentError("pushforward needs n_samples >= 1");
  const Eigen::VectorXd ext = beliefs.external_means(holon);
  const int n = game.agents;
  Eigen::VectorXd actions(n);
  Eigen::VectorXd omegas(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    for (int k = 0; k < n; ++k) {
      actions[k] = act(profile.strategy(holon, k), game.types.sample(rng));
    }
    omegas[s] = outcome_map(game, holon, actions, ext);
  }
  return ParticleMeasure::equal_weights(std::move(omegas));
}

MomentBelief pushforward_moments(const GameSpec& game, int holon,
                                 const StrategyProfile& profile,
                                 const BeliefProfile& beliefs, int n_samples,
                                 Stream rng) {
  const Eigen::VectorXd ext = beliefs.external_means(holon);
  const int n = game.agents;
  // Analytic propagation: actions are independent across agents, so
  // E[X] and Var[X] follow from each agent's clipped-action moments.
  double mean_X = 0.0, var_X = 0.0;
  bool closed_form = true;
  for (int k = 0; k < n && closed_form; ++k) {
    LinearClippedStrategy s = profile.strategy(holon, k);
    auto mv = game.types.clip_moments(s.slope, s.intercept);
    if (!mv) {
      closed_form = false;
      break;
    }
    mean_X += mv->first;
    var_X += mv->second;
  }
  if (closed_form) {
    double dn = static_cast<double>(n);
    double omega_mean = mean_X / dn - coupled_threshold(game, ext);
    if (!std::isfinite(omega_mean)) {
      throw NumericError("pushforward mean is non-finite", holon);
    }
    return MomentBelief{omega_mean, var_X / (dn * dn)};
  }
  ParticleMeasure sampled =
      pushforward_particles(game, holon, profile, beliefs, n_samples, rng);
  return MomentBelief{sampled.mean(), sampled.variance()};
}

}  // namespace holonic
