#include "holonic/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "holonic/errors.hpp"
#include "holonic/games.hpp"

namespace holonic {

TypeDistribution TypeDistribution::uniform() { return TypeDistribution(); }

TypeDistribution TypeDistribution::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("beta type distribution needs positive shape parameters");
  }
  TypeDistribution t;
  t.kind_ = Kind::Beta;
  t.alpha_ = alpha;
  t.beta_ = beta;
  return t;
}

double TypeDistribution::sample(Stream& rng) const {
  return kind_ == Kind::Uniform ? rng.uniform01() : rng.beta(alpha_, beta_);
}

double TypeDistribution::mean() const {
  return kind_ == Kind::Uniform ? 0.5 : alpha_ / (alpha_ + beta_);
}

double TypeDistribution::variance() const {
  if (kind_ == Kind::Uniform) return 1.0 / 12.0;
  double s = alpha_ + beta_;
  return alpha_ * beta_ / (s * s * (s + 1.0));
}

std::optional<std::pair<double, double>> TypeDistribution::clip_moments(
    double slope, double intercept) const {
  const double a = slope, b = intercept;
  // When the line never leaves [0,1] on the type interval, the clip is
  // inactive and only the type's first two moments enter.
  double lo = std::min(b, a + b), hi = std::max(b, a + b);
  if (lo >= 0.0 && hi <= 1.0) {
    double m = a * mean() + b;
    return std::make_pair(m, a * a * variance());
  }
  if (kind_ != Kind::Uniform) return std::nullopt;

  // Uniform types: integrate the piecewise-linear clip exactly. Breaks
  // where a*xi + b crosses 0 or 1 partition [0,1] into segments on which
  // the action is 0, 1, or affine.
  std::vector<double> cuts = {0.0, 1.0};
  if (a != 0.0) {
    for (double level : {0.0, 1.0}) {
      double t = (level - b) / a;
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    double u = cuts[s], v = cuts[s + 1];
    if (v <= u) continue;
    double mid_val = a * 0.5 * (u + v) + b;
    if (mid_val <= 0.0) continue;  // clipped to 0, contributes nothing
    if (mid_val >= 1.0) {
      m1 += v - u;
      m2 += v - u;
    } else if (a == 0.0) {
      m1 += b * (v - u);
      m2 += b * b * (v - u);
    } else {
      m1 += 0.5 * a * (v * v - u * u) + b * (v - u);
      double gv = a * v + b, gu = a * u + b;
      m2 += (gv * gv * gv - gu * gu * gu) / (3.0 * a);
    }
  }
  return std::make_pair(m1, std::max(0.0, m2 - m1 * m1));
}

double act(const LinearClippedStrategy& strategy, double xi) {
  return std::clamp(strategy.slope * xi + strategy.intercept, 0.0, 1.0);
}

double profile_distance(const StrategyProfile& a, const StrategyProfile& b) {
  double ds = (a.slopes - b.slopes).cwiseAbs().maxCoeff();
  double di = (a.intercepts - b.intercepts).cwiseAbs().maxCoeff();
  return std::max(ds, di);
}

namespace {

// Draw one external outcome per other holon. Moment mode reads the means
// (exact: shipped costs are affine in external outcomes); particle mode
// samples each holon's particle belief.
void draw_externals(const BeliefProfile& beliefs, int holon, Stream& rng,
                    Eigen::VectorXd& out) {
  int k = 0;
  for (int j = 0; j < beliefs.holons(); ++j) {
    if (j == holon) continue;
    if (beliefs.mode() == BeliefMode::Moment) {
      out[k++] = beliefs.mean(j);
    } else {
      const ParticleMeasure& q = beliefs.particle(j);
      double u = rng.uniform01();
      Eigen::Index idx = 0;
      double cum = q.weights()[0];
      while (cum < u && idx + 1 < q.size()) cum += q.weights()[++idx];
      out[k++] = q.values()[idx];
    }
  }
}

}  // namespace

double expected_cost(const GameSpec& game, int holon, int agent, double x,
                     double xi, const StrategyProfile& profile,
                     const BeliefProfile& beliefs, int n_samples, Stream rng) {
  if (n_samples < 1) throw InvalidArgumentError("expected_cost needs n_samples >= 1");
  const int n = game.agents;
  const Eigen::VectorXd means_ext = beliefs.external_means(holon);
  const double incentive = incentive_weight(game, means_ext);
  Eigen::VectorXd ext(game.holons - 1);
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    double action_sum = x;
    for (int l = 0; l < n; ++l) {
      if (l == agent) continue;
      double xi_l = game.types.sample(rng);
      action_sum += act(profile.strategy(holon, l), xi_l);
    }
    draw_externals(beliefs, holon, rng, ext);
    double X = action_sum / static_cast<double>(n);
    double omega = X - coupled_threshold(game, ext);
    total += agent_cost(game, holon, x, omega, xi, incentive);
  }
  double cost = total / static_cast<double>(n_samples);
  if (!std::isfinite(cost)) {
    throw NumericError("expected cost is non-finite", holon);
  }
  return cost;
}

double holonic_risk(const GameSpec& game, int holon, int agent,
                    const StrategyProfile& profile,
                    const BeliefProfile& beliefs, int n_samples, Stream rng) {
  if (n_samples < 1) throw InvalidArgumentError("holonic_risk needs n_samples >= 1");
  const int n = game.agents;
  const Eigen::VectorXd means_ext = beliefs.external_means(holon);
  const double incentive = incentive_weight(game, means_ext);
  Eigen::VectorXd ext(game.holons - 1);
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    double action_sum = 0.0;
    double own_x = 0.0, own_xi = 0.0;
    for (int l = 0; l < n; ++l) {
      double xi_l = game.types.sample(rng);
      double x_l = act(profile.strategy(holon, l), xi_l);
      action_sum += x_l;
      if (l == agent) {
        own_x = x_l;
        own_xi = xi_l;
      }
    }
    draw_externals(beliefs, holon, rng, ext);
    double X = action_sum / static_cast<double>(n);
    double omega = X - coupled_threshold(game, ext);
    total += agent_cost(game, holon, own_x, omega, own_xi, incentive);
  }
  double risk = total / static_cast<double>(n_samples);
  if (!std::isfinite(risk)) {
    throw NumericError("holonic risk is non-finite", holon);
  }
  return risk;
}

double mean_holonic_risk(const GameSpec& game, const StrategyProfile& profile,
                         const BeliefProfile& beliefs, int n_samples,
                         Stream rng) {
  if (n_samples < 1) throw InvalidArgumentError("mean_holonic_risk needs n_samples >= 1");
  const int M = game.holons, n = game.agents;
  Eigen::VectorXd ext(M - 1);
  Eigen::VectorXd xs(n), xis(n);
  std::vector<double> incentives(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    incentives[static_cast<std::size_t>(i)] =
        incentive_weight(game, beliefs.external_means(i));
  }
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < M; ++i) {
      for (int k = 0; k < n; ++k) {
        xis[k] = game.types.sample(rng);
        xs[k] = act(profile.strategy(i, k), xis[k]);
      }
      draw_externals(beliefs, i, rng, ext);
      double omega = xs.mean() - coupled_threshold(game, ext);
      for (int k = 0; k < n; ++k) {
        total += agent_cost(game, i, xs[k], omega, xis[k],
                            incentives[static_cast<std::size_t>(i)]);
      }
    }
  }
  return total / (static_cast<double>(n_samples) * M * n);
}

}  // namespace holonic
