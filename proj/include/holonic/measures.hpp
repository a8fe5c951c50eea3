#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "holonic/rng.hpp"

namespace holonic {

struct GameSpec;
struct StrategyProfile;

// Weighted sample representation of an outcome distribution on the real
// line. Weights are normalized; the constructor enforces the invariants.
class ParticleMeasure {
 public:
  ParticleMeasure(Eigen::VectorXd values, Eigen::VectorXd weights);

  // Equal-weight particles.
  static ParticleMeasure equal_weights(Eigen::VectorXd values);
  static ParticleMeasure point_mass(double value);

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return values_.size(); }

  double mean() const { return values_.dot(weights_); }
  double variance() const {
    double m = mean();
    return (values_.array() - m).square().matrix().dot(weights_);
  }

 private:
  Eigen::VectorXd values_;
  Eigen::VectorXd weights_;
};

// Reduced belief carrying only the first two moments. Exact whenever the
// cost is affine in the outcome, which holds for every shipped game.
struct MomentBelief {
  double mean = 0.0;
  double variance = 0.0;
};

enum class BeliefMode { Particle, Moment };

// One belief per holon, homogeneous mode.
class BeliefProfile {
 public:
  static BeliefProfile moments(std::vector<MomentBelief> beliefs);
  static BeliefProfile particles(std::vector<ParticleMeasure> beliefs);
  // Point mass at `value` for every holon, in the requested mode.
  static BeliefProfile point_masses(int holons, double value, BeliefMode mode);

  BeliefMode mode() const { return mode_; }
  int holons() const;

  const MomentBelief& moment(int i) const { return moments_[i]; }
  const ParticleMeasure& particle(int i) const { return particles_[i]; }

  double mean(int i) const;
  double variance(int i) const;
  Eigen::VectorXd means() const;

  // Means of every holon except `holon`, in index order.
  Eigen::VectorXd external_means(int holon) const;

 private:
  BeliefMode mode_ = BeliefMode::Moment;
  std::vector<MomentBelief> moments_;
  std::vector<ParticleMeasure> particles_;
};

// Exact 1-D Wasserstein-1 distance, computed by sweeping the merged
// supports and integrating |F_a - F_b|.
double wasserstein1(const ParticleMeasure& a, const ParticleMeasure& b);

// Convex combination (1-beta)*a + beta*b as measures. Particle mode keeps
// the full union of supports (no compression; see compress()).
ParticleMeasure mixture(const ParticleMeasure& a, const ParticleMeasure& b,
                        double beta);
MomentBelief mixture(const MomentBelief& a, const MomentBelief& b,
                     double beta);
// Profile-level mixture; caps particle growth at `particle_cap` using
// systematic resampling driven by `rng` (unused in moment mode).
BeliefProfile mixture(const BeliefProfile& a, const BeliefProfile& b,
                      double beta, int particle_cap, Stream rng);

// Systematic resampling to `target_size` equal-weight particles.
ParticleMeasure resample(const ParticleMeasure& a, int target_size,
                         Stream rng);

// Resample only when the measure exceeds `particle_cap`.
ParticleMeasure compress(const ParticleMeasure& a, int particle_cap,
                         Stream rng);

// Distance between belief profiles: max over holons of the per-holon
// distance (W1 for particles; |mean difference| for moment beliefs, a
// diagnostic pseudo-metric since shipped costs depend on means only).
double belief_distance(const BeliefProfile& a, const BeliefProfile& b);

// Outcome distribution a holon generates: draws n_samples joint type
// vectors, applies each agent's strategy and the holon outcome map
// (external coupling is read from the belief means), and returns
// equal-weight particles. In moment mode returns analytically propagated
// moments when the game supports it, else the moments of the samples.
ParticleMeasure pushforward_particles(const GameSpec& game, int holon,
                                      const StrategyProfile& profile,
                                      const BeliefProfile& beliefs,
                                      int n_samples, Stream rng);
MomentBelief pushforward_moments(const GameSpec& game, int holon,
                                 const StrategyProfile& profile,
                                 const BeliefProfile& beliefs, int n_samples,
                                 Stream rng);

}  // namespace holonic
