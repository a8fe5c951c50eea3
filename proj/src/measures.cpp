#include "holonic/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "holonic/errors.hpp"

namespace holonic {

namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidMeasureError(std::string("non-finite ") + what +
                              " in particle measure");
  }
}

}  // namespace

ParticleMeasure::ParticleMeasure(Eigen::VectorXd values,
                                 Eigen::VectorXd weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.size() == 0) {
    throw InvalidMeasureError("particle measure with empty support");
  }
  if (values_.size() != weights_.size()) {
    throw InvalidMeasureError("values/weights length mismatch");
  }
  check_finite(values_, "values");
  check_finite(weights_, "weights");
  if ((weights_.array() < 0.0).any()) {
    throw InvalidMeasureError("negative particle weight");
  }
  double total = weights_.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidMeasureError("particle weights sum to " +
                              std::to_string(total) + ", expected 1");
  }
}

ParticleMeasure ParticleMeasure::equal_weights(Eigen::VectorXd values) {
  Eigen::Index n = values.size();
  if (n == 0) throw InvalidMeasureError("particle measure with empty support");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Enforce an exact unit sum regardless of 1/n rounding.
  w[n - 1] = 1.0 - w.head(n - 1).sum();
  return ParticleMeasure(std::move(values), std::move(w));
}

ParticleMeasure ParticleMeasure::point_mass(double value) {
  Eigen::VectorXd v(1);
  v << value;
  return equal_weights(std::move(v));
}

BeliefProfile BeliefProfile::moments(std::vector<MomentBelief> beliefs) {
  if (beliefs.empty()) throw InvalidArgumentError("empty belief profile");
  for (const auto& b : beliefs) {
    if (!std::isfinite(b.mean) || !std::isfinite(b.variance) ||
        b.variance < 0.0) {
      throw InvalidMeasureError("invalid moment belief");
    }
  }
  BeliefProfile p;
  p.mode_ = BeliefMode::Moment;
  p.moments_ = std::move(beliefs);
  return p;
}

BeliefProfile BeliefProfile::particles(std::vector<ParticleMeasure> beliefs) {
  if (beliefs.empty()) throw InvalidArgumentError("empty belief profile");
  BeliefProfile p;
  p.mode_ = BeliefMode::Particle;
  p.particles_ = std::move(beliefs);
  return p;
}

BeliefProfile BeliefProfile::point_masses(int holons, double value,
                                          BeliefMode mode) {
  if (mode == BeliefMode::Moment) {
    return moments(std::vector<MomentBelief>(
        static_cast<std::size_t>(holons), MomentBelief{value, 0.0}));
  }
  std::vector<ParticleMeasure> ps;
  ps.reserve(static_cast<std::size_t>(holons));
  for (int i = 0; i < holons; ++i) ps.push_back(ParticleMeasure::point_mass(value));
  return particles(std::move(ps));
}

int BeliefProfile::holons() const {
  return mode_ == BeliefMode::Moment ? static_cast<int>(moments_.size())
                                     : static_cast<int>(particles_.size());
}

double BeliefProfile::mean(int i) const {
  return mode_ == BeliefMode::Moment ? moments_[i].mean
                                     : particles_[i].mean();
}

double BeliefProfile::variance(int i) const {
  return mode_ == BeliefMode::Moment ? moments_[i].variance
                                     : particles_[i].variance();
}

Eigen::VectorXd BeliefProfile::means() const {
  Eigen::VectorXd m(holons());
  for (int i = 0; i < holons(); ++i) m[i] = mean(i);
  return m;
}

Eigen::VectorXd BeliefProfile::external_means(int holon) const {
  Eigen::VectorXd m(holons() - 1);
  int k = 0;
  for (int j = 0; j < holons(); ++j) {
    if (j != holon) m[k++] = mean(j);
  }
  return m;
}

double wasserstein1(const ParticleMeasure& a, const ParticleMeasure& b) {
  const Eigen::Index na = a.size(), nb = b.size();
  // Sort both supports by value; sweep the merged support accumulating
  // |F_a - F_b| times the gap to the next support point.
  std::vector<Eigen::Index> ia(static_cast<std::size_t>(na));
  std::vector<Eigen::Index> ib(static_cast<std::size_t>(nb));
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::sort(ia.begin(), ia.end(), [&](Eigen::Index l, Eigen::Index r) {
    return a.values()[l] < a.values()[r];
  });
  std::sort(ib.begin(), ib.end(), [&](Eigen::Index l, Eigen::Index r) {
    return b.values()[l] < b.values()[r];
  });

  double dist = 0.0;
  double cdf_a = 0.0, cdf_b = 0.0;
  std::size_t pa = 0, pb = 0;
  double x = 0.0;
  bool have_x = false;
  while (pa < ia.size() || pb < ib.size()) {
    double va = pa < ia.size() ? a.values()[ia[pa]]
                               : std::numeric_limits<double>::infinity();
    double vb = pb < ib.size() ? b.values()[ib[pb]]
                               : std::numeric_limits<double>::infinity();
    double next = std::min(va, vb);
    if (have_x) dist += std::abs(cdf_a - cdf_b) * (next - x);
    while (pa < ia.size() && a.values()[ia[pa]] == next) cdf_a += a.weights()[ia[pa++]];
    while (pb < ib.size() && b.values()[ib[pb]] == next) cdf_b += b.weights()[ib[pb++]];
    x = next;
    have_x = true;
  }
  return dist;
}

ParticleMeasure mixture(const ParticleMeasure& a, const ParticleMeasure& b,
                        double beta) {
  if (beta < 0.0 || beta > 1.0) {
    throw InvalidArgumentError("mixture weight outside [0,1]");
  }
  if (beta == 0.0) return a;
  if (beta == 1.0) return b;
  Eigen::VectorXd values(a.size() + b.size());
  Eigen::VectorXd weights(a.size() + b.size());
  values << a.values(), b.values();
  weights << (1.0 - beta) * a.weights(), beta * b.weights();
  // Renormalize away the scaling round-off so the invariant holds exactly.
  weights /= weights.sum();
  return ParticleMeasure(std::move(values), std::move(weights));
}

MomentBelief mixture(const MomentBelief& a, const MomentBelief& b,
                     double beta) {
  if (beta < 0.0 || beta > 1.0) {
    throw InvalidArgumentError("mixture weight outside [0,1]");
  }
  double mean = (1.0 - beta) * a.mean + beta * b.mean;
  double second = (1.0 - beta) * (a.variance + a.mean * a.mean) +
                  beta * (b.variance + b.mean * b.mean);
  return MomentBelief{mean, std::max(0.0, second - mean * mean)};
}

BeliefProfile mixture(const BeliefProfile& a, const BeliefProfile& b,
                      double beta, int particle_cap, Stream rng) {
  if (a.mode() != b.mode()) {
    throw InvalidArgumentError("mixture of mismatched belief modes");
  }
  if (a.holons() != b.holons()) {
    throw InvalidArgumentError("mixture of profiles with different holon counts");
  }
  if (a.mode() == BeliefMode::Moment) {
    std::vector<MomentBelief> out;
    out.reserve(static_cast<std::size_t>(a.holons()));
    for (int i = 0; i < a.holons(); ++i) {
      out.push_back(mixture(a.moment(i), b.moment(i), beta));
    }
    return BeliefProfile::moments(std::move(out));
  }
  std::vector<ParticleMeasure> out;
  out.reserve(static_cast<std::size_t>(a.holons()));
  for (int i = 0; i < a.holons(); ++i) {
    ParticleMeasure mixed = mixture(a.particle(i), b.particle(i), beta);
    out.push_back(compress(mixed, particle_cap,
                           rng.child("compress").child(static_cast<std::uint64_t>(i))));
  }
  return BeliefProfile::particles(std::move(out));
}

ParticleMeasure resample(const ParticleMeasure& a, int target_size,
                         Stream rng) {
  if (target_size < 1) throw InvalidArgumentError("resample target size < 1");
  const Eigen::Index n = a.size();
  Eigen::VectorXd values(target_size);
  // Systematic resampling: one uniform offset, then a stratified comb.
  const double step = 1.0 / static_cast<double>(target_size);
  double u = rng.uniform01() * step;
  Eigen::Index idx = 0;
  double cum = a.weights()[0];
  for (int j = 0; j < target_size; ++j) {
    while (cum < u && idx + 1 < n) cum += a.weights()[++idx];
    values[j] = a.values()[idx];
    u += step;
  }
  return ParticleMeasure::equal_weights(std::move(values));
}

ParticleMeasure compress(const ParticleMeasure& a, int particle_cap,
                         Stream rng) {
  if (particle_cap < 1) throw InvalidArgumentError("particle cap < 1");
  if (a.size() <= particle_cap) return a;
  return resample(a, particle_cap, rng);
}

double belief_distance(const BeliefProfile& a, const BeliefProfile& b) {
  if (a.mode() != b.mode() || a.holons() != b.holons()) {
    throw InvalidArgumentError("belief_distance on mismatched profiles");
  }
  double d = 0.0;
  for (int i = 0; i < a.holons(); ++i) {
    double di = a.mode() == BeliefMode::Moment
                    ? std::abs(a.mean(i) - b.mean(i))
                    : wasserstein1(a.particle(i), b.particle(i));
    d = std::max(d, di);
  }
  return d;
}

}  // namespace holonic
