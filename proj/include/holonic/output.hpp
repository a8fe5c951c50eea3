#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "holonic/config.hpp"
#include "holonic/learner.hpp"

namespace holonic {

// Exact trace header:
// t,alpha,beta,belief_mean_0..belief_mean_{M-1},theta0_avg,theta1_avg,d_t,eps_t,risk
std::string trace_csv(const Trace& trace);

// Particle serialization, columns: value,weight.
std::string particle_csv(const ParticleMeasure& measure);

void write_text_file(const std::string& path, const std::string& content);

nlohmann::json config_json(const RunConfig& config);
nlohmann::json beliefs_json(const BeliefProfile& beliefs);
nlohmann::json profile_json(const StrategyProfile& profile);

// Two stacked line charts: per-holon belief means and the average theta
// parameters, each with dashed reference lines when a reference is given.
std::string convergence_svg(const Trace& trace,
                            const std::optional<ReferencePoint>& reference);

}  // namespace holonic
