#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holonic/learner.hpp"

namespace holonic {

// Flat-sectioned key-value configuration. Every field has a default; the
// parser rejects unknown sections and keys.
struct RunConfig {
  // [game]
  std::string kind = "public_good";  // public_good | coupled_incentive | decoupled
  int M = 3;
  int n = 5;
  double D = 3.0;
  double kappa = 0.2;
  double gamma = 0.1;
  double rho = 0.0;
  std::string type_distribution = "uniform";  // uniform | beta(a,b)
  std::vector<double> D_per_holon;            // decoupled only; empty = uniform D

  // [learner]
  double a0 = 0.5;
  double b0 = 0.5;
  double exponent_alpha = 0.6;
  double exponent_beta = 0.9;
  int offset = 1;
  long iterations = 5000;
  int n_samples = 256;
  std::string belief_mode = "moment";         // moment | particle
  int particle_cap = 512;
  std::string coupling_semantics = "belief";  // belief | realized
  std::string t_argument = "next";            // next | current

  // [solver]
  int inner_iterations = 300;
  double inner_step_size = 1.0;
  int gradient_samples = 1024;
  double tolerance = 1e-12;
  int max_picard_iterations = 200;

  // [run]
  std::uint64_t seed = 7;
  std::string output_dir = "out";
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical serialization: parsing then re-serializing is idempotent.
std::string serialize_config(const RunConfig& config);

// Range checks for every section. Throws ConfigError; returns non-fatal
// warnings (e.g. an equilibrium whose 4-sigma outcome band leaves [0,1]).
std::vector<std::string> validate_config(const RunConfig& config);

GameSpec build_game(const RunConfig& config);
StepSchedule build_schedule(const RunConfig& config);
SolverConfig build_solver(const RunConfig& config, bool force_numeric = false);
LearnerOptions build_learner_options(const RunConfig& config,
                                     bool force_numeric = false);

}  // namespace holonic
