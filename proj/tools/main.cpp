#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "holonic/config.hpp"
#include "holonic/errors.hpp"
#include "holonic/output.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNonConvergence = 4;
constexpr int kExitNoContraction = 5;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<std::string> out_dir;
  std::optional<std::string> belief_mode;
  bool emit_svg = false;
  bool force_numeric = false;
  int trials = 100;
};

holonic::RunConfig load(const Options& opt) {
  holonic::RunConfig cfg = holonic::load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.iters) cfg.iterations = *opt.iters;
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  if (opt.belief_mode) cfg.belief_mode = *opt.belief_mode;
  for (const std::string& w : holonic::validate_config(cfg)) {
    std::cerr << "warning: " << w << "\n";
  }
  return cfg;
}

std::string out_path(const holonic::RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void write_summary(const holonic::RunConfig& cfg, json summary) {
  summary["config"] = holonic::config_json(cfg);
  holonic::write_text_file(out_path(cfg, "summary.json"), summary.dump(2) + "\n");
}

std::optional<holonic::ReferencePoint> try_reference(
    const holonic::GameSpec& game, const holonic::LearnerOptions& options) {
  try {
    holonic::Equilibrium eq = holonic::analytic_equilibrium(game);
    return holonic::make_reference(game, eq, options.mode, 4096, options.seed);
  } catch (const holonic::UnsupportedRegimeError&) {
    return std::nullopt;
  }
}

json reference_json(const holonic::ReferencePoint& ref) {
  const holonic::Equilibrium& eq = ref.equilibrium;
  return {{"omega_mean", std::vector<double>(eq.omega_mean.begin(), eq.omega_mean.end())},
          {"theta1_avg", eq.mean_slope()},
          {"theta0_avg", eq.mean_intercept()}};
}

int cmd_run(const Options& opt) {
  holonic::RunConfig cfg = load(opt);
  holonic::GameSpec game = holonic::build_game(cfg);
  holonic::StepSchedule schedule = holonic::build_schedule(cfg);
  holonic::LearnerOptions options =
      holonic::build_learner_options(cfg, opt.force_numeric);
  std::optional<holonic::ReferencePoint> reference = try_reference(game, options);

  auto start = std::chrono::steady_clock::now();
  auto [state, trace] = holonic::run(game, schedule, options, reference);
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  holonic::write_text_file(out_path(cfg, "trace.csv"), holonic::trace_csv(trace));
  if (opt.emit_svg) {
    holonic::write_text_file(out_path(cfg, "convergence.svg"),
                             holonic::convergence_svg(trace, reference));
  }
  if (options.mode == holonic::BeliefMode::Particle) {
    for (int i = 0; i < game.holons; ++i) {
      holonic::write_text_file(
          out_path(cfg, "belief_holon_" + std::to_string(i) + ".csv"),
          holonic::particle_csv(state.beliefs.particle(i)));
    }
  }

  Eigen::VectorXd final_means = state.beliefs.means();
  json summary{{"command", "run"},
               {"wall_time_s", seconds},
               {"iterations", state.t},
               {"final",
                {{"belief_means",
                  std::vector<double>(final_means.begin(), final_means.end())},
                 {"beliefs", holonic::beliefs_json(state.beliefs)},
                 {"final_theta0_avg", state.profile.mean_intercept()},
                 {"final_theta1_avg", state.profile.mean_slope()},
                 {"profile", holonic::profile_json(state.profile)}}}};
  if (reference) summary["reference"] = reference_json(*reference);
  write_summary(cfg, std::move(summary));

  std::cout << "run finished in " << seconds << " s; final belief means:";
  for (int i = 0; i < game.holons; ++i) std::cout << ' ' << state.beliefs.mean(i);
  std::cout << "\n";
  return kExitOk;
}

int cmd_picard(const Options& opt) {
  holonic::RunConfig cfg = load(opt);
  holonic::GameSpec game = holonic::build_game(cfg);
  holonic::LearnerOptions options =
      holonic::build_learner_options(cfg, opt.force_numeric);
  try {
    auto start = std::chrono::steady_clock::now();
    holonic::PicardResult result = holonic::picard_fixed_point(
        game, options.solver, options.mode, options.n_samples,
        options.particle_cap, holonic::Stream(options.seed));
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    Eigen::VectorXd means = result.beliefs.means();
    write_summary(cfg, {{"command", "picard"},
                        {"wall_time_s", seconds},
                        {"picard_means",
                         std::vector<double>(means.begin(), means.end())},
                        {"picard_iterations", result.iterations},
                        {"picard_converged", true},
                        {"picard_profile", holonic::profile_json(result.profile)}});
    std::cout << "picard converged in " << result.iterations
              << " iterations; means:";
    for (int i = 0; i < game.holons; ++i) std::cout << ' ' << means[i];
    std::cout << "\n";
    return kExitOk;
  } catch (const holonic::NonConvergenceError& e) {
    write_summary(cfg, {{"command", "picard"},
                        {"picard_converged", false},
                        {"picard_final_distance", e.final_distance}});
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  }
}

int cmd_contraction(const Options& opt) {
  holonic::RunConfig cfg = load(opt);
  holonic::GameSpec game = holonic::build_game(cfg);
  holonic::LearnerOptions options =
      holonic::build_learner_options(cfg, opt.force_numeric);
  double estimate = holonic::contraction_estimate(
      game, options.solver, opt.trials, holonic::Stream(options.seed),
      options.mode, options.n_samples);
  write_summary(cfg, {{"command", "contraction"},
                      {"contraction_estimate", estimate},
                      {"trials", opt.trials}});
  std::cout << "contraction_estimate = " << estimate << " over " << opt.trials
            << " trials\n";
  if (estimate >= 1.0) {
    std::cerr << "uniqueness regime not certified: empirical contraction "
                 "modulus >= 1\n";
    return kExitNoContraction;
  }
  return kExitOk;
}

int cmd_compare(const Options& opt) {
  holonic::RunConfig cfg = load(opt);
  holonic::GameSpec game = holonic::build_game(cfg);
  holonic::StepSchedule schedule = holonic::build_schedule(cfg);
  holonic::LearnerOptions options =
      holonic::build_learner_options(cfg, opt.force_numeric);

  struct Row {
    std::string method;
    Eigen::VectorXd means;
    double theta0, theta1, seconds;
  };
  std::vector<Row> rows;

  try {
    auto start = std::chrono::steady_clock::now();
    holonic::Equilibrium eq = holonic::analytic_equilibrium(game);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    rows.push_back({"analytic", eq.omega_mean, eq.mean_intercept(),
                    eq.mean_slope(), seconds});
  } catch (const holonic::UnsupportedRegimeError& e) {
    std::cerr << "note: analytic equilibrium unavailable (" << e.what() << ")\n";
  }
  {
    auto start = std::chrono::steady_clock::now();
    holonic::PicardResult picard = holonic::picard_fixed_point(
        game, options.solver, options.mode, options.n_samples,
        options.particle_cap, holonic::Stream(options.seed).child("picard"));
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    rows.push_back({"picard", picard.beliefs.means(),
                    picard.profile.mean_intercept(),
                    picard.profile.mean_slope(), seconds});
  }
  {
    auto start = std::chrono::steady_clock::now();
    auto [state, trace] = holonic::run(game, schedule, options);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    rows.push_back({"two_timescale", state.beliefs.means(),
                    state.profile.mean_intercept(), state.profile.mean_slope(),
                    seconds});
  }

  double max_gap = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      max_gap = std::max(
          max_gap, (rows[a].means - rows[b].means).cwiseAbs().maxCoeff());
    }
  }

  json table = json::array();
  std::cout << "method          theta0    theta1    belief means (wall s)\n";
  for (const Row& row : rows) {
    std::vector<double> means(row.means.begin(), row.means.end());
    table.push_back({{"method", row.method},
                     {"belief_means", means},
                     {"theta0_avg", row.theta0},
                     {"theta1_avg", row.theta1},
                     {"wall_time_s", row.seconds}});
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %-9.5f %-9.5f", row.method.c_str(),
                  row.theta0, row.theta1);
    std::cout << line;
    for (double m : means) std::cout << ' ' << m;
    std::cout << " (" << row.seconds << ")\n";
  }
  std::cout << "max pairwise belief-mean gap = " << max_gap << "\n";
  write_summary(cfg, {{"command", "compare"},
                      {"compare", table},
                      {"max_belief_gap", max_gap}});
  if (!(max_gap < 0.02)) {
    std::cerr << "methods disagree: max belief-mean gap " << max_gap
              << " >= 0.02\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian holonic equilibrium solver: two-timescale learning, "
               "Picard iteration and closed-form cross-validation for "
               "coupled public-good games"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", opt.config_path, "Path to config file")
          ->required();
    }
    sub->add_option("--seed", opt.seed, "Override [run] seed");
    sub->add_option("--iters", opt.iters, "Override [learner] iterations");
    sub->add_option("--out-dir", opt.out_dir, "Override [run] output_dir");
    sub->add_option("--belief-mode", opt.belief_mode,
                    "Override belief mode (particle|moment)")
        ->check(CLI::IsMember({"particle", "moment"}));
    sub->add_flag("--force-numeric-br", opt.force_numeric,
                  "Use the numeric best-response path even when an analytic "
                  "responder exists");
  };

  CLI::App* run = app.add_subcommand("run", "Run the two-timescale learner");
  add_common(run, true);
  run->add_flag("--emit-svg", opt.emit_svg, "Write convergence.svg");

  CLI::App* picard =
      app.add_subcommand("picard", "Solve the fixed point by Picard iteration");
  add_common(picard, true);

  CLI::App* contraction = app.add_subcommand(
      "contraction", "Estimate the contraction modulus of the outcome operator");
  add_common(contraction, true);
  contraction->add_option("--trials", opt.trials, "Number of sampled pairs")
      ->check(CLI::PositiveNumber);

  CLI::App* compare = app.add_subcommand(
      "compare", "Cross-validate analytic, Picard and learner solutions");
  add_common(compare, true);

  CLI::App* defaults = app.add_subcommand(
      "print-default-config", "Print the default configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (defaults->parsed()) {
      std::cout << holonic::serialize_config(holonic::RunConfig{});
      return kExitOk;
    }
    if (run->parsed()) return cmd_run(opt);
    if (picard->parsed()) return cmd_picard(opt);
    if (contraction->parsed()) return cmd_contraction(opt);
    if (compare->parsed()) return cmd_compare(opt);
  } catch (const holonic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const holonic::UnsupportedRegimeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const holonic::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const holonic::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
