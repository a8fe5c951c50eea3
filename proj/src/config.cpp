#include "holonic/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "holonic/errors.hpp"

namespace holonic {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + value);
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for '" + key + "': " + value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || value.find('-') != std::string::npos) {
      throw std::invalid_argument(value);
    }
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid unsigned value for '" + key + "': " + value);
  }
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list '" + key + "'");
    out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header at line " +
                          std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "game" && section != "learner" && section != "solver" &&
          section != "run") {
        throw ConfigError("unknown config section [" + section + "]");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at line " +
                        std::to_string(lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("key '" + key + "' appears before any section");
    }

    auto unknown = [&]() -> ConfigError {
      return ConfigError("unknown key '" + key + "' in section [" + section + "]");
    };
    if (section == "game") {
      if (key == "kind") cfg.kind = value;
      else if (key == "M") cfg.M = static_cast<int>(parse_long(key, value));
      else if (key == "n") cfg.n = static_cast<int>(parse_long(key, value));
      else if (key == "D") cfg.D = parse_double(key, value);
      else if (key == "kappa") cfg.kappa = parse_double(key, value);
      else if (key == "gamma") cfg.gamma = parse_double(key, value);
      else if (key == "rho") cfg.rho = parse_double(key, value);
      else if (key == "type_distribution") cfg.type_distribution = value;
      else if (key == "D_per_holon") cfg.D_per_holon = parse_double_list(key, value);
      else throw unknown();
    } else if (section == "learner") {
      if (key == "a0") cfg.a0 = parse_double(key, value);
      else if (key == "b0") cfg.b0 = parse_double(key, value);
      else if (key == "exponent_alpha") cfg.exponent_alpha = parse_double(key, value);
      else if (key == "exponent_beta") cfg.exponent_beta = parse_double(key, value);
      else if (key == "offset") cfg.offset = static_cast<int>(parse_long(key, value));
      else if (key == "iterations") cfg.iterations = parse_long(key, value);
      else if (key == "n_samples") cfg.n_samples = static_cast<int>(parse_long(key, value));
      else if (key == "belief_mode") cfg.belief_mode = value;
      else if (key == "particle_cap") cfg.particle_cap = static_cast<int>(parse_long(key, value));
      else if (key == "coupling_semantics") cfg.coupling_semantics = value;
      else if (key == "t_argument") cfg.t_argument = value;
      else throw unknown();
    } else if (section == "solver") {
      if (key == "inner_iterations") cfg.inner_iterations = static_cast<int>(parse_long(key, value));
      else if (key == "inner_step_size") cfg.inner_step_size = parse_double(key, value);
      else if (key == "gradient_samples") cfg.gradient_samples = static_cast<int>(parse_long(key, value));
      else if (key == "tolerance") cfg.tolerance = parse_double(key, value);
      else if (key == "max_picard_iterations") cfg.max_picard_iterations = static_cast<int>(parse_long(key, value));
      else throw unknown();
    } else {  // run
      if (key == "seed") cfg.seed = parse_u64(key, value);
      else if (key == "output_dir") cfg.output_dir = value;
      else throw unknown();
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[game]\n";
  out << "kind = " << c.kind << "\n";
  out << "M = " << c.M << "\n";
  out << "n = " << c.n << "\n";
  out << "D = " << fmt_double(c.D) << "\n";
  out << "kappa = " << fmt_double(c.kappa) << "\n";
  out << "gamma = " << fmt_double(c.gamma) << "\n";
  out << "rho = " << fmt_double(c.rho) << "\n";
  out << "type_distribution = " << c.type_distribution << "\n";
  if (!c.D_per_holon.empty()) {
    out << "D_per_holon = ";
    for (std::size_t i = 0; i < c.D_per_holon.size(); ++i) {
      if (i > 0) out << ",";
      out << fmt_double(c.D_per_holon[i]);
    }
    out << "\n";
  }
  out << "\n[learner]\n";
  out << "a0 = " << fmt_double(c.a0) << "\n";
  out << "b0 = " << fmt_double(c.b0) << "\n";
  out << "exponent_alpha = " << fmt_double(c.exponent_alpha) << "\n";
  out << "exponent_beta = " << fmt_double(c.exponent_beta) << "\n";
  out << "offset = " << c.offset << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "n_samples = " << c.n_samples << "\n";
  out << "belief_mode = " << c.belief_mode << "\n";
  out << "particle_cap = " << c.particle_cap << "\n";
  out << "coupling_semantics = " << c.coupling_semantics << "\n";
  out << "t_argument = " << c.t_argument << "\n";
  out << "\n[solver]\n";
  out << "inner_iterations = " << c.inner_iterations << "\n";
  out << "inner_step_size = " << fmt_double(c.inner_step_size) << "\n";
  out << "gradient_samples = " << c.gradient_samples << "\n";
  out << "tolerance = " << fmt_double(c.tolerance) << "\n";
  out << "max_picard_iterations = " << c.max_picard_iterations << "\n";
  out << "\n[run]\n";
  out << "seed = " << c.seed << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  return out.str();
}

namespace {

TypeDistribution parse_types(const std::string& spec) {
  if (spec == "uniform") return TypeDistribution::uniform();
  if (spec.rfind("beta(", 0) == 0 && spec.back() == ')') {
    std::string args = spec.substr(5, spec.size() - 6);
    std::size_t comma = args.find(',');
    if (comma != std::string::npos) {
      double a = parse_double("type_distribution", trim(args.substr(0, comma)));
      double b = parse_double("type_distribution", trim(args.substr(comma + 1)));
      return TypeDistribution::beta(a, b);
    }
  }
  throw ConfigError("type_distribution must be 'uniform' or 'beta(a,b)', got '" +
                    spec + "'");
}

}  // namespace

GameSpec build_game(const RunConfig& c) {
  PublicGoodParams p{c.D, c.kappa, c.gamma, c.rho};
  TypeDistribution types = parse_types(c.type_distribution);
  if (!c.D_per_holon.empty() && c.kind != "decoupled") {
    throw ConfigError("D_per_holon is only supported by the decoupled game");
  }
  GameSpec game;
  if (c.kind == "public_good") {
    game = make_public_good(c.M, c.n, p, types);
  } else if (c.kind == "coupled_incentive") {
    game = make_coupled_incentive(c.M, c.n, p, types);
  } else if (c.kind == "decoupled") {
    if (c.gamma != 0.0 || c.rho != 0.0) {
      throw ConfigError("decoupled requires gamma = 0 and rho = 0");
    }
    Eigen::VectorXd holon_D;
    if (!c.D_per_holon.empty()) {
      if (static_cast<int>(c.D_per_holon.size()) != c.M) {
        throw ConfigError("D_per_holon must list exactly M values");
      }
      holon_D = Eigen::Map<const Eigen::VectorXd>(
          c.D_per_holon.data(), static_cast<Eigen::Index>(c.D_per_holon.size()));
    }
    game = make_decoupled(c.M, c.n, c.D, c.kappa, holon_D, types);
  } else {
    throw ConfigError("unknown game kind '" + c.kind +
                      "' (expected public_good, coupled_incentive or decoupled)");
  }
  if (c.coupling_semantics == "realized") {
    game.coupling = CouplingSemantics::Realized;
  } else if (c.coupling_semantics != "belief") {
    throw ConfigError("coupling_semantics must be 'belief' or 'realized'");
  }
  return game;
}

StepSchedule build_schedule(const RunConfig& c) {
  return StepSchedule(c.a0, c.b0, c.exponent_alpha, c.exponent_beta, c.offset);
}

SolverConfig build_solver(const RunConfig& c, bool force_numeric) {
  SolverConfig s;
  s.inner_iterations = c.inner_iterations;
  s.inner_step_size = c.inner_step_size;
  s.gradient_samples = c.gradient_samples;
  s.tolerance = c.tolerance;
  s.max_picard_iterations = c.max_picard_iterations;
  s.force_numeric = force_numeric;
  validate_solver(s);
  return s;
}

LearnerOptions build_learner_options(const RunConfig& c, bool force_numeric) {
  LearnerOptions o;
  o.solver = build_solver(c, force_numeric);
  o.iterations = c.iterations;
  o.n_samples = c.n_samples;
  if (c.belief_mode == "moment") {
    o.mode = BeliefMode::Moment;
  } else if (c.belief_mode == "particle") {
    o.mode = BeliefMode::Particle;
  } else {
    throw ConfigError("belief_mode must be 'moment' or 'particle'");
  }
  o.particle_cap = c.particle_cap;
  o.seed = c.seed;
  if (c.t_argument == "next") {
    o.update_with_next_profile = true;
  } else if (c.t_argument == "current") {
    o.update_with_next_profile = false;
  } else {
    throw ConfigError("t_argument must be 'next' or 'current'");
  }
  return o;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> warnings;
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (c.particle_cap < 1) throw ConfigError("particle_cap must be >= 1");
  GameSpec game = build_game(c);  // runs the game-parameter range checks
  build_schedule(c);
  build_solver(c);
  build_learner_options(c);

  // Warn when the equilibrium outcome leaves [0,1] by more than 4 sigma:
  // the unclipped margin is then a poor stand-in for a degree of success.
  try {
    Equilibrium eq = analytic_equilibrium(game);
    for (int i = 0; i < game.holons; ++i) {
      double sd = std::sqrt(eq.omega_variance[i]);
      double lo = eq.omega_mean[i] - 4.0 * sd;
      double hi = eq.omega_mean[i] + 4.0 * sd;
      if (lo < 0.0 || hi > 1.0) {
        std::ostringstream w;
        w << "equilibrium outcome for holon " << i << " spans [" << lo << ", "
          << hi << "] (mean +- 4 sd), outside [0,1]";
        warnings.push_back(w.str());
        break;
      }
    }
  } catch (const UnsupportedRegimeError&) {
    warnings.emplace_back(
        "no interior closed-form equilibrium for these parameters; "
        "reference lines and the compare command are unavailable");
  }
  return warnings;
}

}  // namespace holonic
