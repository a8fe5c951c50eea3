#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "holonic/config.hpp"
#include "holonic/output.hpp"

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "holonic_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(HOLONIC_CLI_PATH) + " " + args + " > " +
                    log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path write_config(const holonic::RunConfig& cfg, const std::string& name) {
  fs::path path = work_dir() / name;
  holonic::write_text_file(path.string(), holonic::serialize_config(cfg));
  return path;
}

}  // namespace

TEST_CASE("cli: print-default-config round-trips through the parser") {
  fs::path log = work_dir() / "defaults.txt";
  CHECK(run_cli("print-default-config", log) == 0);
  holonic::RunConfig parsed = holonic::parse_config(read_file(log));
  CHECK(holonic::serialize_config(parsed) ==
        holonic::serialize_config(holonic::RunConfig{}));
}

TEST_CASE("cli: run writes trace, summary and svg, exit 0") {
  holonic::RunConfig cfg;
  cfg.iterations = 400;
  fs::path cfg_path = write_config(cfg, "run.cfg");
  fs::path out = work_dir() / "run_out";
  int code = run_cli("run --config " + cfg_path.string() + " --out-dir " +
                         out.string() + " --emit-svg --seed 7",
                     work_dir() / "run.log");
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(summary["config"]["game"]["M"] == 3);
  CHECK(summary["config"]["run"]["seed"] == 7);
  CHECK(summary["final"].contains("final_theta0_avg"));
  CHECK(summary["reference"]["theta0_avg"] == doctest::Approx(0.6));
  std::string trace = read_file(out / "trace.csv");
  CHECK(trace.rfind("t,alpha,beta,", 0) == 0);
  std::string svg = read_file(out / "convergence.svg");
  CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("cli: full-length baseline run lands on the equilibrium") {
  holonic::RunConfig cfg;  // 5000 iterations, seed 7
  fs::path cfg_path = write_config(cfg, "baseline.cfg");
  fs::path out = work_dir() / "baseline_out";
  int code = run_cli("run --config " + cfg_path.string() + " --out-dir " +
                         out.string(),
                     work_dir() / "baseline.log");
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(summary["final"]["final_theta0_avg"].get<double>() ==
        doctest::Approx(0.6).epsilon(0.02 / 0.6));
  CHECK(summary["final"]["final_theta1_avg"].get<double>() ==
        doctest::Approx(-0.2).epsilon(0.02 / 0.2));
}

TEST_CASE("cli: config failures exit 2 and name the violated bound") {
  holonic::RunConfig cfg;
  cfg.gamma = 0.5;
  fs::path bad = write_config(cfg, "bad_gamma.cfg");
  fs::path log = work_dir() / "bad_gamma.log";
  CHECK(run_cli("run --config " + bad.string(), log) == 2);
  std::string msg = read_file(log);
  CHECK(msg.find("(1-kappa)/(M-1)") != std::string::npos);
  CHECK(msg.find("0.4") != std::string::npos);

  holonic::RunConfig zero;
  zero.iterations = 0;
  CHECK(run_cli("run --config " + write_config(zero, "zero.cfg").string(),
                work_dir() / "zero.log") == 2);

  CHECK(run_cli("run --config " + (work_dir() / "missing.cfg").string(),
                work_dir() / "missing.log") == 2);
}

TEST_CASE("cli: picard subcommand") {
  holonic::RunConfig cfg;
  fs::path cfg_path = write_config(cfg, "picard.cfg");
  fs::path out = work_dir() / "picard_out";
  int code = run_cli("picard --config " + cfg_path.string() + " --out-dir " +
                         out.string(),
                     work_dir() / "picard.log");
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(summary["picard_iterations"].get<int>() <= 50);
  for (double m : summary["picard_means"]) {
    CHECK(m == doctest::Approx(0.125).epsilon(1e-9));
  }

  // Particle-mode Picard cannot hit a 1e-12 tolerance through Monte Carlo
  // noise: expect a clean non-convergence exit.
  holonic::RunConfig particle;
  particle.belief_mode = "particle";
  particle.n_samples = 64;
  particle.max_picard_iterations = 20;
  int pcode = run_cli("picard --config " +
                          write_config(particle, "picard_particle.cfg").string() +
                          " --out-dir " + (work_dir() / "pp_out").string(),
                      work_dir() / "picard_particle.log");
  CHECK(pcode == 4);
}

TEST_CASE("cli: contraction subcommand and the uncertified regime") {
  holonic::RunConfig cfg;
  fs::path out = work_dir() / "contraction_out";
  int code = run_cli("contraction --config " +
                         write_config(cfg, "contraction.cfg").string() +
                         " --out-dir " + out.string() + " --trials 100",
                     work_dir() / "contraction.log");
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(summary["contraction_estimate"].get<double>() == doctest::Approx(0.2));

  holonic::RunConfig adversarial;
  adversarial.kind = "coupled_incentive";
  adversarial.gamma = 0.39;
  adversarial.rho = 5.0;
  fs::path log = work_dir() / "adversarial.log";
  int bad = run_cli("contraction --config " +
                        write_config(adversarial, "adversarial.cfg").string() +
                        " --out-dir " + (work_dir() / "adv_out").string() +
                        " --trials 50000",
                    log);
  CHECK(bad == 5);
  CHECK(read_file(log).find("uniqueness regime not certified") != std::string::npos);
}

TEST_CASE("cli: compare on the decoupled game agrees tightly") {
  holonic::RunConfig cfg;
  cfg.kind = "decoupled";
  cfg.gamma = 0.0;
  cfg.iterations = 4000;
  fs::path out = work_dir() / "decoupled_out";
  int code = run_cli("compare --config " +
                         write_config(cfg, "decoupled.cfg").string() +
                         " --out-dir " + out.string(),
                     work_dir() / "decoupled.log");
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  // No coupling path to amplify noise: the gap is an order tighter here.
  CHECK(summary["max_belief_gap"].get<double>() < 0.005);
  CHECK(summary["config"]["game"]["kind"] == "decoupled");
}

TEST_CASE("cli: run emits per-holon belief particles in particle mode") {
  holonic::RunConfig cfg;
  cfg.belief_mode = "particle";
  cfg.iterations = 200;
  cfg.n_samples = 64;
  fs::path out = work_dir() / "particles_out";
  int code = run_cli("run --config " + write_config(cfg, "particles.cfg").string() +
                         " --out-dir " + out.string(),
                     work_dir() / "particles.log");
  CHECK(code == 0);
  std::string csv = read_file(out / "belief_holon_0.csv");
  CHECK(csv.rfind("value,weight\n", 0) == 0);
  CHECK(fs::exists(out / "belief_holon_2.csv"));
}
