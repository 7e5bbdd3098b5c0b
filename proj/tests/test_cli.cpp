#include <doctest.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fesilc/cli.hpp"

using namespace fesilc;
namespace fs = std::filesystem;

namespace {

struct Argv {
  std::vector<std::string> store;
  std::vector<const char*> ptrs;
  explicit Argv(std::initializer_list<std::string> args) : store(args) {
    for (const auto& s : store) ptrs.push_back(s.c_str());
  }
  int argc() const { return static_cast<int>(ptrs.size()); }
  const char* const* argv() const { return ptrs.data(); }
};

CliConfig parse(std::initializer_list<std::string> args) {
  Argv a(args);
  return parse_args(a.argc(), a.argv());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fesilc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double to_double(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("flag parsing") {
  unsetenv(kOutDirEnv);
  const auto c = parse({"fesilc", "run", "--scenario", "2", "--gain", "0.1", "--iterations", "16"});
  CHECK(c.command == Command::Run);
  CHECK(c.scenario.scenario == Scenario::FeedbackPlusPilc);
  CHECK(c.scenario.L == 0.1);
  CHECK(c.scenario.iterations == 16);

  const auto s1 = parse({"fesilc", "run", "--scenario", "1"});
  CHECK(s1.scenario.scenario == Scenario::FeedbackOnly);
  CHECK(s1.scenario.lead.Kp == 10.0);
  CHECK(s1.scenario.Ts == 0.05);

  const auto sw = parse({"fesilc", "sweep", "--gains", "0.1,0.2,0.8,0.9"});
  CHECK(sw.command == Command::Sweep);
  CHECK(sw.gains == std::vector<double>{0.1, 0.2, 0.8, 0.9});
  CHECK(sw.scenario.scenario == Scenario::FeedbackPlusPilc);

  const auto s3 = parse({"fesilc", "run", "--scenario", "3"});
  CHECK(s3.scenario.iterations == 13);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(parse({"fesilc", "run", "--bogus"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc", "run", "--scenario", "4"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc", "run", "--gain", "abc"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc", "sweep", "--gains", "0.1", "--scenario", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc", "run", "--reference-mode", "--ts", "0.01"}), UsageError);
  CHECK_THROWS_AS(parse({"fesilc", "run", "--scenario", "2", "--reference-mode", "--gain", "2"}), UsageError);
}

TEST_CASE("precedence: defaults, environment, config file, flags") {
  const fs::path dir = scratch("precedence");
  const fs::path file = dir / "run.cfg";
  {
    std::ofstream out(file);
    out << "# learning run\n"
        << "scenario = 2\n"
        << "gain = 0.4   # overridden below\n"
        << "psi = 0.02\n"
        << "out_dir = from_file\n"
        << "\n"
        << "q_mode = causal\n";
  }
  setenv(kOutDirEnv, "from_env", 1);
  CHECK(parse({"fesilc", "run"}).out_dir == "from_env");
  const auto c = parse({"fesilc", "run", "--config", file.string(), "--gain", "0.8"});
  CHECK(c.scenario.scenario == Scenario::FeedbackPlusPilc);
  CHECK(c.scenario.L == 0.8);
  CHECK(c.scenario.psi == 0.02);
  CHECK(c.scenario.q_mode == QFilterMode::Causal);
  CHECK(c.out_dir == "from_file");
  CHECK(parse({"fesilc", "run", "--config", file.string(), "--out", "from_flag"}).out_dir == "from_flag");
  unsetenv(kOutDirEnv);

  {
    std::ofstream out(dir / "bad.cfg");
    out << "nonsense = 1\n";
  }
  CHECK_THROWS_AS(parse({"fesilc", "run", "--config", (dir / "bad.cfg").string()}), UsageError);
  {
    std::ofstream out(dir / "noeq.cfg");
    out << "gain 0.1\n";
  }
  CHECK_THROWS_AS(read_config_file(dir / "noeq.cfg"), UsageError);
  CHECK_THROWS_AS(read_config_file(dir / "missing.cfg"), UsageError);
}

TEST_CASE("config echo reads back as the same configuration") {
  auto cfg = ScenarioConfig::defaults(Scenario::FullConstrained);
  cfg.L = 0.3;
  cfg.psi = 0.004;
  const fs::path dir = scratch("echo");
  {
    std::ofstream out(dir / "echo.cfg");
    write_config(out, cfg);
  }
  const auto c = parse({"fesilc", "run", "--config", (dir / "echo.cfg").string()});
  CHECK(c.scenario.scenario == Scenario::FullConstrained);
  CHECK(c.scenario.L == 0.3);
  CHECK(c.scenario.psi == 0.004);
  CHECK(c.scenario.iterations == 13);
  CHECK(c.scenario.muscle.w_n == cfg.muscle.w_n);
}

TEST_CASE("shortest round-trip number format") {
  CHECK(format_number(0.05) == "0.05");
  CHECK(format_number(10.0) == "10");
  CHECK(format_number(-0.0168) == "-0.0168");
  for (double v : {0.1 + 0.2, 1.0 / 3.0, 1e-300, 6.02214076e23}) CHECK(to_double(format_number(v)) == v);
}

TEST_CASE("emitted files") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackPlusPilc);
  const auto report = run_scenario(cfg);
  const fs::path dir = scratch("emit");
  emit_outputs(report, dir);

  for (int k = 1; k <= 16; ++k) CHECK(fs::exists(dir / ("trial_" + std::to_string(k) + ".csv")));
  CHECK_FALSE(fs::exists(dir / "trial_17.csv"));

  const auto trial = read_csv(dir / "trial_3.csv");
  REQUIRE(trial.size() == 202);
  CHECK(trial[0] == std::vector<std::string>{"t", "r_d", "r", "e", "u_fb", "u_ff", "u_applied", "r_dot"});
  const auto& rec = report.trials[2];
  for (std::size_t i = 0; i < rec.size(); ++i) {
    REQUIRE(trial[i + 1].size() == 8);
    CHECK(to_double(trial[i + 1][2]) == rec.r[i]);
    CHECK(to_double(trial[i + 1][5]) == rec.u_ff[i]);
    CHECK(to_double(trial[i + 1][7]) == rec.r_dot[i]);
  }

  const auto summary = read_csv(dir / "summary.csv");
  REQUIRE(summary.size() == 17);
  CHECK(summary[0] ==
        std::vector<std::string>{"iteration", "rmse_m", "nrmse", "pd_energy", "max_velocity_mps", "constraint_bound"});
  CHECK(to_double(summary[1][1]) == doctest::Approx(0.0168).epsilon(0.01));
  CHECK(to_double(summary[1][2]) == doctest::Approx(0.0594).epsilon(0.01));

  const std::string text = slurp(dir / "report.txt");
  CHECK(text.find("plateau_iteration") != std::string::npos);
  CHECK(text.find("gain = 0.1") != std::string::npos);

  SUBCASE("re-running gives byte-identical files") {
    const fs::path again = scratch("emit_again");
    emit_outputs(run_scenario(cfg), again);
    for (const auto& entry : fs::directory_iterator(dir))
      CHECK(slurp(entry.path()) == slurp(again / entry.path().filename()));
  }
}

TEST_CASE("trajectory export") {
  const fs::path dir = scratch("traj");
  emit_trajectory(line_trajectory({0, 0}, {0.2, 0.2}, 10.0, 0.05), dir);
  const auto rows = read_csv(dir / "trajectory.csv");
  REQUIRE(rows.size() == 202);
  CHECK(rows[0] == std::vector<std::string>{"t", "r_d", "x", "y"});
  CHECK(to_double(rows[201][2]) == doctest::Approx(0.2));
}

TEST_CASE("exit status") {
  std::ostringstream out, err;
  const fs::path dir = scratch("exit");
  {
    Argv a{"fesilc", "run", "--scenario", "3", "--iterations", "3", "--out", (dir / "s3").string()};
    CHECK(run_cli(a.argc(), a.argv(), out, err) == 0);
  }
  {
    // A bound well below the natural speed cannot hold.
    std::ofstream cfg(dir / "tight.cfg");
    cfg << "scenario = 3\niterations = 2\nr_dot_max = 0.001\n";
  }
  {
    Argv a{"fesilc", "run", "--config", (dir / "tight.cfg").string(), "--out", (dir / "tight").string()};
    CHECK(run_cli(a.argc(), a.argv(), out, err) == 1);
  }
  {
    Argv a{"fesilc", "run", "--nope"};
    CHECK(run_cli(a.argc(), a.argv(), out, err) == 2);
  }
  {
    Argv a{"fesilc", "sweep", "--gains", "0.1,0.9", "--iterations", "2", "--out", (dir / "sweep").string()};
    CHECK(run_cli(a.argc(), a.argv(), out, err) == 0);
    CHECK(fs::exists(dir / "sweep" / "L_0.1" / "summary.csv"));
    CHECK(fs::exists(dir / "sweep" / "L_0.9" / "trial_2.csv"));
  }
}
