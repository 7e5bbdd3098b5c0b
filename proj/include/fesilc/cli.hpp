#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fesilc/sim.hpp"

namespace fesilc {

/// Bad flag, value or config entry; maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Run, Sweep, Trajectory };

struct CliConfig {
  Command command = Command::Run;
  ScenarioConfig scenario = ScenarioConfig::defaults(Scenario::FeedbackOnly);
  std::vector<double> gains;  // sweep only
  std::filesystem::path out_dir = "fesilc_out";
  std::optional<std::filesystem::path> config_path;
  bool reference_mode = false;
  bool parallel = true;
};

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "FESILC_OUT_DIR";

/// Flat `key = value` file; '#' starts a comment. Duplicate keys: last wins.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/**
 * Builds the run configuration. Precedence, lowest first: built-in defaults,
 * the output-directory environment variable, the config file, flags.
 * Throws UsageError on unknown flags, unknown keys or bad values.
 */
CliConfig parse_args(int argc, const char* const* argv);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Writes trial_<k>.csv, summary.csv and report.txt into `dir`.
void emit_outputs(const RunReport& report, const std::filesystem::path& dir);
/// Writes trajectory.csv with columns t,r_d,x,y.
void emit_trajectory(const TaskTrajectory& traj, const std::filesystem::path& dir);
/// Config echo in the same `key = value` form read_config_file accepts.
void write_config(std::ostream& os, const ScenarioConfig& cfg);

/// Entry point. Returns 0 on success, 1 when a run fails or a safety check
/// does not hold, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fesilc
