#include "fesilc/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

namespace fesilc {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out))
    throw UsageError("invalid number for " + key + ": '" + text + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw UsageError("invalid integer for " + key + ": '" + text + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("invalid boolean for " + key + ": '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw UsageError(key + " must list at least one value");
  return out;
}

Scenario parse_scenario(const std::string& text) {
  const int s = parse_int("scenario", text);
  if (s < 1 || s > 3) throw UsageError("scenario must be 1, 2 or 3");
  return static_cast<Scenario>(s);
}

using Setter = std::function<void(CliConfig&, const std::string&)>;

struct KeySpec {
  Setter set;
  bool locked;  // fixed to the reference values in reference mode
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = {
      {"scenario", {[](CliConfig& c, const std::string& v) { c.scenario.scenario = parse_scenario(v); }, false}},
      {"iterations", {[](CliConfig& c, const std::string& v) { c.scenario.iterations = parse_int("iterations", v); }, false}},
      {"ts", {[](CliConfig& c, const std::string& v) { c.scenario.Ts = parse_double("ts", v); }, true}},
      {"duration", {[](CliConfig& c, const std::string& v) { c.scenario.duration = parse_double("duration", v); }, true}},
      {"gain", {[](CliConfig& c, const std::string& v) { c.scenario.L = parse_double("gain", v); }, false}},
      {"gains", {[](CliConfig& c, const std::string& v) { c.gains = parse_list("gains", v); }, false}},
      {"q_cutoff_hz", {[](CliConfig& c, const std::string& v) { c.scenario.q_cutoff_hz = parse_double("q_cutoff_hz", v); }, true}},
      {"q_mode",
       {[](CliConfig& c, const std::string& v) {
          const std::string m = trim(v);
          if (m == "causal") c.scenario.q_mode = QFilterMode::Causal;
          else if (m == "zero-phase") c.scenario.q_mode = QFilterMode::ZeroPhase;
          else if (m == "bypass") c.scenario.q_mode = QFilterMode::Bypass;
          else throw UsageError("q_mode must be causal, zero-phase or bypass");
        },
        false}},
      {"injection",
       {[](CliConfig& c, const std::string& v) {
          const std::string m = trim(v);
          if (m == "reference") c.scenario.injection = IlcInjection::ReferenceShift;
          else if (m == "output") c.scenario.injection = IlcInjection::OutputAdd;
          else throw UsageError("injection must be reference or output");
        },
        false}},
      {"psi", {[](CliConfig& c, const std::string& v) { c.scenario.psi = parse_double("psi", v); }, false}},
      {"r_dot_min", {[](CliConfig& c, const std::string& v) { c.scenario.r_dot_min = parse_double("r_dot_min", v); }, false}},
      {"lower_mode",
       {[](CliConfig& c, const std::string& v) {
          const std::string m = trim(v);
          if (m == "skip-rest") c.scenario.lower_mode = LowerBoundMode::SkipRestOnset;
          else if (m == "strict") c.scenario.lower_mode = LowerBoundMode::Strict;
          else throw UsageError("lower_mode must be skip-rest or strict");
        },
        false}},
      {"v0_scale", {[](CliConfig& c, const std::string& v) { c.scenario.v0_scale = parse_double("v0_scale", v); }, false}},
      {"r_dot_max", {[](CliConfig& c, const std::string& v) { c.scenario.r_dot_max_override = parse_double("r_dot_max", v); }, false}},
      {"v0", {[](CliConfig& c, const std::string& v) { c.scenario.v0_override = parse_double("v0", v); }, false}},
      {"start_x", {[](CliConfig& c, const std::string& v) { c.scenario.start.x = parse_double("start_x", v); }, true}},
      {"start_y", {[](CliConfig& c, const std::string& v) { c.scenario.start.y = parse_double("start_y", v); }, true}},
      {"end_x", {[](CliConfig& c, const std::string& v) { c.scenario.end.x = parse_double("end_x", v); }, true}},
      {"end_y", {[](CliConfig& c, const std::string& v) { c.scenario.end.y = parse_double("end_y", v); }, true}},
      {"profile",
       {[](CliConfig& c, const std::string& v) {
          const std::string m = trim(v);
          if (m == "ramp") c.scenario.profile = TimeProfile::Ramp;
          else if (m == "smoothstep") c.scenario.profile = TimeProfile::Smoothstep;
          else throw UsageError("profile must be ramp or smoothstep");
        },
        false}},
      {"kp", {[](CliConfig& c, const std::string& v) { c.scenario.lead.Kp = parse_double("kp", v); }, true}},
      {"kd", {[](CliConfig& c, const std::string& v) { c.scenario.lead.Kd = parse_double("kd", v); }, true}},
      {"omega_lead", {[](CliConfig& c, const std::string& v) { c.scenario.lead.omega_lead = parse_double("omega_lead", v); }, true}},
      {"plant_inertial", {[](CliConfig& c, const std::string& v) { c.scenario.plant.inertial_sum = parse_double("plant_inertial", v); }, true}},
      {"plant_damping", {[](CliConfig& c, const std::string& v) { c.scenario.plant.damping = parse_double("plant_damping", v); }, true}},
      {"muscle_wn", {[](CliConfig& c, const std::string& v) { c.scenario.muscle.w_n = parse_double("muscle_wn", v); }, true}},
      {"out_dir", {[](CliConfig& c, const std::string& v) { c.out_dir = trim(v); }, false}},
      {"reference_mode", {[](CliConfig& c, const std::string& v) { c.reference_mode = parse_bool("reference_mode", v); }, false}},
      {"parallel", {[](CliConfig& c, const std::string& v) { c.parallel = parse_bool("parallel", v); }, false}},
  };
  return table;
}

void apply_key(CliConfig& cfg, const std::string& key, const std::string& value, std::set<std::string>& touched) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
  it->second.set(cfg, value);
  touched.insert(key);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

CliConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Hybrid FES and robot iterative learning control simulator", "fesilc"};
  app.require_subcommand(1, 1);

  // Flag values are kept as text and routed through the config-key table so
  // both sources share one validation path.
  std::map<std::string, std::string> flag_values;
  std::string config_path;
  bool reference_mode = false;
  bool serial = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", flag_values["out_dir"], "output directory");
    sub->add_flag("--reference-mode", reference_mode, "lock model and timing to the reference values");
    sub->add_option("--ts", flag_values["ts"], "sample time, s");
    sub->add_option("--duration", flag_values["duration"], "trial length, s");
    sub->add_option("--profile", flag_values["profile"], "ramp or smoothstep");
  };
  auto add_control = [&](CLI::App* sub) {
    sub->add_option("--iterations", flag_values["iterations"], "trials per run");
    sub->add_option("--q-mode", flag_values["q_mode"], "causal, zero-phase or bypass");
    sub->add_option("--q-cutoff", flag_values["q_cutoff_hz"], "Q-filter cutoff, Hz");
    sub->add_option("--injection", flag_values["injection"], "reference or output");
    sub->add_option("--psi", flag_values["psi"], "constraint learning rate");
    sub->add_option("--v0-scale", flag_values["v0_scale"], "initial constraint scale");
    sub->add_option("--lower-mode", flag_values["lower_mode"], "skip-rest or strict");
  };

  CLI::App* run = app.add_subcommand("run", "run one scenario");
  add_common(run);
  add_control(run);
  run->add_option("--scenario", flag_values["scenario"], "1, 2 or 3");
  run->add_option("--gain", flag_values["gain"], "ILC learning gain L");

  CLI::App* sweep = app.add_subcommand("sweep", "run one scenario per learning gain");
  add_common(sweep);
  add_control(sweep);
  sweep->add_option("--scenario", flag_values["scenario"], "2 or 3");
  sweep->add_option("--gains", flag_values["gains"], "comma-separated learning gains")->required();
  sweep->add_flag("--serial", serial, "run gains one after another");

  CLI::App* traj = app.add_subcommand("trajectory", "write the reference trajectory");
  add_common(traj);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliConfig cfg;
  cfg.command = run->parsed() ? Command::Run : sweep->parsed() ? Command::Sweep : Command::Trajectory;

  std::map<std::string, std::string> file_values;
  if (!config_path.empty()) {
    cfg.config_path = config_path;
    file_values = read_config_file(config_path);
  }
  std::erase_if(flag_values, [](const auto& kv) { return kv.second.empty(); });

  // The scenario picks the defaults everything else is layered on.
  Scenario s = cfg.command == Command::Sweep ? Scenario::FeedbackPlusPilc : Scenario::FeedbackOnly;
  if (auto it = file_values.find("scenario"); it != file_values.end()) s = parse_scenario(it->second);
  if (auto it = flag_values.find("scenario"); it != flag_values.end()) s = parse_scenario(it->second);
  cfg.scenario = ScenarioConfig::defaults(s);

  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;

  std::set<std::string> touched;
  for (const auto& [k, v] : file_values) apply_key(cfg, k, v, touched);
  for (const auto& [k, v] : flag_values) apply_key(cfg, k, v, touched);
  if (reference_mode) cfg.reference_mode = true;
  if (serial) cfg.parallel = false;

  if (cfg.reference_mode) {
    for (const auto& key : touched)
      if (key_table().at(key).locked) throw UsageError("'" + key + "' is fixed in reference mode");
    cfg.scenario.reference_mode = true;
  }
  if (cfg.command == Command::Sweep) {
    if (cfg.gains.empty()) throw UsageError("sweep needs at least one gain");
    if (cfg.scenario.scenario == Scenario::FeedbackOnly) throw UsageError("sweep needs a learning scenario (2 or 3)");
  }
  try {
    cfg.scenario.validate();
    for (double g : cfg.gains) {
      ScenarioConfig probe = cfg.scenario;
      probe.L = g;
      probe.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return {buf, ptr};
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "auto"; }

}  // namespace

void write_config(std::ostream& os, const ScenarioConfig& cfg) {
  const auto line = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  line("scenario", std::to_string(static_cast<int>(cfg.scenario)));
  line("iterations", std::to_string(cfg.iterations));
  line("ts", format_number(cfg.Ts));
  line("duration", format_number(cfg.duration));
  line("start_x", format_number(cfg.start.x));
  line("start_y", format_number(cfg.start.y));
  line("end_x", format_number(cfg.end.x));
  line("end_y", format_number(cfg.end.y));
  line("profile", cfg.profile == TimeProfile::Ramp ? "ramp" : "smoothstep");
  line("kp", format_number(cfg.lead.Kp));
  line("kd", format_number(cfg.lead.Kd));
  line("omega_lead", format_number(cfg.lead.omega_lead));
  line("plant_inertial", format_number(cfg.plant.inertial_sum));
  line("plant_damping", format_number(cfg.plant.damping));
  line("muscle_wn", format_number(cfg.muscle.w_n));
  if (cfg.scenario == Scenario::FeedbackOnly) return;
  line("gain", format_number(cfg.L));
  line("q_cutoff_hz", format_number(cfg.q_cutoff_hz));
  line("q_mode", to_string(cfg.q_mode));
  line("injection", to_string(cfg.injection));
  if (cfg.scenario != Scenario::FullConstrained) return;
  line("psi", format_number(cfg.psi));
  line("r_dot_min", format_number(cfg.r_dot_min));
  line("lower_mode", to_string(cfg.lower_mode));
  line("v0_scale", format_number(cfg.v0_scale));
  if (cfg.r_dot_max_override) line("r_dot_max", optional_number(cfg.r_dot_max_override));
  if (cfg.v0_override) line("v0", optional_number(cfg.v0_override));
}

void emit_outputs(const RunReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  for (std::size_t k = 0; k < report.trials.size(); ++k) {
    const TrialRecord& rec = report.trials[k];
    const fs::path path = dir / ("trial_" + std::to_string(k + 1) + ".csv");
    auto out = open_output(path);
    out << "t,r_d,r,e,u_fb,u_ff,u_applied,r_dot\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
      out << format_number(rec.t[i]) << ',' << format_number(rec.r_d[i]) << ',' << format_number(rec.r[i]) << ','
          << format_number(rec.e[i]) << ',' << format_number(rec.u_fb[i]) << ',' << format_number(rec.u_ff[i]) << ','
          << format_number(rec.u_applied[i]) << ',' << format_number(rec.r_dot[i]) << '\n';
    }
    close_output(out, path);
  }

  {
    const fs::path path = dir / "summary.csv";
    auto out = open_output(path);
    out << "iteration,rmse_m,nrmse,pd_energy,max_velocity_mps,constraint_bound\n";
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
      const TrialRecord& rec = report.trials[k];
      out << (k + 1) << ',' << format_number(rec.rmse) << ',' << format_number(rec.nrmse) << ','
          << format_number(rec.pd_energy) << ',' << format_number(rec.max_velocity) << ','
          << format_number(rec.constraint_bound) << '\n';
    }
    close_output(out, path);
  }

  const fs::path path = dir / "report.txt";
  auto out = open_output(path);
  out << "# configuration\n";
  write_config(out, report.config);
  out << "\n# results\n";
  const auto seq = report.rmse_series();
  out << "first_rmse_m = " << format_number(seq.front()) << '\n';
  out << "final_rmse_m = " << format_number(seq.back()) << '\n';
  out << "plateau_iteration = "
      << (report.plateau_iteration ? std::to_string(*report.plateau_iteration) : std::string("none")) << '\n';
  out << "iterations_to_final_5pct = " << iterations_to_final(seq) << '\n';
  if (report.config.scenario == Scenario::FullConstrained) {
    out << "identified_r_dot_max_mps = " << format_number(report.r_dot_max) << '\n';
    out << "initial_constraint = " << format_number(report.v0) << '\n';
    out << "velocity_bound_held = " << (report.velocity_bound_held ? "true" : "false") << '\n';
    for (std::size_t k = 0; k < report.trials.size(); ++k)
      out << "iteration " << (k + 1) << ": pd_energy = " << format_number(report.trials[k].pd_energy)
          << ", constrained_pd_energy = " << format_number(report.trials[k].constrained_pd_energy)
          << ", bound = " << format_number(report.trials[k].constraint_bound) << '\n';
  }
  close_output(out, path);
}

void emit_trajectory(const TaskTrajectory& traj, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const fs::path path = dir / "trajectory.csv";
  auto out = open_output(path);
  out << "t,r_d,x,y\n";
  for (const auto& s : traj.samples)
    out << format_number(s.t) << ',' << format_number(s.r_d) << ',' << format_number(s.x) << ',' << format_number(s.y)
        << '\n';
  close_output(out, path);
}

namespace {

void print_summary(std::ostream& out, const std::string& title, const RunReport& report) {
  out << title << '\n';
  for (std::size_t k = 0; k < report.trials.size(); ++k) {
    const auto& rec = report.trials[k];
    char line[160];
    std::snprintf(line, sizeof line, "  %2zu  rmse %.4f (%.4f)  pd %.4f  vmax %.4f", k + 1, rec.rmse, rec.nrmse,
                  rec.pd_energy, rec.max_velocity);
    out << line << '\n';
  }
  if (report.config.scenario == Scenario::FullConstrained)
    out << "  velocity bound " << format_number(report.r_dot_max) << " m/s "
        << (report.velocity_bound_held ? "held" : "VIOLATED") << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return 2;
  }

  try {
    switch (cfg.command) {
      case Command::Trajectory: {
        const auto& s = cfg.scenario;
        emit_trajectory(line_trajectory(s.start, s.end, s.duration, s.Ts, s.profile), cfg.out_dir);
        out << "wrote " << (cfg.out_dir / "trajectory.csv").string() << '\n';
        return 0;
      }
      case Command::Run: {
        const RunReport report = run_scenario(cfg.scenario);
        emit_outputs(report, cfg.out_dir);
        print_summary(out, to_string(cfg.scenario.scenario), report);
        return report.velocity_bound_held ? 0 : 1;
      }
      case Command::Sweep: {
        // Each gain is an independent run writing to its own subdirectory.
        auto job = [&cfg](double gain) {
          ScenarioConfig sc = cfg.scenario;
          sc.L = gain;
          RunReport report = run_scenario(sc);
          emit_outputs(report, cfg.out_dir / ("L_" + format_number(gain)));
          return report;
        };
        std::vector<RunReport> reports;
        if (cfg.parallel) {
          std::vector<std::future<RunReport>> futures;
          for (double g : cfg.gains) futures.push_back(std::async(std::launch::async, job, g));
          for (auto& f : futures) reports.push_back(f.get());
        } else {
          for (double g : cfg.gains) reports.push_back(job(g));
        }
        bool ok = true;
        for (std::size_t i = 0; i < reports.size(); ++i) {
          print_summary(out, "L = " + format_number(cfg.gains[i]), reports[i]);
          ok = ok && reports[i].velocity_bound_held;
        }
        return ok ? 0 : 1;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace fesilc
