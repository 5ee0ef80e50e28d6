#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cts::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Every knob of every study, with the baseline dome protocol as defaults.
// All physical quantities carry their SI unit in the field name; ratios and
// counts are bare.  The struct is value-comparable so config round-trips can
// be asserted exactly: parse_config(emit_config(c)) == c.
struct RunConfig {
  // Dome template (the design point).
  double radius_m = 50.0;
  double deploy_ratio = 0.3;
  int complexity = 12;
  double outer_top_z_m = 8.663;
  double outer_bottom_z_m = -9.623;
  double inner_top_z_m = 13.458;
  double inner_bottom_z_m = -0.960;
  int clusters_per_group = 3;
  double anchor_force_n = -5000.0;

  // Section capacities used by member sizing.
  double bar_modulus_pa = 2.06e11;
  double bar_density_kg_m3 = 7870.0;
  double bar_capacity_pa = 355e6;
  double string_modulus_pa = 6e10;
  double string_density_kg_m3 = 2700.0;
  double string_capacity_pa = 110e6;
  double min_gauge_area_m2 = 1e-6;

  // cluster-study: arcs-per-group values to tabulate.
  std::vector<int> cluster_counts = {1, 2, 3, 4, 6, 12};

  // sweep: deployment-ratio grid (inclusive endpoints, uniform step).
  double sweep_start = 0.05;
  double sweep_stop = 0.90;
  double sweep_step = 0.05;

  // modes: how many to report; optionally analyze a saved dome file instead
  // of regenerating from the template.
  int mode_count = 10;
  std::string dome_file;

  // deploy / compare: actuation endpoints, run durations, integrator knobs.
  double deploy_start_ratio = 0.2;
  double deploy_end_ratio = 0.8;
  std::vector<double> total_times_s = {1.0, 2.0, 4.0};
  double dt_s = 1e-3;
  double damping_ratio = 0.01;
  double mass_scale = 50.0;
  double newton_tol_n = 1e-4;
  int newton_max_iter = 30;
  bool gravity_on = false;

  bool operator==(const RunConfig&) const = default;
};

// JSON (de)serialization.  parse_config rejects unknown keys and wrong-typed
// values with a diagnostic naming the field; missing keys keep their default.
RunConfig parse_config(const std::string& json_text);
std::string emit_config(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// Basic sanity checks shared by every command (positive dimensions, ratios
// inside (0, 0.95), positive step sizes...).  Throws InvalidInput.
void validate_config(const RunConfig& config);

// One invocation: parsed config plus the command-line environment.
struct RunContext {
  RunConfig config;
  std::filesystem::path out_dir = "out";
  int threads = 1;
  bool seedless = false;  // recorded in the manifest; nothing here draws randomness
};

// Commands.  Each writes its delimited tables plus a <command>_manifest.json
// (full config echo, tool version, output list, wall time) under out_dir and
// returns the number of table files written.  Failures throw cts::Error.
int cmd_generate(const RunContext& ctx);
int cmd_cluster_study(const RunContext& ctx);
int cmd_sweep(const RunContext& ctx);
int cmd_modes(const RunContext& ctx);
int cmd_deploy(const RunContext& ctx);
int cmd_compare(const RunContext& ctx);

// Dispatch by subcommand name ("generate", "cluster-study", "sweep", "modes",
// "deploy", "compare").  Unknown names throw InvalidInput.
int run_command(const std::string& name, const RunContext& ctx);

// Shortest-width decimal formatting that still round-trips a double exactly
// (17 significant digits); used for every numeric cell the tool emits.
std::string format_full(double x);

}  // namespace cts::cli
