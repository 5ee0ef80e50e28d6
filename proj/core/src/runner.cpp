#include "cts/runner.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cts/deploy.hpp"
#include "cts/dome_io.hpp"
#include "cts/dynamics.hpp"
#include "cts/errors.hpp"
#include "cts/levy.hpp"
#include "cts/modal.hpp"
#include "cts/statics.hpp"

namespace cts::cli {

namespace {

using nlohmann::json;

levy::LevyParams to_levy_params(const RunConfig& c) {
  levy::LevyParams p;
  p.radius = c.radius_m;
  p.deploy_ratio = c.deploy_ratio;
  p.complexity = c.complexity;
  p.z1 = c.outer_top_z_m;
  p.z2 = c.outer_bottom_z_m;
  p.z3 = c.inner_top_z_m;
  p.z4 = c.inner_bottom_z_m;
  p.clusters_per_group = c.clusters_per_group;
  return p;
}

levy::CapacityTable to_capacities(const RunConfig& c) {
  levy::CapacityTable t;
  t.bar = {c.bar_modulus_pa, c.bar_density_kg_m3, c.bar_capacity_pa};
  t.string = {c.string_modulus_pa, c.string_density_kg_m3, c.string_capacity_pa};
  t.min_gauge_area = c.min_gauge_area_m2;
  return t;
}

DynamicsConfig to_dynamics(const RunConfig& c) {
  DynamicsConfig d;
  d.dt = c.dt_s;
  d.damping_ratio = c.damping_ratio;
  d.newton_tol = c.newton_tol_n;
  d.newton_max_iter = c.newton_max_iter;
  d.mass_scale = c.mass_scale;
  d.gravity_on = c.gravity_on;
  return d;
}

// Inclusive uniform grid; the last point lands on sweep_stop only when the
// step divides the interval (it does for every shipped default).
std::vector<double> sweep_grid(const RunConfig& c) {
  const int count =
      static_cast<int>(std::floor((c.sweep_stop - c.sweep_start) / c.sweep_step + 1e-9));
  std::vector<double> grid(count + 1);
  for (int i = 0; i <= count; ++i) grid[i] = c.sweep_start + i * c.sweep_step;
  return grid;
}

// "OB_1".."OB_12", "ORS_1".., numbering clusters within their family.
std::vector<std::string> cluster_labels(const std::vector<levy::ElementGroup>& groups) {
  std::array<int, levy::kElementGroupCount> seen{};
  std::vector<std::string> labels;
  labels.reserve(groups.size());
  for (const levy::ElementGroup g : groups)
    labels.push_back(levy::to_string(g) + "_" +
                     std::to_string(++seen[static_cast<int>(g)]));
  return labels;
}

// One delimited table: header on open, one record per row() call.
class Table {
public:
  Table(const RunContext& ctx, const std::string& name,
        const std::vector<std::string>& header)
      : name_(name), out_(ctx.out_dir / name) {
    if (!out_)
      throw InvalidInput("cannot open '" + (ctx.out_dir / name).string() +
                         "' for writing");
    write(header);
  }

  void row(const std::vector<std::string>& cells) { write(cells); }
  const std::string& name() const { return name_; }

private:
  void write(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string name_;
  std::ofstream out_;
};

std::string fmt_int(int v) { return std::to_string(v); }

// Filename-safe tag for a run duration: "1", "2", "0.5", ...
std::string time_tag(double t_total) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t_total);
  return buf;
}

// Wraps a command body with wall-clock timing and the manifest write.
class Manifest {
public:
  Manifest(const RunContext& ctx, const std::string& command)
      : ctx_(ctx), command_(command), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(ctx.out_dir);
  }

  void add(const std::string& filename) { outputs_.push_back(filename); }

  int finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    json doc;
    doc["command"] = command_;
    doc["tool_version"] = kToolVersion;
    doc["threads"] = ctx_.threads;
    doc["seedless"] = ctx_.seedless;
    doc["config"] = json::parse(emit_config(ctx_.config));
    doc["outputs"] = outputs_;
    doc["wall_time_s"] = wall;

    std::string name = command_ + "_manifest.json";
    for (char& ch : name)
      if (ch == '-') ch = '_';
    std::ofstream out(ctx_.out_dir / name);
    if (!out)
      throw InvalidInput("cannot open '" + (ctx_.out_dir / name).string() +
                         "' for writing");
    out << doc.dump(2) << '\n';
    return static_cast<int>(outputs_.size());
  }

private:
  const RunContext& ctx_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

// The dome every command analyzes: designed from the template, carrying the
// run's mass scale so saved copies are self-contained.
levy::DesignedDome design_from(const RunConfig& c) {
  levy::DesignedDome dome =
      levy::design_dome(to_levy_params(c), to_capacities(c), c.anchor_force_n);
  dome.structure.mat.mass_scale = c.mass_scale;
  return dome;
}

void write_record_tables(const RunContext& ctx, Manifest& manifest,
                         const std::string& prefix, const DeployRecord& record,
                         const std::vector<std::string>& labels) {
  const int n_nodes = static_cast<int>(record.coords.rows()) / 3;
  const int nc = static_cast<int>(record.force_c.rows());
  const int steps = record.steps();

  std::vector<std::string> coord_head = {"t_s"}, vel_head = {"t_s"};
  for (int i = 0; i < n_nodes; ++i) {
    const std::string node = "n" + std::to_string(i);
    for (const char* axis : {"x", "y", "z"}) {
      coord_head.push_back(node + "_" + axis + "_m");
      vel_head.push_back(node + "_v" + axis + "_m_s");
    }
  }
  std::vector<std::string> force_head = {"t_s"}, rest_head = {"t_s"};
  for (int k = 0; k < nc; ++k) {
    force_head.push_back(labels[k] + "_n");
    rest_head.push_back(labels[k] + "_m");
  }

  Table coords(ctx, prefix + "_coords.csv", coord_head);
  Table vels(ctx, prefix + "_velocities.csv", vel_head);
  Table forces(ctx, prefix + "_forces.csv", force_head);
  Table rests(ctx, prefix + "_rest_lengths.csv", rest_head);

  std::vector<std::string> cells;
  for (int t = 0; t < steps; ++t) {
    const std::string time = format_full(record.times(t));

    cells.assign(1, time);
    for (int i = 0; i < 3 * n_nodes; ++i)
      cells.push_back(format_full(record.coords(i, t)));
    coords.row(cells);

    cells.assign(1, time);
    for (int i = 0; i < 3 * n_nodes; ++i)
      cells.push_back(format_full(record.velocities(i, t)));
    vels.row(cells);

    cells.assign(1, time);
    for (int k = 0; k < nc; ++k)
      cells.push_back(format_full(record.force_c(k, t)));
    forces.row(cells);

    cells.assign(1, time);
    for (int k = 0; k < nc; ++k)
      cells.push_back(format_full(record.rest_lengths_c(k, t)));
    rests.row(cells);
  }

  manifest.add(coords.name());
  manifest.add(vels.name());
  manifest.add(forces.name());
  manifest.add(rests.name());
}

}  // namespace

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string emit_config(const RunConfig& c) {
  json doc;
  doc["radius_m"] = c.radius_m;
  doc["deploy_ratio"] = c.deploy_ratio;
  doc["complexity"] = c.complexity;
  doc["outer_top_z_m"] = c.outer_top_z_m;
  doc["outer_bottom_z_m"] = c.outer_bottom_z_m;
  doc["inner_top_z_m"] = c.inner_top_z_m;
  doc["inner_bottom_z_m"] = c.inner_bottom_z_m;
  doc["clusters_per_group"] = c.clusters_per_group;
  doc["anchor_force_n"] = c.anchor_force_n;
  doc["bar_modulus_pa"] = c.bar_modulus_pa;
  doc["bar_density_kg_m3"] = c.bar_density_kg_m3;
  doc["bar_capacity_pa"] = c.bar_capacity_pa;
  doc["string_modulus_pa"] = c.string_modulus_pa;
  doc["string_density_kg_m3"] = c.string_density_kg_m3;
  doc["string_capacity_pa"] = c.string_capacity_pa;
  doc["min_gauge_area_m2"] = c.min_gauge_area_m2;
  doc["cluster_counts"] = c.cluster_counts;
  doc["sweep_start"] = c.sweep_start;
  doc["sweep_stop"] = c.sweep_stop;
  doc["sweep_step"] = c.sweep_step;
  doc["mode_count"] = c.mode_count;
  doc["dome_file"] = c.dome_file;
  doc["deploy_start_ratio"] = c.deploy_start_ratio;
  doc["deploy_end_ratio"] = c.deploy_end_ratio;
  doc["total_times_s"] = c.total_times_s;
  doc["dt_s"] = c.dt_s;
  doc["damping_ratio"] = c.damping_ratio;
  doc["mass_scale"] = c.mass_scale;
  doc["newton_tol_n"] = c.newton_tol_n;
  doc["newton_max_iter"] = c.newton_max_iter;
  doc["gravity_on"] = c.gravity_on;
  return doc.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config root must be a JSON object");

  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    const auto num = [&](double& slot) {
      if (!value.is_number())
        throw InvalidInput("config field '" + key + "' must be a number");
      slot = value.get<double>();
    };
    const auto integer = [&](int& slot) {
      if (!value.is_number_integer())
        throw InvalidInput("config field '" + key + "' must be an integer");
      slot = value.get<int>();
    };
    const auto boolean = [&](bool& slot) {
      if (!value.is_boolean())
        throw InvalidInput("config field '" + key + "' must be a boolean");
      slot = value.get<bool>();
    };
    const auto text_field = [&](std::string& slot) {
      if (!value.is_string())
        throw InvalidInput("config field '" + key + "' must be a string");
      slot = value.get<std::string>();
    };
    const auto int_list = [&](std::vector<int>& slot) {
      if (!value.is_array())
        throw InvalidInput("config field '" + key + "' must be an array");
      slot.clear();
      for (const auto& v : value) {
        if (!v.is_number_integer())
          throw InvalidInput("config field '" + key + "' must hold integers");
        slot.push_back(v.get<int>());
      }
    };
    const auto num_list = [&](std::vector<double>& slot) {
      if (!value.is_array())
        throw InvalidInput("config field '" + key + "' must be an array");
      slot.clear();
      for (const auto& v : value) {
        if (!v.is_number())
          throw InvalidInput("config field '" + key + "' must hold numbers");
        slot.push_back(v.get<double>());
      }
    };

    if (key == "radius_m") num(c.radius_m);
    else if (key == "deploy_ratio") num(c.deploy_ratio);
    else if (key == "complexity") integer(c.complexity);
    else if (key == "outer_top_z_m") num(c.outer_top_z_m);
    else if (key == "outer_bottom_z_m") num(c.outer_bottom_z_m);
    else if (key == "inner_top_z_m") num(c.inner_top_z_m);
    else if (key == "inner_bottom_z_m") num(c.inner_bottom_z_m);
    else if (key == "clusters_per_group") integer(c.clusters_per_group);
    else if (key == "anchor_force_n") num(c.anchor_force_n);
    else if (key == "bar_modulus_pa") num(c.bar_modulus_pa);
    else if (key == "bar_density_kg_m3") num(c.bar_density_kg_m3);
    else if (key == "bar_capacity_pa") num(c.bar_capacity_pa);
    else if (key == "string_modulus_pa") num(c.string_modulus_pa);
    else if (key == "string_density_kg_m3") num(c.string_density_kg_m3);
    else if (key == "string_capacity_pa") num(c.string_capacity_pa);
    else if (key == "min_gauge_area_m2") num(c.min_gauge_area_m2);
    else if (key == "cluster_counts") int_list(c.cluster_counts);
    else if (key == "sweep_start") num(c.sweep_start);
    else if (key == "sweep_stop") num(c.sweep_stop);
    else if (key == "sweep_step") num(c.sweep_step);
    else if (key == "mode_count") integer(c.mode_count);
    else if (key == "dome_file") text_field(c.dome_file);
    else if (key == "deploy_start_ratio") num(c.deploy_start_ratio);
    else if (key == "deploy_end_ratio") num(c.deploy_end_ratio);
    else if (key == "total_times_s") num_list(c.total_times_s);
    else if (key == "dt_s") num(c.dt_s);
    else if (key == "damping_ratio") num(c.damping_ratio);
    else if (key == "mass_scale") num(c.mass_scale);
    else if (key == "newton_tol_n") num(c.newton_tol_n);
    else if (key == "newton_max_iter") integer(c.newton_max_iter);
    else if (key == "gravity_on") boolean(c.gravity_on);
    else throw InvalidInput("unknown config field '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const RunConfig& c) {
  levy::validate(to_levy_params(c));
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw InvalidInput(std::string(what) + " must be positive");
  };
  positive(c.bar_modulus_pa, "bar_modulus_pa");
  positive(c.bar_density_kg_m3, "bar_density_kg_m3");
  positive(c.bar_capacity_pa, "bar_capacity_pa");
  positive(c.string_modulus_pa, "string_modulus_pa");
  positive(c.string_density_kg_m3, "string_density_kg_m3");
  positive(c.string_capacity_pa, "string_capacity_pa");
  if (c.min_gauge_area_m2 < 0.0)
    throw InvalidInput("min_gauge_area_m2 must be non-negative");
  if (c.cluster_counts.empty())
    throw InvalidInput("cluster_counts must name at least one arc count");
  for (int nc : c.cluster_counts)
    if (nc < 1) throw InvalidInput("cluster_counts entries must be >= 1");
  if (!(c.sweep_start > 0.0 && c.sweep_stop < 0.95 && c.sweep_start <= c.sweep_stop))
    throw InvalidInput("sweep grid must satisfy 0 < sweep_start <= sweep_stop < 0.95");
  positive(c.sweep_step, "sweep_step");
  if (c.mode_count < 1) throw InvalidInput("mode_count must be >= 1");
  for (double r : {c.deploy_start_ratio, c.deploy_end_ratio})
    if (!(r > 0.0 && r < 0.95))
      throw InvalidInput("deploy ratios must lie in (0, 0.95)");
  if (c.total_times_s.empty())
    throw InvalidInput("total_times_s must name at least one run duration");
  for (double t : c.total_times_s) positive(t, "total_times_s entries");
  positive(c.dt_s, "dt_s");
  if (!(c.damping_ratio >= 0.0 && c.damping_ratio < 1.0))
    throw InvalidInput("damping_ratio must lie in [0, 1)");
  positive(c.newton_tol_n, "newton_tol_n");
  if (c.newton_max_iter < 1) throw InvalidInput("newton_max_iter must be >= 1");
  positive(c.mass_scale, "mass_scale");
}

int cmd_generate(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "generate");
  const levy::DesignedDome dome = design_from(ctx.config);
  io::save_dome(ctx.out_dir / "dome.json", dome);
  manifest.add("dome.json");
  return manifest.finish();
}

int cmd_cluster_study(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "cluster-study");
  Table table(ctx, "cluster_study.csv", {"n_c", "n_p", "lambda_min", "f_min"});

  for (const int nc : ctx.config.cluster_counts) {
    RunConfig variant = ctx.config;
    variant.clusters_per_group = nc;
    levy::DesignedDome dome = design_from(variant);
    const double lambda_min = min_eigenvalue(tangent_stiffness(dome.structure).K_T_free);
    const ModalResult modes = natural_frequencies(dome.structure, 1);
    table.row({fmt_int(nc), fmt_int(dome.prestress.n_p), format_full(lambda_min),
               format_full(modes.frequencies_hz(0))});
  }

  manifest.add(table.name());
  return manifest.finish();
}

int cmd_sweep(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "sweep");

  const levy::DesignedDome design = design_from(ctx.config);
  const std::vector<deploy::TrajectoryPoint> points = deploy::sweep_trajectory(
      to_levy_params(ctx.config), sweep_grid(ctx.config), ctx.config.mass_scale,
      ctx.threads);

  Table summary(ctx, "sweep_summary.csv", {"c", "n_p", "lambda_min", "f_min"});
  std::vector<std::string> force_head = {"c"};
  for (int g = 0; g < levy::kElementGroupCount; ++g)
    force_head.push_back(levy::to_string(static_cast<levy::ElementGroup>(g)) + "_n");
  Table forces(ctx, "sweep_forces.csv", force_head);
  const std::vector<std::string> labels = cluster_labels(design.cluster_group);
  std::vector<std::string> rest_head = {"c"};
  for (const std::string& label : labels) rest_head.push_back(label + "_m");
  Table rests(ctx, "sweep_rest_lengths.csv", rest_head);

  for (const deploy::TrajectoryPoint& pt : points) {
    summary.row({format_full(pt.c), fmt_int(pt.n_p), format_full(pt.lambda_min),
                 format_full(pt.f_min)});
    std::vector<std::string> cells = {format_full(pt.c)};
    for (Eigen::Index g = 0; g < pt.group_force.size(); ++g)
      cells.push_back(format_full(pt.group_force(g)));
    forces.row(cells);
    cells.assign(1, format_full(pt.c));
    for (Eigen::Index k = 0; k < pt.rest_lengths_c.size(); ++k)
      cells.push_back(format_full(pt.rest_lengths_c(k)));
    rests.row(cells);
  }

  manifest.add(summary.name());
  manifest.add(forces.name());
  manifest.add(rests.name());
  return manifest.finish();
}

int cmd_modes(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "modes");

  // A saved dome file is a complete analysis input; absent one, analyze the
  // template's design point.
  const levy::DesignedDome dome = ctx.config.dome_file.empty()
                                      ? design_from(ctx.config)
                                      : io::load_dome(ctx.config.dome_file);
  const Structure& s = dome.structure;
  const int k = std::min(ctx.config.mode_count, s.n_free_coords());
  const ModalResult modes = natural_frequencies(s, k);

  Table freq(ctx, "modes_frequencies.csv", {"mode", "omega_sq", "f_hz"});
  for (int i = 0; i < k; ++i)
    freq.row({fmt_int(i + 1), format_full(modes.omega_sq(i)),
              format_full(modes.frequencies_hz(i))});

  std::vector<std::string> head = {"coord", "node", "axis"};
  for (int i = 0; i < k; ++i) head.push_back("mode_" + std::to_string(i + 1));
  Table shapes(ctx, "modes_shapes.csv", head);
  const std::vector<int> free = free_coord_indices(s.nodes);
  constexpr const char* kAxis[3] = {"x", "y", "z"};
  for (size_t r = 0; r < free.size(); ++r) {
    std::vector<std::string> cells = {fmt_int(free[r]), fmt_int(free[r] / 3),
                                      kAxis[free[r] % 3]};
    for (int i = 0; i < k; ++i) cells.push_back(format_full(modes.shapes(r, i)));
    shapes.row(cells);
  }

  manifest.add(freq.name());
  manifest.add(shapes.name());
  return manifest.finish();
}

int cmd_deploy(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "deploy");

  const RunConfig& c = ctx.config;
  const levy::DesignedDome design = design_from(c);
  const std::vector<deploy::TrajectoryPoint> points = deploy::sweep_trajectory(
      to_levy_params(c), sweep_grid(c), c.mass_scale, ctx.threads);
  const std::vector<std::string> labels = cluster_labels(design.cluster_group);

  for (const double t_total : c.total_times_s) {
    const deploy::ActuationSchedule schedule = deploy::build_schedule(
        points, c.deploy_start_ratio, c.deploy_end_ratio, t_total);
    const DeployRecord record =
        deploy::run_dynamic_deploy(design, schedule, to_dynamics(c));
    write_record_tables(ctx, manifest, "deploy_t" + time_tag(t_total), record,
                        labels);
  }
  return manifest.finish();
}

int cmd_compare(const RunContext& ctx) {
  validate_config(ctx.config);
  Manifest manifest(ctx, "compare");

  const RunConfig& c = ctx.config;
  const levy::DesignedDome design = design_from(c);
  const std::vector<deploy::TrajectoryPoint> points = deploy::sweep_trajectory(
      to_levy_params(c), sweep_grid(c), c.mass_scale, ctx.threads);

  Table coords(ctx, "compare_deviations.csv",
               {"t_total_s", "label", "coord", "rms_m", "peak_m", "span_m",
                "hold_mean_m", "ref_end_m"});
  Table bars(ctx, "compare_bar_peaks.csv",
             {"t_total_s", "label", "static_peak_n", "dynamic_peak_n"});

  for (const double t_total : c.total_times_s) {
    const deploy::ActuationSchedule schedule = deploy::build_schedule(
        points, c.deploy_start_ratio, c.deploy_end_ratio, t_total);
    const DeployRecord record =
        deploy::run_dynamic_deploy(design, schedule, to_dynamics(c));
    const deploy::DeviationReport report =
        deploy::compare_static_dynamic(record, points, schedule, design);

    const std::string t_cell = format_full(t_total);
    for (const deploy::TrackedDeviation& d : report.coords)
      coords.row({t_cell, d.label, fmt_int(d.coord), format_full(d.rms),
                  format_full(d.peak), format_full(d.span),
                  format_full(d.hold_mean), format_full(d.ref_end)});
    for (const deploy::BarForceStat& b : report.bars)
      bars.row({t_cell, b.label, format_full(b.static_peak),
                format_full(b.dynamic_peak)});
  }

  manifest.add(coords.name());
  manifest.add(bars.name());
  return manifest.finish();
}

int run_command(const std::string& name, const RunContext& ctx) {
  if (name == "generate") return cmd_generate(ctx);
  if (name == "cluster-study") return cmd_cluster_study(ctx);
  if (name == "sweep") return cmd_sweep(ctx);
  if (name == "modes") return cmd_modes(ctx);
  if (name == "deploy") return cmd_deploy(ctx);
  if (name == "compare") return cmd_compare(ctx);
  throw InvalidInput("unknown command '" + name + "'");
}

}  // namespace cts::cli
