#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cts/dynamics.hpp"
#include "cts/levy.hpp"
#include "cts/structure.hpp"

namespace cts::deploy {

// One static equilibrium along the deployment path.  group_force holds a
// representative (first) cluster force per element family; rest_lengths_c are
// the actuation channels: strings re-solved from the self-stress at this c,
// bars pinned at their design rest length (bars are never actuated).
struct TrajectoryPoint {
  double c = 0.0;
  int n_p = 0;
  double lambda_min = 0.0;
  double f_min = 0.0;
  Eigen::VectorXd group_force;     // one per element family
  Eigen::VectorXd rest_lengths_c;  // one per cluster
};

// Rest-length actuation program: the deployment ratio ramps monotonically
// from c_start to c_end over [0, t_act] (C^2 smoothstep, so the schedule
// imposes no velocity or acceleration jump at the ramp corners) and holds
// thereafter; each cluster channel is a monotone piecewise-cubic through the
// trajectory's rest lengths, so the schedule inherits the sweep's
// monotonicity and stays continuous.
struct ActuationSchedule {
  double c_start = 0.0;
  double c_end = 0.0;
  double t_act = 0.0;
  double t_hold = 0.0;
  Eigen::VectorXd knots_c;    // ascending
  Eigen::MatrixXd knots_l0;   // n_knots x n_clusters
  Eigen::MatrixXd slopes;     // same shape, monotone cubic end slopes

  double ratio_at(double t) const;
  Eigen::VectorXd channels_at(double c) const;
  Eigen::VectorXd l0c_at(double t) const { return channels_at(ratio_at(t)); }
};

// Deviation of one tracked coordinate between a dynamic run and the
// quasi-static reference mapped through c(t); span is the static travel
// between the schedule endpoints, hold_mean averages the trace over the
// second half of the hold phase.
struct TrackedDeviation {
  std::string label;
  int coord = 0;  // index into the stacked coordinate vector
  double rms = 0.0;
  double peak = 0.0;
  double span = 0.0;
  double hold_mean = 0.0;
  double ref_end = 0.0;
};

struct BarForceStat {
  std::string label;
  double static_peak = 0.0;   // max |force| along the static trajectory
  double dynamic_peak = 0.0;  // max |force| over the dynamic run
};

struct DeviationReport {
  std::vector<TrackedDeviation> coords;
  std::vector<BarForceStat> bars;
};

// Re-solve the design's prestress at every grid ratio and collect mode count,
// stability, lowest natural frequency, representative forces, and actuation
// rest lengths.  Grid must be strictly increasing inside (0, 0.95).  Throws
// InfeasiblePoint (with the failing c) when a point loses sign feasibility,
// stability, or a usable mode.  Points are independent; threads > 1 splits
// the grid across a thread pool.
std::vector<TrajectoryPoint> sweep_trajectory(const levy::LevyParams& params,
                                              const std::vector<double>& c_grid,
                                              double mass_scale = 1.0,
                                              int threads = 1);

// Interpolate the sweep's rest-length table into an actuation program:
// t_act = t_hold = t_total / 2.  Throws RangeUncovered unless the sweep grid
// spans [c_start, c_end] (either direction).
ActuationSchedule build_schedule(const std::vector<TrajectoryPoint>& sweep,
                                 double c_start, double c_end, double t_total);

// Newton-iterate the free coordinates to static equilibrium under the
// structure's current rest lengths (infinity-norm residual below tol).
void settle_static(Structure& s, double tol = kResidualTol, int max_iter = 50);

// Integrate the dome through the schedule: start from the settled static
// equilibrium at c_start with the schedule's initial rest lengths, then run
// Newmark over t_act + t_hold.  cfg.t_end is overwritten by the schedule.
DeployRecord run_dynamic_deploy(const levy::DesignedDome& design,
                                const ActuationSchedule& schedule,
                                DynamicsConfig cfg);

// Stacked-coordinate indices of the tracked outer/inner top node
// X-coordinates (the deployment observables).
std::array<int, 2> tracked_indices(const levy::DomeTopology& topo);

// Compare a dynamic run against the quasi-static limit: settle the static
// equilibrium at each sweep ratio inside the schedule range, interpolate the
// tracked coordinates through c(t), and report RMS/peak deviations plus
// static-vs-dynamic bar force peaks.
DeviationReport compare_static_dynamic(const DeployRecord& record,
                                       const std::vector<TrajectoryPoint>& sweep,
                                       const ActuationSchedule& schedule,
                                       const levy::DesignedDome& design);

}  // namespace cts::deploy
