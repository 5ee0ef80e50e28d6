#include "cts/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cts/modal.hpp"
#include "cts/statics.hpp"

namespace cts::deploy {

namespace {

// Fritsch-Carlson end slopes: shape-preserving, so monotone data stays
// monotone after interpolation.
Eigen::MatrixXd monotone_slopes(const Eigen::VectorXd& x, const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(x.size());
  const int cols = static_cast<int>(y.cols());
  Eigen::MatrixXd m(n, cols);
  if (n == 1) return m.setZero();

  Eigen::VectorXd h = x.tail(n - 1) - x.head(n - 1);
  for (int j = 0; j < cols; ++j) {
    Eigen::VectorXd d(n - 1);
    for (int i = 0; i + 1 < n; ++i) d(i) = (y(i + 1, j) - y(i, j)) / h(i);

    for (int i = 1; i + 1 < n; ++i) {
      if (d(i - 1) * d(i) <= 0.0) {
        m(i, j) = 0.0;
      } else {
        const double w1 = 2.0 * h(i) + h(i - 1);
        const double w2 = h(i) + 2.0 * h(i - 1);
        m(i, j) = (w1 + w2) / (w1 / d(i - 1) + w2 / d(i));
      }
    }
    // One-sided three-point ends, clamped to preserve shape.
    const auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) return 0.0;
      if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
      return s;
    };
    if (n == 2) {
      m(0, j) = m(1, j) = d(0);
    } else {
      m(0, j) = end_slope(h(0), h(1), d(0), d(1));
      m(n - 1, j) = end_slope(h(n - 2), h(n - 3), d(n - 2), d(n - 3));
    }
  }
  return m;
}

levy::RetensionedDome retension_checked(const levy::DesignedDome& design, double c) {
  try {
    return levy::retension(design, c);
  } catch (const InfeasibleSign& e) {
    throw InfeasiblePoint(c, InfeasiblePoint::Cause::SignInfeasible,
                          "c = " + std::to_string(c) + ": " + e.what());
  } catch (const MultipleModes& e) {
    throw InfeasiblePoint(c, InfeasiblePoint::Cause::NoUniqueMode,
                          "c = " + std::to_string(c) + ": " + e.what());
  }
}

}  // namespace

double ActuationSchedule::ratio_at(double t) const {
  if (t_act <= 0.0 || t >= t_act) return c_end;
  if (t <= 0.0) return c_start;
  // C^2 smoothstep: the ramp reaches c_end in exactly t_act but imposes no
  // velocity or acceleration jump at either corner.  A corner-velocity ramp
  // would dump kinetic energy of order 1/2 M (span/t_act)^2 into the dome at
  // the instant actuation stops — far more than light viscous damping can
  // drain during the hold.
  const double x = t / t_act;
  const double s = x * x * x * (10.0 + x * (6.0 * x - 15.0));
  return c_start + (c_end - c_start) * s;
}

Eigen::VectorXd ActuationSchedule::channels_at(double c) const {
  const int n = static_cast<int>(knots_c.size());
  const double lo = knots_c(0), hi = knots_c(n - 1);
  const double cc = std::clamp(c, lo, hi);

  int i = static_cast<int>(std::upper_bound(knots_c.data(), knots_c.data() + n, cc) -
                           knots_c.data()) - 1;
  i = std::clamp(i, 0, n - 2);

  const double h = knots_c(i + 1) - knots_c(i);
  const double s = (cc - knots_c(i)) / h;
  // Cubic Hermite basis.
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * knots_l0.row(i).transpose() + (h * h10) * slopes.row(i).transpose() +
         h01 * knots_l0.row(i + 1).transpose() + (h * h11) * slopes.row(i + 1).transpose();
}

std::vector<TrajectoryPoint> sweep_trajectory(const levy::LevyParams& params,
                                              const std::vector<double>& c_grid,
                                              double mass_scale, int threads) {
  if (c_grid.empty()) throw InvalidInput("sweep grid is empty");
  for (size_t i = 0; i < c_grid.size(); ++i) {
    if (!(c_grid[i] > 0.0 && c_grid[i] < 0.95))
      throw InvalidInput("sweep ratios must lie in (0, 0.95)");
    if (i > 0 && !(c_grid[i] > c_grid[i - 1]))
      throw InvalidInput("sweep grid must be strictly increasing");
  }

  const levy::DesignedDome design = levy::design_dome(params);
  const int n_bars = 2 * design.topo.p;

  std::vector<TrajectoryPoint> points(c_grid.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto solve_point = [&](size_t i) {
    const double c = c_grid[i];
    levy::RetensionedDome rt = retension_checked(design, c);
    rt.structure.mat.mass_scale = mass_scale;

    TrajectoryPoint& pt = points[i];
    pt.c = c;
    pt.n_p = rt.prestress.n_p;

    const StiffnessBundle k = tangent_stiffness(rt.structure);
    pt.lambda_min = min_eigenvalue(k.K_T_free);
    if (!(pt.lambda_min > 0.0))
      throw InfeasiblePoint(c, InfeasiblePoint::Cause::Unstable,
                            "c = " + std::to_string(c) +
                                ": tangent stiffness is not positive definite");
    const MassMatrices m = assemble_mass(rt.structure);
    pt.f_min = natural_frequencies(k.K_T_free, m.free, 1).frequencies_hz(0);

    pt.group_force.resize(levy::kElementGroupCount);
    for (int g = 0, cursor = 0; g < levy::kElementGroupCount; ++g) {
      // Cluster layout: bar families are singleton runs of p, string families
      // follow as equal arc runs; the first cluster represents its family.
      const int family_size = levy::is_bar_group(static_cast<levy::ElementGroup>(g))
                                  ? design.topo.p
                                  : params.clusters_per_group;
      pt.group_force(g) = rt.prestress.force_c(cursor);
      cursor += family_size;
    }

    pt.rest_lengths_c = rt.prestress.rest_lengths_c;
    pt.rest_lengths_c.head(n_bars) = design.prestress.rest_lengths_c.head(n_bars);
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(c_grid.size())));
  if (n_workers == 1) {
    for (size_t i = 0; i < c_grid.size(); ++i) solve_point(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < c_grid.size(); i += n_workers) {
          try {
            solve_point(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return points;
}

ActuationSchedule build_schedule(const std::vector<TrajectoryPoint>& sweep,
                                 double c_start, double c_end, double t_total) {
  if (sweep.size() < 2) throw InvalidInput("schedule needs at least two sweep points");
  if (!(t_total > 0.0)) throw InvalidInput("schedule duration must be positive");

  const double lo = std::min(c_start, c_end);
  const double hi = std::max(c_start, c_end);
  if (lo < sweep.front().c || hi > sweep.back().c)
    throw RangeUncovered("schedule range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "] exceeds the sweep span [" +
                         std::to_string(sweep.front().c) + ", " +
                         std::to_string(sweep.back().c) + "]");

  ActuationSchedule sched;
  sched.c_start = c_start;
  sched.c_end = c_end;
  sched.t_act = 0.5 * t_total;
  sched.t_hold = 0.5 * t_total;

  const int n = static_cast<int>(sweep.size());
  const int channels = static_cast<int>(sweep.front().rest_lengths_c.size());
  sched.knots_c.resize(n);
  sched.knots_l0.resize(n, channels);
  for (int i = 0; i < n; ++i) {
    sched.knots_c(i) = sweep[i].c;
    sched.knots_l0.row(i) = sweep[i].rest_lengths_c.transpose();
  }
  sched.slopes = monotone_slopes(sched.knots_c, sched.knots_l0);
  return sched;
}

void settle_static(Structure& s, double tol, int max_iter) {
  const std::vector<int> free_idx = free_coord_indices(s.nodes);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd residual = static_residual(s);
    if (residual.lpNorm<Eigen::Infinity>() < tol) return;

    const StiffnessBundle k = tangent_stiffness(s);
    const Eigen::VectorXd step = k.K_T_free.ldlt().solve(residual);
    if (!step.allFinite())
      throw NewtonDivergence("static settle produced a non-finite step");
    for (size_t i = 0; i < free_idx.size(); ++i)
      s.nodes.coords(free_idx[i]) -= step(static_cast<Eigen::Index>(i));
  }
  throw NewtonDivergence("static settle did not converge in " +
                         std::to_string(max_iter) + " iterations");
}

DeployRecord run_dynamic_deploy(const levy::DesignedDome& design,
                                const ActuationSchedule& schedule, DynamicsConfig cfg) {
  Structure s = retension_checked(design, schedule.c_start).structure;
  s.rest_lengths_c = schedule.l0c_at(0.0);
  settle_static(s, cfg.newton_tol);

  cfg.t_end = schedule.t_act + schedule.t_hold;
  IntegrateOptions opt;
  opt.rest_lengths_at = [&schedule](double t) { return schedule.l0c_at(t); };
  return integrate(s, cfg, opt);
}

std::array<int, 2> tracked_indices(const levy::DomeTopology& topo) {
  return {3 * topo.node(levy::NodeGroup::OTN, 0),
          3 * topo.node(levy::NodeGroup::ITN, 0)};
}

DeviationReport compare_static_dynamic(const DeployRecord& record,
                                       const std::vector<TrajectoryPoint>& sweep,
                                       const ActuationSchedule& schedule,
                                       const levy::DesignedDome& design) {
  const double lo = std::min(schedule.c_start, schedule.c_end);
  const double hi = std::max(schedule.c_start, schedule.c_end);

  // Static reference ratios: sweep grid inside the range plus exact endpoints.
  std::vector<double> ratios{lo, hi};
  for (const TrajectoryPoint& pt : sweep)
    if (pt.c > lo && pt.c < hi) ratios.push_back(pt.c);
  std::sort(ratios.begin(), ratios.end());

  const std::array<int, 2> tracked = tracked_indices(design.topo);
  const int p = design.topo.p;

  Eigen::VectorXd ref_c(static_cast<Eigen::Index>(ratios.size()));
  Eigen::MatrixXd ref_coord(static_cast<Eigen::Index>(ratios.size()), 2);
  double static_ob_peak = 0.0, static_ib_peak = 0.0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    Structure s = retension_checked(design, ratios[i]).structure;
    s.rest_lengths_c = schedule.channels_at(ratios[i]);
    // Settle two decades above the force round-off floor; the induced
    // coordinate error (residual / stiffness) is far below the deviations
    // being measured.
    settle_static(s, 1e-5);
    ref_c(static_cast<Eigen::Index>(i)) = ratios[i];
    for (int j = 0; j < 2; ++j)
      ref_coord(static_cast<Eigen::Index>(i), j) = s.nodes.coords(tracked[j]);

    const ElementState state = evaluate_elements(s);
    static_ob_peak = std::max(static_ob_peak, state.force_c.head(p).cwiseAbs().maxCoeff());
    static_ib_peak =
        std::max(static_ib_peak, state.force_c.segment(p, p).cwiseAbs().maxCoeff());
  }
  const Eigen::MatrixXd ref_slopes = monotone_slopes(ref_c, ref_coord);

  // Hermite evaluation of the reference at arbitrary c.
  const auto ref_at = [&](double c, int j) {
    const int n = static_cast<int>(ref_c.size());
    const double cc = std::clamp(c, ref_c(0), ref_c(n - 1));
    int i = static_cast<int>(std::upper_bound(ref_c.data(), ref_c.data() + n, cc) -
                             ref_c.data()) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = ref_c(i + 1) - ref_c(i);
    const double s = (cc - ref_c(i)) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * ref_coord(i, j) + h * h10 * ref_slopes(i, j) +
           h01 * ref_coord(i + 1, j) + h * h11 * ref_slopes(i + 1, j);
  };

  DeviationReport report;
  const int steps = static_cast<int>(record.times.size());
  const double t_hold_tail = schedule.t_act + 0.5 * schedule.t_hold;
  static const char* labels[2] = {"OTN1_X", "ITN1_X"};
  for (int j = 0; j < 2; ++j) {
    TrackedDeviation dev;
    dev.label = labels[j];
    dev.coord = tracked[j];
    double sum_sq = 0.0;
    double hold_sum = 0.0;
    int hold_count = 0;
    for (int k = 0; k < steps; ++k) {
      const double value = record.coords(tracked[j], k);
      const double ref = ref_at(schedule.ratio_at(record.times(k)), j);
      const double diff = value - ref;
      sum_sq += diff * diff;
      dev.peak = std::max(dev.peak, std::abs(diff));
      if (record.times(k) >= t_hold_tail) {
        hold_sum += value;
        ++hold_count;
      }
    }
    dev.rms = std::sqrt(sum_sq / steps);
    dev.ref_end = ref_at(schedule.c_end, j);
    dev.span = std::abs(dev.ref_end - ref_at(schedule.c_start, j));
    dev.hold_mean = hold_count > 0 ? hold_sum / hold_count : 0.0;
    report.coords.push_back(dev);
  }

  BarForceStat ob{"OB", static_ob_peak,
                  record.force_c.topRows(p).cwiseAbs().maxCoeff()};
  BarForceStat ib{"IB", static_ib_peak,
                  record.force_c.middleRows(p, p).cwiseAbs().maxCoeff()};
  report.bars.push_back(ob);
  report.bars.push_back(ib);
  return report;
}

}  // namespace cts::deploy
