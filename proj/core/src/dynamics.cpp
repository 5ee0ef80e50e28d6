#include "cts/dynamics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "cts/modal.hpp"
#include "cts/statics.hpp"

namespace cts {

namespace {

Eigen::MatrixXd mass_from_elements(const Connectivity& conn, const Eigen::VectorXd& element_mass,
                                   int n_nodes) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n_nodes, 3 * n_nodes);
  for (int e = 0; e < conn.count(); ++e) {
    const auto& row = conn.rows[e];
    const double third = element_mass(e) / 3.0;
    const double sixth = element_mass(e) / 6.0;
    for (int k = 0; k < 3; ++k) {
      m(3 * row.from + k, 3 * row.from + k) += third;
      m(3 * row.to + k, 3 * row.to + k) += third;
      m(3 * row.from + k, 3 * row.to + k) += sixth;
      m(3 * row.to + k, 3 * row.from + k) += sixth;
    }
  }
  return m;
}

Eigen::MatrixXd slice(const Eigen::MatrixXd& full, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = full(idx[i], idx[j]);
  return out;
}

}  // namespace

MassMatrices assemble_mass(const Structure& s) {
  return assemble_mass(s, evaluate_elements(s));
}

MassMatrices assemble_mass(const Structure& s, const ElementState& state) {
  MassMatrices m;
  m.full = mass_from_elements(s.conn, state.mass, s.n_nodes());
  m.free = slice(m.full, free_coord_indices(s.nodes));
  return m;
}

DampingMatrices assemble_damping(const Structure& s, double zeta) {
  DampingMatrices d;
  const int dim = 3 * s.n_nodes();
  if (zeta == 0.0) {
    d.full = Eigen::MatrixXd::Zero(dim, dim);
    d.free = Eigen::MatrixXd::Zero(s.n_free_coords(), s.n_free_coords());
    return d;
  }

  const StiffnessBundle stiff = tangent_stiffness(s);
  const MassMatrices mass = assemble_mass(s);
  const ModalResult modes = natural_frequencies(stiff.K_T_free, mass.free,
                                                static_cast<int>(mass.free.rows()));

  // Stiffness-proportional damping calibrated at the geometric centre of the
  // positive spectrum of the initial configuration.  Prestressed cable nets
  // carry a band of near-mechanism drift modes decades below the axial band;
  // a mass-proportional term tuned there drags every slow actuation path
  // (steady lag a0/omega^2 grows without bound as omega -> 0), while tuning
  // the stiffness term to the soft band viscously locks the axial modes.
  // With a0 = 0 and zeta exact at the spectrum centre, drift modes stay
  // essentially undragged and high-frequency slack transients are damped
  // progressively harder.  A single-mode system keeps the classical two-term
  // fit, which is exact there.
  const double floor = 1e-9 * std::max(modes.omega_sq.size() > 0
                                           ? modes.omega_sq(modes.omega_sq.size() - 1)
                                           : 0.0,
                                       0.0);
  double omega_lo = 0.0, omega_hi = 0.0;
  for (int i = 0; i < modes.omega_sq.size(); ++i) {
    if (!(modes.omega_sq(i) > floor && modes.omega_sq(i) > 0.0)) continue;
    const double omega = std::sqrt(modes.omega_sq(i));
    if (omega_lo == 0.0) omega_lo = omega;
    omega_hi = omega;
  }
  if (omega_lo == 0.0)
    throw InsufficientModes("damping calibration found no positive natural frequency");

  if (omega_lo == omega_hi) {
    d.a0 = zeta * omega_lo;
    d.a1 = zeta / omega_lo;
  } else {
    d.a0 = 0.0;
    d.a1 = 2.0 * zeta / std::sqrt(omega_lo * omega_hi);
  }
  d.full = d.a0 * mass.full + d.a1 * stiff.K_T;
  d.free = slice(d.full, free_coord_indices(s.nodes));
  return d;
}

Eigen::VectorXd assemble_gravity(const Structure& s) {
  return gravity_loads(s.conn, evaluate_elements(s).mass, s.n_nodes());
}

DeployRecord integrate(const Structure& input, const DynamicsConfig& cfg,
                       const IntegrateOptions& opt) {
  if (!(cfg.dt > 0.0)) throw InvalidInput("dt must be positive");
  if (!(cfg.t_end >= cfg.dt)) throw InvalidInput("t_end must cover at least one step");
  if (!(cfg.damping_ratio >= 0.0 && cfg.damping_ratio < 1.0))
    throw InvalidInput("damping_ratio must lie in [0, 1)");
  if (!(cfg.newton_tol > 0.0)) throw InvalidInput("newton_tol must be positive");
  if (cfg.newton_max_iter < 1) throw InvalidInput("newton_max_iter must be at least 1");
  if (!(cfg.mass_scale > 0.0)) throw InvalidInput("mass_scale must be positive");

  Structure s = input;
  s.mat.mass_scale = cfg.mass_scale;
  if (opt.rest_lengths_at) s.rest_lengths_c = opt.rest_lengths_at(0.0);

  const int dim = 3 * s.n_nodes();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dim);
  if (opt.external_load.size() > 0) {
    if (opt.external_load.size() != dim) throw InvalidInput("external load size mismatch");
    load = opt.external_load;
  }

  {
    const Eigen::VectorXd r0 = static_residual(s, load, cfg.gravity_on);
    const double r0_norm = r0.size() > 0 ? r0.cwiseAbs().maxCoeff() : 0.0;
    if (r0_norm >= 10.0 * cfg.newton_tol)
      throw InvalidInput("initial state is not in static equilibrium (residual " +
                         std::to_string(r0_norm) + " N)");
  }

  // The damping scalars are calibrated once, here, but the matrix itself
  // tracks the current tangent: a slack string dissipates nothing, and a
  // damping matrix frozen at the taut starting tangent would keep dragging
  // configurations whose members have disengaged.
  const DampingMatrices damping = assemble_damping(s, cfg.damping_ratio);
  const std::vector<int> free = free_coord_indices(s.nodes);
  const int nf = static_cast<int>(free.size());

  Eigen::VectorXd u = gather(s.nodes.coords, free);   // free coordinates
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(nf);
  if (opt.initial_velocity.size() > 0) {
    if (opt.initial_velocity.size() != dim) throw InvalidInput("initial velocity size mismatch");
    v = gather(opt.initial_velocity, free);
  }

  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  DeployRecord rec;
  rec.times.resize(steps + 1);
  rec.coords.resize(dim, steps + 1);
  rec.velocities.resize(dim, steps + 1);
  rec.force_c.resize(s.n_clusters(), steps + 1);
  rec.rest_lengths_c.resize(s.n_clusters(), steps + 1);

  Eigen::VectorXd vel_full = Eigen::VectorXd::Zero(dim);
  auto record = [&](int col, double t, const ElementState& state) {
    rec.times(col) = t;
    rec.coords.col(col) = s.nodes.coords;
    for (int i = 0; i < nf; ++i) vel_full(free[i]) = v(i);
    rec.velocities.col(col) = vel_full;
    rec.force_c.col(col) = state.force_c;
    rec.rest_lengths_c.col(col) = s.rest_lengths_c;
  };
  record(0, 0.0, evaluate_elements(s));

  const double dt = cfg.dt;
  const double inv_dt2 = 4.0 / (dt * dt);
  for (int step = 0; step < steps; ++step) {
    const double t_next = (step + 1) * dt;
    if (opt.rest_lengths_at) s.rest_lengths_c = opt.rest_lengths_at(t_next);

    // Start-of-step operators: the mass follows the actuated rest lengths,
    // and the damping matrix is rebuilt from the start-of-step tangent so
    // disengaged members shed their share while the force field stays
    // continuous within the Newton iteration.
    const ElementState state0 = evaluate_elements(s);
    const MassMatrices mass = assemble_mass(s, state0);
    const Eigen::MatrixXd damp_free =
        damping.a0 * mass.free +
        damping.a1 * tangent_stiffness(s).K_T_free;
    Eigen::VectorXd rhs = load;
    if (cfg.gravity_on) rhs -= gravity_loads(s.conn, state0.mass, s.n_nodes());

    // Iterate on the step increment, not the coordinates themselves: the
    // 4/dt^2 factor would otherwise amplify coordinate round-off into the
    // residual and put the convergence floor above tight tolerances.
    Eigen::VectorXd du = dt * v + 0.5 * dt * dt * a;
    Eigen::VectorXd a_new(nf), v_new(nf), residual(nf);
    ElementState state;
    bool converged = false;
    for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
      for (int i = 0; i < nf; ++i) s.nodes.coords(free[i]) = u(i) + du(i);
      state = evaluate_elements(s);

      a_new = inv_dt2 * (du - dt * v) - a;
      v_new = v + 0.5 * dt * (a + a_new);

      residual = mass.free * a_new + damp_free * v_new +
                 gather(internal_nodal_forces(s, state) - rhs, free);
      if (residual.cwiseAbs().maxCoeff() < cfg.newton_tol) {
        converged = true;
        break;
      }

      const StiffnessBundle stiff = tangent_stiffness(s);
      Eigen::MatrixXd jac =
          inv_dt2 * mass.free + (2.0 / dt) * damp_free + stiff.K_T_free;
      const Eigen::VectorXd delta = jac.ldlt().solve(-residual);
      if (!delta.allFinite())
        throw NewtonDivergence("step " + std::to_string(step + 1) +
                               ": linear solve produced non-finite update");
      du += delta;
    }
    if (!converged)
      throw NewtonDivergence("step " + std::to_string(step + 1) + ": residual " +
                             std::to_string(residual.cwiseAbs().maxCoeff()) + " N after " +
                             std::to_string(cfg.newton_max_iter) + " iterations");

    u += du;
    v = v_new;
    a = a_new;
    record(step + 1, t_next, state);
  }
  return rec;
}

double elastic_energy(const Structure& s) {
  const ElementState state = evaluate_elements(s);
  double energy = 0.0;
  for (int g = 0; g < s.n_clusters(); ++g) {
    const double stretch = state.lengths_c(g) - s.rest_lengths_c(g);
    if (s.mat.kind[g] == ElementKind::String && stretch < 0.0) continue;  // slack
    energy += 0.5 * s.mat.modulus(g) * s.mat.area(g) * stretch * stretch /
              s.rest_lengths_c(g);
  }
  return energy;
}

double kinetic_energy(const Structure& s, const Eigen::VectorXd& vel) {
  const MassMatrices mass = assemble_mass(s);
  return 0.5 * vel.dot(mass.full * vel);
}

}  // namespace cts
