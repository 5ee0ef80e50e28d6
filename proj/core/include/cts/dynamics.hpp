#pragma once

#include <Eigen/Dense>
#include <functional>

#include "cts/structure.hpp"

namespace cts {

struct ElementState;

// Consistent translational mass: each element places m/3 on each end node's
// diagonal and m/6 on the end-to-end coupling, per axis.  Row sums equal the
// total element mass.
struct MassMatrices {
  Eigen::MatrixXd full;  // 3n x 3n
  Eigen::MatrixXd free;  // free coordinates only
};

// Rayleigh damping D = a0*M + a1*K_T, calibrated once at a reference state.
struct DampingMatrices {
  Eigen::MatrixXd full;
  Eigen::MatrixXd free;
  double a0 = 0.0;  // mass coefficient, 1/s
  double a1 = 0.0;  // stiffness coefficient, s
};

struct DynamicsConfig {
  double dt = 1e-3;            // s, fixed step
  double t_end = 1.0;          // s
  double damping_ratio = 0.0;  // modal damping at the calibration frequencies
  double newton_tol = 1e-6;    // N, max-abs residual per free coordinate
  int newton_max_iter = 30;
  double mass_scale = 1.0;     // density multiplier for this run
  bool gravity_on = false;
};

// Per-step inputs that are optional: a rest-length schedule (actuation), a
// constant external nodal load, and an initial velocity kick.
struct IntegrateOptions {
  std::function<Eigen::VectorXd(double)> rest_lengths_at;  // t -> l_0c
  Eigen::VectorXd external_load;                           // full 3n, constant
  Eigen::VectorXd initial_velocity;                        // full 3n
};

// Column-per-instant time histories of one integration run.
struct DeployRecord {
  Eigen::VectorXd times;            // strictly increasing, spacing dt
  Eigen::MatrixXd coords;           // 3n x T
  Eigen::MatrixXd velocities;       // 3n x T (fixed coordinates stay zero)
  Eigen::MatrixXd force_c;          // n_clusters x T
  Eigen::MatrixXd rest_lengths_c;   // n_clusters x T

  int steps() const { return static_cast<int>(times.size()); }
};

MassMatrices assemble_mass(const Structure& s);
MassMatrices assemble_mass(const Structure& s, const ElementState& state);

// Calibrate Rayleigh coefficients from the first two nonzero natural
// frequencies at the current state (one-frequency fallback a0 = zeta*w,
// a1 = zeta/w).  Throws InsufficientModes when no positive frequency exists.
// zeta == 0 returns zero matrices without touching the eigensolver.
DampingMatrices assemble_damping(const Structure& s, double zeta);

// Half-weight nodal gravity loads for the current element masses (positive
// magnitudes, z rows only).
Eigen::VectorXd assemble_gravity(const Structure& s);

// Implicit Newmark time integration (average acceleration, gamma = 1/2,
// beta = 1/4) with full Newton iteration on the dynamic residual.  Rest
// lengths, member forces, masses, and stiffness are refreshed from the
// current iterate every iteration; damping stays at its initial calibration.
// The initial state must satisfy static equilibrium under the t = 0 rest
// lengths to within 10x newton_tol.
DeployRecord integrate(const Structure& s, const DynamicsConfig& cfg,
                       const IntegrateOptions& opt = {});

// Energy bookkeeping for conservation checks.
double elastic_energy(const Structure& s);                              // J
double kinetic_energy(const Structure& s, const Eigen::VectorXd& vel);  // J

}  // namespace cts
