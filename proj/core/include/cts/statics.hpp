#pragma once

#include <Eigen/Dense>

#include "cts/structure.hpp"

namespace cts {

// Equilibrium matrices restricted to the free coordinates.  density_form acts
// on clustered force densities, force_form on clustered forces; they satisfy
// force_form = density_form * diag(1/l_c) exactly.
struct EquilibriumMatrices {
  Eigen::MatrixXd density_form;  // (3*n_free) x n_clusters
  Eigen::MatrixXd force_form;    // (3*n_free) x n_clusters
};

// Orthonormal basis of the self-stress space (right null space of the
// density-form equilibrium matrix).
struct SelfStressModes {
  int n_p = 0;
  Eigen::MatrixXd basis;  // n_clusters x n_p, orthonormal columns
};

// A fully determined prestress: force densities, forces, and the rest lengths
// that reproduce them through the constitutive law.
struct PrestressState {
  Eigen::VectorXd density_c;       // N/m
  Eigen::VectorXd force_c;         // N
  Eigen::VectorXd rest_lengths_c;  // m
  int n_p = 0;
  Eigen::MatrixXd mode_basis;
};

// Pins the prestress scale: the named cluster must carry exactly this force.
struct PrestressAnchor {
  int cluster = 0;
  double force = 0.0;  // N, negative = compression
};

EquilibriumMatrices equilibrium_matrices(const Structure& s);

// Null-space extraction via SVD; singular values below rel_tol times the
// largest count as zero.
SelfStressModes prestress_modes(const Eigen::MatrixXd& density_form,
                                double rel_tol = kSvdRelTol);

// Scale the unique self-stress mode so the anchor cluster carries the given
// force, then verify unilateral signs (strings tensile, bars compressive) and
// back out rest lengths.  Throws MultipleModes unless n_p == 1, InfeasibleSign
// on a sign violation or a mode with no force in the anchor cluster.
PrestressState solve_prestress(const Structure& s, const SelfStressModes& modes,
                               const PrestressAnchor& anchor);

// Anchor a caller-supplied force-density mode: scaling and sign checks as in
// solve_prestress, but no uniqueness check and no rest-length recovery, so it
// works on geometry whose sections have not been sized yet (rest_lengths_c is
// left empty).
PrestressState anchor_mode(const Structure& s, const Eigen::VectorXd& mode,
                           const PrestressAnchor& anchor);

// Rest lengths that make the constitutive law return force_c at the current
// geometry: l_0c = E*A*l_c / (t_c + E*A).
Eigen::VectorXd rest_lengths_from_prestress(const Structure& s,
                                            const Eigen::VectorXd& force_c);

// Internal nodal force vector (full 3n): each segment pulls its end nodes
// along itself with the cluster force density.
Eigen::VectorXd internal_nodal_forces(const Structure& s, const ElementState& state);

// Free-coordinate equilibrium residual: internal forces minus applied loads
// (external_load may be empty; gravity adds the half-weight nodal loads).
Eigen::VectorXd static_residual(const Structure& s,
                                const Eigen::VectorXd& external_load = {},
                                bool gravity_on = false);

// Half of each element's weight applied at both end nodes, z only.  Returned
// as positive magnitudes; subtract from applied loads to pull downward.
Eigen::VectorXd gravity_loads(const Connectivity& conn,
                              const Eigen::VectorXd& element_mass, int n_nodes);

}  // namespace cts
