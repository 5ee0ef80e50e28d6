#pragma once

#include <Eigen/Dense>

#include "cts/structure.hpp"

namespace cts {

// Stiffness operators at the current state.  K is the force-density stiffness
// (graph Laplacian weighted by force densities, one 3x3 identity block per
// entry); K_T adds the material sensitivity of the member forces and is the
// Jacobian of the static residual.  K_T_free is K_T restricted to the free
// coordinates.
struct StiffnessBundle {
  Eigen::MatrixXd K;       // 3n x 3n
  Eigen::MatrixXd K_T;     // 3n x 3n
  Eigen::MatrixXd K_T_free;
};

// Small-vibration modes about the current state.
struct ModalResult {
  Eigen::VectorXd frequencies_hz;  // ascending; 0 for mechanisms (omega^2 <= 0)
  Eigen::VectorXd omega_sq;        // raw generalized eigenvalues, ascending
  Eigen::MatrixXd shapes;          // free coordinates x mode count
};

// Assemble K and K_T.  The material term treats each clustered element as one
// series cable: its stiffness E_t*A/l_c^2 acts through the gradient of the
// total cable length, so the result is the exact residual Jacobian
// (symmetrized) and reduces to the classic per-member truss tangent for
// singleton clusters.  Slack strings contribute neither term.
StiffnessBundle tangent_stiffness(const Structure& s);

// Smallest eigenvalue of a symmetric matrix (dense solve).
double min_eigenvalue(const Eigen::MatrixXd& sym);

// Stability verdict for a tangent stiffness restricted to free coordinates.
inline bool is_stable(double lambda_min) { return lambda_min > kStabilityTol; }

// First k natural frequencies and mode shapes from the generalized symmetric
// eigenproblem K_T_free * phi = omega^2 * M_free * phi.  M_free must be
// positive definite.  Negative omega^2 (prestress-destabilized mechanisms)
// report frequency zero.
ModalResult natural_frequencies(const Structure& s, int k = kDefaultModeCount);

// Same, with the reduced operators already in hand.
ModalResult natural_frequencies(const Eigen::MatrixXd& k_free,
                                const Eigen::MatrixXd& m_free, int k);

}  // namespace cts
