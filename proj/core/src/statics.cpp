#include "cts/statics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace cts {

namespace {

// node index -> position in the free list, or -1 when fixed
std::vector<int> free_positions(const NodeSet& nodes) {
  std::vector<int> pos(nodes.count(), -1);
  for (size_t i = 0; i < nodes.free_idx.size(); ++i) pos[nodes.free_idx[i]] = static_cast<int>(i);
  return pos;
}

}  // namespace

EquilibriumMatrices equilibrium_matrices(const Structure& s) {
  const Eigen::Matrix3Xd vectors = member_matrix(s.nodes, s.conn);
  const Eigen::VectorXd lengths = element_lengths(vectors);
  const Eigen::VectorXd lengths_c = cluster_sums(s.cluster, lengths);
  const std::vector<int> pos = free_positions(s.nodes);

  EquilibriumMatrices eq;
  eq.density_form = Eigen::MatrixXd::Zero(s.n_free_coords(), s.n_clusters());
  for (int g = 0; g < s.n_clusters(); ++g) {
    for (int m : s.cluster.groups[g]) {
      const auto& row = s.conn.rows[m];
      if (pos[row.from] >= 0)
        eq.density_form.block<3, 1>(3 * pos[row.from], g) -= vectors.col(m);
      if (pos[row.to] >= 0)
        eq.density_form.block<3, 1>(3 * pos[row.to], g) += vectors.col(m);
    }
  }
  eq.force_form = eq.density_form * lengths_c.cwiseInverse().asDiagonal();
  return eq;
}

SelfStressModes prestress_modes(const Eigen::MatrixXd& density_form, double rel_tol) {
  const int n = static_cast<int>(density_form.cols());
  SelfStressModes modes;
  if (density_form.rows() == 0) {
    // No free coordinates: every force-density vector is self-equilibrated.
    modes.n_p = n;
    modes.basis = Eigen::MatrixXd::Identity(n, n);
    return modes;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(density_form, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  modes.n_p = n - rank;
  modes.basis = svd.matrixV().rightCols(modes.n_p);
  return modes;
}

PrestressState solve_prestress(const Structure& s, const SelfStressModes& modes,
                               const PrestressAnchor& anchor) {
  if (modes.n_p != 1)
    throw MultipleModes("prestress solve needs exactly one self-stress mode, found " +
                        std::to_string(modes.n_p));
  PrestressState state = anchor_mode(s, modes.basis.col(0), anchor);
  state.n_p = modes.n_p;
  state.mode_basis = modes.basis;
  state.rest_lengths_c = rest_lengths_from_prestress(s, state.force_c);
  return state;
}

PrestressState anchor_mode(const Structure& s, const Eigen::VectorXd& mode,
                           const PrestressAnchor& anchor) {
  const Eigen::VectorXd lengths_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));

  const double anchored = mode(anchor.cluster) * lengths_c(anchor.cluster);
  if (std::abs(anchored) < kLengthEpsilon * mode.cwiseAbs().maxCoeff())
    throw InfeasibleSign("anchor cluster " + std::to_string(anchor.cluster) +
                         " carries no force in the self-stress mode");

  PrestressState state;
  state.n_p = 1;
  state.mode_basis = mode.normalized();
  state.density_c = (anchor.force / anchored) * mode;
  state.force_c = state.density_c.cwiseProduct(lengths_c);

  const double tol = kForceRelTol * state.force_c.cwiseAbs().maxCoeff();
  for (int g = 0; g < s.n_clusters(); ++g) {
    const bool is_string = s.mat.kind[g] == ElementKind::String;
    if (is_string && state.force_c(g) < -tol)
      throw InfeasibleSign("string cluster " + std::to_string(g) +
                           " would carry compression " + std::to_string(state.force_c(g)));
    if (!is_string && state.force_c(g) > tol)
      throw InfeasibleSign("bar cluster " + std::to_string(g) + " would carry tension " +
                           std::to_string(state.force_c(g)));
  }
  return state;
}

Eigen::VectorXd rest_lengths_from_prestress(const Structure& s,
                                            const Eigen::VectorXd& force_c) {
  const Eigen::VectorXd lengths_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));
  Eigen::VectorXd rest(s.n_clusters());
  for (int g = 0; g < s.n_clusters(); ++g) {
    const double ea = s.mat.modulus(g) * s.mat.area(g);
    const double denom = force_c(g) + ea;
    if (!(denom > 0.0))
      throw NonphysicalForce("cluster " + std::to_string(g) + " force " +
                             std::to_string(force_c(g)) + " is at or below -E*A");
    rest(g) = ea * lengths_c(g) / denom;
  }
  return rest;
}

Eigen::VectorXd internal_nodal_forces(const Structure& s, const ElementState& state) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * s.n_nodes());
  for (int e = 0; e < s.n_elements(); ++e) {
    const auto& row = s.conn.rows[e];
    const Eigen::Vector3d pull = state.density(e) * state.vectors.col(e);
    f.segment<3>(3 * row.from) -= pull;
    f.segment<3>(3 * row.to) += pull;
  }
  return f;
}

Eigen::VectorXd static_residual(const Structure& s, const Eigen::VectorXd& external_load,
                                bool gravity_on) {
  const ElementState state = evaluate_elements(s);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(3 * s.n_nodes());
  if (external_load.size() > 0) {
    if (external_load.size() != 3 * s.n_nodes())
      throw InvalidInput("external load vector has wrong size");
    load = external_load;
  }
  if (gravity_on) load -= gravity_loads(s.conn, state.mass, s.n_nodes());

  const std::vector<int> free = free_coord_indices(s.nodes);
  return gather(internal_nodal_forces(s, state) - load, free);
}

Eigen::VectorXd gravity_loads(const Connectivity& conn, const Eigen::VectorXd& element_mass,
                              int n_nodes) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * n_nodes);
  for (int e = 0; e < conn.count(); ++e) {
    const double half_weight = 0.5 * kGravity * element_mass(e);
    g(3 * conn.rows[e].from + 2) += half_weight;
    g(3 * conn.rows[e].to + 2) += half_weight;
  }
  return g;
}

}  // namespace cts
