// Shared fixtures and independent oracle implementations for the test suite.
// Everything here is deliberately written from first principles (per-element
// truss mechanics, no cluster algebra) so library results are checked against
// a second, separately derived formulation.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cts/structure.hpp"

namespace cts::test {

inline MaterialTable uniform_materials(int n, double modulus, double area,
                                       double density,
                                       const std::vector<ElementKind>& kind) {
  MaterialTable mat;
  mat.area = Eigen::VectorXd::Constant(n, area);
  mat.modulus = Eigen::VectorXd::Constant(n, modulus);
  mat.tangent_modulus = mat.modulus;
  mat.density = Eigen::VectorXd::Constant(n, density);
  mat.capacity = Eigen::VectorXd::Constant(n, 1e8);
  mat.kind = kind;
  return mat;
}

// Node 0 at the origin (fixed), node 1 free at (length, 0, 0); one element
// with the given rest length.
inline Structure two_node(ElementKind kind, double length, double rest,
                          double modulus = 1e9, double area = 1e-4,
                          double density = 1000.0) {
  Structure s;
  s.nodes.coords.resize(6);
  s.nodes.set_position(0, {0.0, 0.0, 0.0});
  s.nodes.set_position(1, {length, 0.0, 0.0});
  s.nodes.fixed_idx = {0};
  s.nodes.free_idx = {1};
  s.conn.rows = {{0, 1}};
  s.conn.n_bars = kind == ElementKind::Bar ? 1 : 0;
  s.cluster = ClusterMap::identity(1);
  s.mat = uniform_materials(1, modulus, area, density, {kind});
  s.rest_lengths_c = Eigen::VectorXd::Constant(1, rest);
  return s;
}

// Three strings meeting at one free node at the origin; fixed anchors at
// (-1, 1, 0), (0, -1, 0), (1, 1, 0).  Force balance at the node gives the
// unique self-stress density ratio (1, 2, 1) in element order.
inline Structure y_structure() {
  Structure s;
  s.nodes.coords.resize(12);
  s.nodes.set_position(0, {0.0, 0.0, 0.0});
  s.nodes.set_position(1, {-1.0, 1.0, 0.0});
  s.nodes.set_position(2, {0.0, -1.0, 0.0});
  s.nodes.set_position(3, {1.0, 1.0, 0.0});
  s.nodes.free_idx = {0};
  s.nodes.fixed_idx = {1, 2, 3};
  s.conn.rows = {{0, 1}, {0, 2}, {0, 3}};
  s.conn.n_bars = 0;
  s.cluster = ClusterMap::identity(3);
  s.mat = uniform_materials(3, 1e9, 1e-4, 1000.0,
                            std::vector<ElementKind>(3, ElementKind::String));
  s.rest_lengths_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));
  return s;
}

// Classic 3-bar tensegrity prism.  Bottom triangle fixed at radius 1, z = 0;
// top triangle free at radius 1, z = 1, rotated by alpha.  Bars run
// B_k -> T_{k+1}, side strings B_k -> T_k, top strings T_k -> T_{k+1}.
// alpha = 30 degrees is the equilibrium twist for this wiring: the
// equilibrium matrix acquires a one-dimensional null space there (verified
// numerically; the mode is family-constant by symmetry).
inline Structure prism(double alpha = M_PI / 6.0) {
  Structure s;
  s.nodes.coords.resize(18);
  for (int k = 0; k < 3; ++k) {
    const double phi = 2.0 * M_PI * k / 3.0;
    s.nodes.set_position(k, {std::cos(phi), std::sin(phi), 0.0});
    s.nodes.set_position(3 + k,
                         {std::cos(phi + alpha), std::sin(phi + alpha), 1.0});
    s.nodes.fixed_idx.push_back(k);
    s.nodes.free_idx.push_back(3 + k);
  }
  for (int k = 0; k < 3; ++k) s.conn.rows.push_back({k, 3 + (k + 1) % 3});
  s.conn.n_bars = 3;
  for (int k = 0; k < 3; ++k) s.conn.rows.push_back({k, 3 + k});
  for (int k = 0; k < 3; ++k) s.conn.rows.push_back({3 + k, 3 + (k + 1) % 3});
  s.cluster = ClusterMap::identity(9);
  std::vector<ElementKind> kind(9, ElementKind::String);
  for (int k = 0; k < 3; ++k) kind[k] = ElementKind::Bar;
  s.mat = uniform_materials(9, 1e9, 1e-4, 1000.0, kind);
  s.rest_lengths_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));
  return s;
}

// Small structure with one 3-segment clustered cable (members 1-2-3 in chain
// order), a bar, and two singleton strings; geometry, sections, and rest
// lengths drawn from the seed.  Some seeds leave the cable slack.
inline Structure random_chain_structure(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 2.0);
  std::uniform_real_distribution<double> stretch(0.95, 1.05);

  Structure s;
  const int n = 6;
  s.nodes.coords.resize(3 * n);
  for (int i = 0; i < n; ++i)
    s.nodes.set_position(i, {pos(rng), pos(rng), pos(rng)});
  s.nodes.free_idx = {0, 1, 2, 3};
  s.nodes.fixed_idx = {4, 5};

  // bar first, then the cable chain in id order, then the singletons
  s.conn.rows = {{0, 4}, {0, 1}, {1, 2}, {2, 3}, {3, 5}, {1, 5}};
  s.conn.n_bars = 1;
  s.cluster.groups = {{0}, {1, 2, 3}, {4}, {5}};
  s.cluster.n_classic = 6;
  std::vector<ElementKind> kind(4, ElementKind::String);
  kind[0] = ElementKind::Bar;
  s.mat = uniform_materials(4, 1e8, 2e-4, 1500.0, kind);

  const Eigen::VectorXd l_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));
  s.rest_lengths_c.resize(4);
  for (int g = 0; g < 4; ++g) s.rest_lengths_c(g) = l_c(g) * stretch(rng);
  return s;
}

// --- classic (per-element truss) oracle ------------------------------------
// Valid only for identity clustering.  Forces, nodal forces, and the exact
// element tangent are assembled member by member with no shared code paths.

inline Eigen::VectorXd classic_element_forces(const Structure& s) {
  const Eigen::Matrix3Xd h = member_matrix(s.nodes, s.conn);
  Eigen::VectorXd t(s.n_elements());
  for (int e = 0; e < s.n_elements(); ++e) {
    const double l = h.col(e).norm();
    const double l0 = s.rest_lengths_c(e);
    t(e) = s.mat.modulus(e) * s.mat.area(e) * (l - l0) / l0;
    if (s.conn.kind(e) == ElementKind::String && t(e) < 0.0) t(e) = 0.0;
  }
  return t;
}

inline Eigen::VectorXd classic_internal_forces(const Structure& s) {
  const Eigen::Matrix3Xd h = member_matrix(s.nodes, s.conn);
  const Eigen::VectorXd t = classic_element_forces(s);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * s.n_nodes());
  for (int e = 0; e < s.n_elements(); ++e) {
    const double l = h.col(e).norm();
    const Eigen::Vector3d pull = (t(e) / l) * h.col(e);
    // the element pulls `from` toward `to` and vice versa
    f.segment<3>(3 * s.conn.rows[e].from) -= pull;
    f.segment<3>(3 * s.conn.rows[e].to) += pull;
  }
  return f;
}

inline Eigen::MatrixXd classic_tangent(const Structure& s) {
  const Eigen::Matrix3Xd h = member_matrix(s.nodes, s.conn);
  const Eigen::VectorXd t = classic_element_forces(s);
  const int n = s.n_nodes();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int e = 0; e < s.n_elements(); ++e) {
    const double l = h.col(e).norm();
    if (s.conn.kind(e) == ElementKind::String && l < s.rest_lengths_c(e))
      continue;  // slack strings contribute no stiffness
    const Eigen::Vector3d unit = h.col(e) / l;
    const double axial = s.mat.tangent_modulus(e) * s.mat.area(e) / l;
    const Eigen::Matrix3d block =
        (t(e) / l) * Eigen::Matrix3d::Identity() +
        (axial - t(e) / l) * (unit * unit.transpose());
    const int a = s.conn.rows[e].from, b = s.conn.rows[e].to;
    k.block<3, 3>(3 * a, 3 * a) += block;
    k.block<3, 3>(3 * b, 3 * b) += block;
    k.block<3, 3>(3 * a, 3 * b) -= block;
    k.block<3, 3>(3 * b, 3 * a) -= block;
  }
  return k;
}

inline Eigen::VectorXd classic_masses(const Structure& s) {
  const Eigen::Matrix3Xd h = member_matrix(s.nodes, s.conn);
  const Eigen::VectorXd t = classic_element_forces(s);
  Eigen::VectorXd m(s.n_elements());
  for (int e = 0; e < s.n_elements(); ++e) {
    const double ea = s.mat.modulus(e) * s.mat.area(e);
    const double rest = ea * h.col(e).norm() / (t(e) + ea);
    m(e) = s.mat.mass_scale * s.mat.density(e) * s.mat.area(e) * rest;
  }
  return m;
}

inline Eigen::MatrixXd classic_mass_matrix(const Structure& s) {
  const Eigen::VectorXd m = classic_masses(s);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(3 * s.n_nodes(), 3 * s.n_nodes());
  for (int e = 0; e < s.n_elements(); ++e) {
    const int a = s.conn.rows[e].from, b = s.conn.rows[e].to;
    for (int k = 0; k < 3; ++k) {
      full(3 * a + k, 3 * a + k) += m(e) / 3.0;
      full(3 * b + k, 3 * b + k) += m(e) / 3.0;
      full(3 * a + k, 3 * b + k) += m(e) / 6.0;
      full(3 * b + k, 3 * a + k) += m(e) / 6.0;
    }
  }
  return full;
}

inline Eigen::MatrixXd reduce(const Eigen::MatrixXd& full, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = full(idx[i], idx[j]);
  return out;
}

// Undamped average-acceleration Newmark over the free coordinates, assembled
// classically per element (identity clustering only).  Same scheme as the
// library integrator -- zero initial acceleration, Newton on the step
// increment -- so trajectories should agree to solver tolerance on structures
// where the clustered and classic models coincide.
inline Eigen::MatrixXd classic_integrate(Structure s, const Eigen::VectorXd& load_full,
                                         const Eigen::VectorXd& v0_full, double dt,
                                         int n_steps, double tol, int max_iter = 30) {
  const std::vector<int> free = free_coord_indices(s.nodes);
  const int nf = static_cast<int>(free.size());
  Eigen::VectorXd u = gather(s.nodes.coords, free);
  Eigen::VectorXd v = v0_full.size() > 0 ? gather(v0_full, free)
                                         : Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(nf);

  Eigen::MatrixXd history(3 * s.n_nodes(), n_steps + 1);
  history.col(0) = s.nodes.coords;

  const double inv_dt2 = 4.0 / (dt * dt);
  for (int step = 0; step < n_steps; ++step) {
    const Eigen::MatrixXd mass = reduce(classic_mass_matrix(s), free);
    Eigen::VectorXd du = dt * v + 0.5 * dt * dt * a;
    Eigen::VectorXd a_new(nf), residual(nf);
    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
      for (int i = 0; i < nf; ++i) s.nodes.coords(free[i]) = u(i) + du(i);
      a_new = inv_dt2 * (du - dt * v) - a;
      residual =
          mass * a_new + gather(classic_internal_forces(s) - load_full, free);
      if (residual.cwiseAbs().maxCoeff() < tol) {
        converged = true;
        break;
      }
      const Eigen::MatrixXd jac =
          inv_dt2 * mass + reduce(classic_tangent(s), free);
      du += jac.ldlt().solve(-residual).eval();
    }
    if (!converged) throw std::runtime_error("classic integrator stalled");
    u += du;
    const Eigen::VectorXd a_old = a;
    a = a_new;
    v += 0.5 * dt * (a_old + a);
    history.col(step + 1) = s.nodes.coords;
  }
  return history;
}

// Central finite differences of the free-coordinate static residual: column j
// is d(residual)/d(free coordinate j).
template <typename ResidualFn>
inline Eigen::MatrixXd fd_jacobian(Structure s, ResidualFn residual, double step) {
  const std::vector<int> free = free_coord_indices(s.nodes);
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd jac(nf, nf);
  for (int j = 0; j < nf; ++j) {
    const double saved = s.nodes.coords(free[j]);
    s.nodes.coords(free[j]) = saved + step;
    const Eigen::VectorXd plus = residual(s);
    s.nodes.coords(free[j]) = saved - step;
    const Eigen::VectorXd minus = residual(s);
    s.nodes.coords(free[j]) = saved;
    jac.col(j) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

}  // namespace cts::test
