#include "cts/modal.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cts/dynamics.hpp"

namespace cts {

StiffnessBundle tangent_stiffness(const Structure& s) {
  const ElementState state = evaluate_elements(s);
  const int dim = 3 * s.n_nodes();

  StiffnessBundle b;
  b.K = Eigen::MatrixXd::Zero(dim, dim);
  for (int e = 0; e < s.n_elements(); ++e) {
    const auto& row = s.conn.rows[e];
    const double x = state.density(e);
    for (int k = 0; k < 3; ++k) {
      b.K(3 * row.from + k, 3 * row.from + k) += x;
      b.K(3 * row.to + k, 3 * row.to + k) += x;
      b.K(3 * row.from + k, 3 * row.to + k) -= x;
      b.K(3 * row.to + k, 3 * row.from + k) -= x;
    }
  }

  b.K_T = b.K;
  Eigen::VectorXd grad_sq(dim);   // gradient of sum of squared member lengths / 2
  Eigen::VectorXd grad_len(dim);  // gradient of total cable length
  for (int g = 0; g < s.n_clusters(); ++g) {
    const bool slack = s.mat.kind[g] == ElementKind::String &&
                       state.lengths_c(g) < s.rest_lengths_c(g);
    if (slack) continue;
    grad_sq.setZero();
    grad_len.setZero();
    for (int m : s.cluster.groups[g]) {
      const auto& row = s.conn.rows[m];
      const Eigen::Vector3d h = state.vectors.col(m);
      const Eigen::Vector3d u = h / state.lengths(m);
      grad_sq.segment<3>(3 * row.from) -= h;
      grad_sq.segment<3>(3 * row.to) += h;
      grad_len.segment<3>(3 * row.from) -= u;
      grad_len.segment<3>(3 * row.to) += u;
    }
    const double w = 0.5 * s.mat.tangent_modulus(g) * s.mat.area(g) /
                     (state.lengths_c(g) * state.lengths_c(g));
    b.K_T.noalias() += w * (grad_sq * grad_len.transpose());
    b.K_T.noalias() += w * (grad_len * grad_sq.transpose());
  }

  const std::vector<int> free = free_coord_indices(s.nodes);
  const int nf = static_cast<int>(free.size());
  b.K_T_free.resize(nf, nf);
  for (int j = 0; j < nf; ++j)
    for (int i = 0; i < nf; ++i) b.K_T_free(i, j) = b.K_T(free[i], free[j]);
  return b;
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw EigSolverFailure("symmetric eigensolver did not converge");
  return eig.eigenvalues()(0);
}

ModalResult natural_frequencies(const Eigen::MatrixXd& k_free, const Eigen::MatrixXd& m_free,
                                int k) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k_free, m_free);
  if (eig.info() != Eigen::Success)
    throw EigSolverFailure("generalized eigensolver did not converge");

  const int n = static_cast<int>(k_free.rows());
  const int count = std::min(k, n);
  ModalResult out;
  out.omega_sq = eig.eigenvalues().head(count);
  out.shapes = eig.eigenvectors().leftCols(count);
  out.frequencies_hz.resize(count);
  for (int i = 0; i < count; ++i) {
    const double w2 = out.omega_sq(i);
    out.frequencies_hz(i) = w2 > 0.0 ? std::sqrt(w2) / (2.0 * M_PI) : 0.0;
  }
  return out;
}

ModalResult natural_frequencies(const Structure& s, int k) {
  const StiffnessBundle b = tangent_stiffness(s);
  const MassMatrices m = assemble_mass(s);
  return natural_frequencies(b.K_T_free, m.free, k);
}

}  // namespace cts
