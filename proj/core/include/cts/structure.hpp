#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cts/constants.hpp"
#include "cts/errors.hpp"

namespace cts {

// Nodal coordinates plus the free/fixed split.  Coordinates are stored as one
// stacked vector (x,y,z per node); the split lists node indices, not
// coordinate indices.
struct NodeSet {
  Eigen::VectorXd coords;      // 3*n stacked
  std::vector<int> free_idx;   // ordered, disjoint from fixed_idx
  std::vector<int> fixed_idx;  // ordered

  int count() const { return static_cast<int>(coords.size()) / 3; }
  Eigen::Vector3d position(int node) const { return coords.segment<3>(3 * node); }
  void set_position(int node, const Eigen::Vector3d& p) { coords.segment<3>(3 * node) = p; }
};

enum class ElementKind { Bar, String };

// Element incidence.  Bars occupy rows [0, n_bars); strings follow.  Each row
// is a directed pair: the element vector runs from `from` to `to`.
struct Connectivity {
  struct Row {
    int from = 0;
    int to = 0;
  };
  std::vector<Row> rows;
  int n_bars = 0;

  int count() const { return static_cast<int>(rows.size()); }
  int n_strings() const { return count() - n_bars; }
  ElementKind kind(int element) const {
    return element < n_bars ? ElementKind::Bar : ElementKind::String;
  }
};

// Grouping of classic elements into clustered elements.  Singleton groups are
// ordinary members; a multi-member group is one continuous cable running over
// frictionless pulleys at the interior nodes.  Groups partition the classic
// element set; members are kept in chain order.
struct ClusterMap {
  std::vector<std::vector<int>> groups;
  int n_classic = 0;

  int count() const { return static_cast<int>(groups.size()); }

  static ClusterMap identity(int n_elements);

  // classic element id -> owning group id
  std::vector<int> owner() const;
};

// Per-clustered-element section and material data.  A multi-member cable has
// one cross-section shared by all of its segments.
struct MaterialTable {
  Eigen::VectorXd area;             // m^2
  Eigen::VectorXd modulus;          // Pa
  Eigen::VectorXd tangent_modulus;  // Pa (== modulus for linear elasticity)
  Eigen::VectorXd density;          // kg/m^3
  Eigen::VectorXd capacity;         // Pa, yield/ultimate stress
  std::vector<ElementKind> kind;    // matches the cluster's member kinds
  double mass_scale = 1.0;          // multiplies densities in mass assembly

  int count() const { return static_cast<int>(area.size()); }
};

// A complete analyzable structure: geometry, incidence, clustering, sections,
// and the rest (unstressed) length of every clustered element.
struct Structure {
  NodeSet nodes;
  Connectivity conn;
  ClusterMap cluster;
  MaterialTable mat;
  Eigen::VectorXd rest_lengths_c;  // per clustered element, m

  int n_nodes() const { return nodes.count(); }
  int n_elements() const { return conn.count(); }
  int n_clusters() const { return cluster.count(); }
  int n_free_coords() const { return 3 * static_cast<int>(nodes.free_idx.size()); }
};

// Everything derived from the current geometry in one pass: element vectors,
// lengths, forces, force densities, and the per-element mass vector.
//
// Member forces follow the uniform-force-density cable model: every segment of
// a clustered element carries the cluster's force density x_c = t_c / l_c,
// where l_c is the total cable length.  Slack strings (l_c < rest length)
// carry zero force; bars may go compressive without limit.
//
// Masses are recovered from the current state: each segment's effective rest
// length is E*A*l / (t + E*A), so segment masses follow the cable as it slides
// over pulleys while the cluster total stays rho*A*l_0c.
struct ElementState {
  Eigen::Matrix3Xd vectors;   // per classic element, to - from
  Eigen::VectorXd lengths;    // classic, m
  Eigen::VectorXd lengths_c;  // clustered, m
  Eigen::VectorXd force_c;    // clustered, N
  Eigen::VectorXd force;      // classic expansion of force_c, N
  Eigen::VectorXd density_c;  // clustered force densities, N/m
  Eigen::VectorXd density;    // classic expansion, N/m
  Eigen::VectorXd mass;       // classic element masses (mass_scale applied), kg
};

// --- core operations -------------------------------------------------------

// Columns are the element vectors (to - from) of every classic element.
Eigen::Matrix3Xd member_matrix(const NodeSet& nodes, const Connectivity& conn);

// Euclidean norms of the member-matrix columns.  Throws DegenerateElement if
// any length falls below kLengthEpsilon.
Eigen::VectorXd element_lengths(const Eigen::Matrix3Xd& vectors);

// Sum classic per-element values over each cluster (chain order).
Eigen::VectorXd cluster_sums(const ClusterMap& cluster, const Eigen::VectorXd& per_element);

// Copy one value per cluster onto all of its members.
Eigen::VectorXd expand_to_elements(const ClusterMap& cluster, const Eigen::VectorXd& per_cluster);

// Full derived state at the structure's current coordinates.
ElementState evaluate_elements(const Structure& s);

// Spec'd slices of evaluate_elements for callers that need just one quantity.
Eigen::VectorXd member_forces(const Structure& s);    // force_c
Eigen::VectorXd force_densities(const Structure& s);  // density_c
Eigen::VectorXd mass_vector(const Structure& s);      // classic element masses

// Stacked coordinate indices (3 per node) for the free and fixed node lists.
std::vector<int> free_coord_indices(const NodeSet& nodes);
std::vector<int> fixed_coord_indices(const NodeSet& nodes);

// Gather rows of a stacked vector at the given coordinate indices.
Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx);
// Add values into a stacked vector at the given coordinate indices.
void scatter_add(Eigen::VectorXd& full, const std::vector<int>& idx, const Eigen::VectorXd& values);

// Verify every structural invariant (index ranges, partition of nodes,
// cluster partition and chain contiguity, positive sections and rest lengths).
// Throws InvalidInput (or a more specific error) naming the violated field.
void validate(const Structure& s);

}  // namespace cts
