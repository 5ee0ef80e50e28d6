#include "cts/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cts {

ClusterMap ClusterMap::identity(int n_elements) {
  ClusterMap map;
  map.n_classic = n_elements;
  map.groups.resize(n_elements);
  for (int i = 0; i < n_elements; ++i) map.groups[i] = {i};
  return map;
}

std::vector<int> ClusterMap::owner() const {
  std::vector<int> owner(n_classic, -1);
  for (int g = 0; g < count(); ++g)
    for (int m : groups[g]) owner[m] = g;
  return owner;
}

Eigen::Matrix3Xd member_matrix(const NodeSet& nodes, const Connectivity& conn) {
  Eigen::Matrix3Xd vectors(3, conn.count());
  for (int e = 0; e < conn.count(); ++e) {
    const auto& row = conn.rows[e];
    vectors.col(e) = nodes.position(row.to) - nodes.position(row.from);
  }
  return vectors;
}

Eigen::VectorXd element_lengths(const Eigen::Matrix3Xd& vectors) {
  Eigen::VectorXd lengths = vectors.colwise().norm();
  for (int e = 0; e < lengths.size(); ++e) {
    if (!(lengths(e) > kLengthEpsilon))
      throw DegenerateElement("element " + std::to_string(e) + " has length " +
                              std::to_string(lengths(e)));
  }
  return lengths;
}

Eigen::VectorXd cluster_sums(const ClusterMap& cluster, const Eigen::VectorXd& per_element) {
  Eigen::VectorXd sums(cluster.count());
  for (int g = 0; g < cluster.count(); ++g) {
    double acc = 0.0;
    for (int m : cluster.groups[g]) acc += per_element(m);
    sums(g) = acc;
  }
  return sums;
}

Eigen::VectorXd expand_to_elements(const ClusterMap& cluster, const Eigen::VectorXd& per_cluster) {
  Eigen::VectorXd out(cluster.n_classic);
  for (int g = 0; g < cluster.count(); ++g)
    for (int m : cluster.groups[g]) out(m) = per_cluster(g);
  return out;
}

ElementState evaluate_elements(const Structure& s) {
  ElementState st;
  st.vectors = member_matrix(s.nodes, s.conn);
  st.lengths = element_lengths(st.vectors);
  st.lengths_c = cluster_sums(s.cluster, st.lengths);

  const int n_c = s.n_clusters();
  st.force_c.resize(n_c);
  for (int g = 0; g < n_c; ++g) {
    const double l0 = s.rest_lengths_c(g);
    double t = s.mat.modulus(g) * s.mat.area(g) * (st.lengths_c(g) - l0) / l0;
    if (s.mat.kind[g] == ElementKind::String && t < 0.0) t = 0.0;  // slack
    st.force_c(g) = t;
  }
  st.density_c = st.force_c.cwiseQuotient(st.lengths_c);
  st.force = expand_to_elements(s.cluster, st.force_c);
  st.density = expand_to_elements(s.cluster, st.density_c);

  // Per-element mass from the effective segment rest length E*A*l/(t + E*A).
  st.mass.resize(s.n_elements());
  const std::vector<int> owner = s.cluster.owner();
  for (int e = 0; e < s.n_elements(); ++e) {
    const int g = owner[e];
    const double ea = s.mat.modulus(g) * s.mat.area(g);
    const double denom = st.force(e) + ea;
    if (!(denom > 0.0))
      throw NonphysicalForce("element " + std::to_string(e) + " force " +
                             std::to_string(st.force(e)) +
                             " exceeds the axial-stiffness limit -E*A");
    const double rest = ea * st.lengths(e) / denom;
    st.mass(e) = s.mat.mass_scale * s.mat.density(g) * s.mat.area(g) * rest;
  }
  return st;
}

Eigen::VectorXd member_forces(const Structure& s) { return evaluate_elements(s).force_c; }

Eigen::VectorXd force_densities(const Structure& s) { return evaluate_elements(s).density_c; }

Eigen::VectorXd mass_vector(const Structure& s) { return evaluate_elements(s).mass; }

std::vector<int> free_coord_indices(const NodeSet& nodes) {
  std::vector<int> idx;
  idx.reserve(3 * nodes.free_idx.size());
  for (int node : nodes.free_idx)
    for (int k = 0; k < 3; ++k) idx.push_back(3 * node + k);
  return idx;
}

std::vector<int> fixed_coord_indices(const NodeSet& nodes) {
  std::vector<int> idx;
  idx.reserve(3 * nodes.fixed_idx.size());
  for (int node : nodes.fixed_idx)
    for (int k = 0; k < 3; ++k) idx.push_back(3 * node + k);
  return idx;
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = full(idx[i]);
  return out;
}

void scatter_add(Eigen::VectorXd& full, const std::vector<int>& idx,
                 const Eigen::VectorXd& values) {
  for (size_t i = 0; i < idx.size(); ++i) full(idx[i]) += values(i);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace

void validate(const Structure& s) {
  const int n_n = s.n_nodes();
  require(s.nodes.coords.size() % 3 == 0, "nodes.coords size must be a multiple of 3");
  require(s.nodes.coords.allFinite(), "nodes.coords must be finite");

  // free/fixed must partition the node set; each list strictly increasing.
  std::vector<char> seen(n_n, 0);
  for (const auto* list : {&s.nodes.free_idx, &s.nodes.fixed_idx}) {
    int prev = -1;
    for (int node : *list) {
      require(node >= 0 && node < n_n, "node index out of range in free/fixed split");
      require(node > prev, "free/fixed lists must be strictly increasing");
      require(!seen[node], "node listed as both free and fixed");
      seen[node] = 1;
      prev = node;
    }
  }
  require(std::all_of(seen.begin(), seen.end(), [](char c) { return c == 1; }),
          "free/fixed lists must cover every node");

  require(s.conn.n_bars >= 0 && s.conn.n_bars <= s.conn.count(),
          "conn.n_bars out of range");
  for (int e = 0; e < s.conn.count(); ++e) {
    const auto& row = s.conn.rows[e];
    require(row.from >= 0 && row.from < n_n && row.to >= 0 && row.to < n_n,
            "element " + std::to_string(e) + " references a missing node");
    require(row.from != row.to, "element " + std::to_string(e) + " is a self-loop");
  }

  // Clusters partition the element set; multi-member groups are string chains.
  require(s.cluster.n_classic == s.conn.count(), "cluster.n_classic mismatch");
  std::vector<char> used(s.conn.count(), 0);
  for (int g = 0; g < s.cluster.count(); ++g) {
    const auto& group = s.cluster.groups[g];
    require(!group.empty(), "cluster group " + std::to_string(g) + " is empty");
    for (size_t j = 0; j < group.size(); ++j) {
      const int m = group[j];
      require(m >= 0 && m < s.conn.count(), "cluster member out of range");
      require(!used[m], "element " + std::to_string(m) + " appears in two clusters");
      used[m] = 1;
      if (group.size() > 1) {
        require(s.conn.kind(m) == ElementKind::String,
                "cluster group " + std::to_string(g) + " clusters a bar");
        if (j > 0) {
          const auto& a = s.conn.rows[group[j - 1]];
          const auto& b = s.conn.rows[m];
          const bool adjacent = a.from == b.from || a.from == b.to ||
                                a.to == b.from || a.to == b.to;
          require(adjacent, "cluster group " + std::to_string(g) +
                                " members are not a connected chain");
        }
      }
    }
  }
  require(std::all_of(used.begin(), used.end(), [](char c) { return c == 1; }),
          "clusters must cover every element");

  const int n_c = s.n_clusters();
  require(s.mat.count() == n_c, "material table size mismatch");
  require(static_cast<int>(s.mat.kind.size()) == n_c, "material kind size mismatch");
  require(s.mat.tangent_modulus.size() == n_c && s.mat.density.size() == n_c &&
              s.mat.modulus.size() == n_c && s.mat.capacity.size() == n_c,
          "material column size mismatch");
  require(s.mat.mass_scale > 0.0, "mass_scale must be positive");
  for (int g = 0; g < n_c; ++g) {
    require(s.mat.area(g) > 0.0, "area must be positive (cluster " + std::to_string(g) + ")");
    require(s.mat.modulus(g) > 0.0, "modulus must be positive");
    require(s.mat.tangent_modulus(g) > 0.0, "tangent modulus must be positive");
    require(s.mat.density(g) > 0.0, "density must be positive");
    require(s.mat.capacity(g) > 0.0, "capacity must be positive");
    require(s.mat.kind[g] == s.conn.kind(s.cluster.groups[g].front()),
            "material kind disagrees with element kind (cluster " + std::to_string(g) + ")");
  }

  require(s.rest_lengths_c.size() == n_c, "rest_lengths_c size mismatch");
  for (int g = 0; g < n_c; ++g)
    require(s.rest_lengths_c(g) > 0.0,
            "rest length must be positive (cluster " + std::to_string(g) + ")");
}

}  // namespace cts
