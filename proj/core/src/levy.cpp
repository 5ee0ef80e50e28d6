#include "cts/levy.hpp"

#include <cmath>
#include <string>

namespace cts::levy {

namespace {

const std::array<std::string, kNodeGroupCount> kNodeNames = {"PN", "OTN", "OBN", "ITN", "IBN"};
const std::array<std::string, kElementGroupCount> kElementNames = {
    "OB", "IB", "ORS", "ODS", "IRS", "IDS", "OHS", "IHS", "THS"};

Eigen::Vector3d on_ring(double radius, double angle, double z) {
  return {radius * std::cos(angle), radius * std::sin(angle), z};
}

}  // namespace

const std::string& to_string(NodeGroup g) { return kNodeNames[static_cast<int>(g)]; }
const std::string& to_string(ElementGroup g) { return kElementNames[static_cast<int>(g)]; }
bool is_bar_group(ElementGroup g) { return g == ElementGroup::OB || g == ElementGroup::IB; }

void validate(const LevyParams& params) {
  if (!(params.radius > 0.0)) throw InvalidInput("radius must be positive");
  if (!(params.deploy_ratio > 0.0 && params.deploy_ratio < 1.0))
    throw InvalidInput("deploy_ratio must lie in (0, 1)");
  if (params.complexity < 3) throw InvalidInput("complexity must be at least 3");
  if (params.clusters_per_group < 1)
    throw InvalidInput("clusters_per_group must be at least 1");
  if (params.complexity % params.clusters_per_group != 0)
    throw IndivisibleClustering(
        "clusters_per_group " + std::to_string(params.clusters_per_group) +
        " does not divide complexity " + std::to_string(params.complexity));
  if (params.z1 == params.z2) throw InvalidInput("z1 and z2 must differ (outer bars)");
  if (params.z3 == params.z4) throw InvalidInput("z3 and z4 must differ (inner bars)");
}

NodeSet generate_nodes(const LevyParams& params) {
  validate(params);
  const int p = params.complexity;
  const double beta = M_PI / p;
  const double r_outer = 0.5 * (params.deploy_ratio + 1.0) * params.radius;
  const double r_inner = params.deploy_ratio * params.radius;

  NodeSet nodes;
  nodes.coords.resize(3 * 5 * p);
  for (int i = 0; i < p; ++i) {
    const double theta = 2.0 * beta * i;
    nodes.set_position(0 * p + i, on_ring(params.radius, theta, 0.0));
    nodes.set_position(1 * p + i, on_ring(r_outer, theta + beta, params.z1));
    nodes.set_position(2 * p + i, on_ring(r_outer, theta + beta, params.z2));
    nodes.set_position(3 * p + i, on_ring(r_inner, theta, params.z3));
    nodes.set_position(4 * p + i, on_ring(r_inner, theta, params.z4));
  }
  for (int i = 0; i < p; ++i) nodes.fixed_idx.push_back(i);  // pins
  for (int i = p; i < 5 * p; ++i) nodes.free_idx.push_back(i);
  return nodes;
}

Topology generate_topology(const LevyParams& params) {
  validate(params);
  const int p = params.complexity;

  Topology t;
  t.topo.p = p;
  for (int g = 0; g < kNodeGroupCount; ++g) {
    t.topo.node_groups[g].resize(p);
    for (int i = 0; i < p; ++i) t.topo.node_groups[g][i] = g * p + i;
  }
  const auto node = [&](NodeGroup g, int unit) {
    return t.topo.node(g, ((unit % p) + p) % p);
  };
  const auto add = [&](ElementGroup g, int from, int to) {
    t.topo.element_groups[static_cast<int>(g)].push_back(t.conn.count());
    t.conn.rows.push_back({from, to});
  };

  // Bars: one per unit inside each strut pair.
  for (int i = 0; i < p; ++i) add(ElementGroup::OB, node(NodeGroup::OTN, i), node(NodeGroup::OBN, i));
  for (int i = 0; i < p; ++i) add(ElementGroup::IB, node(NodeGroup::ITN, i), node(NodeGroup::IBN, i));
  t.conn.n_bars = t.conn.count();

  // Zig-zag loops, stored walking around the ring so arcs are contiguous.
  for (int i = 0; i < p; ++i) {
    add(ElementGroup::ORS, node(NodeGroup::PN, i), node(NodeGroup::OTN, i));
    add(ElementGroup::ORS, node(NodeGroup::OTN, i), node(NodeGroup::PN, i + 1));
  }
  for (int i = 0; i < p; ++i) {
    add(ElementGroup::ODS, node(NodeGroup::PN, i), node(NodeGroup::OBN, i));
    add(ElementGroup::ODS, node(NodeGroup::OBN, i), node(NodeGroup::PN, i + 1));
  }
  for (int i = 0; i < p; ++i) {
    add(ElementGroup::IRS, node(NodeGroup::ITN, i), node(NodeGroup::OTN, i));
    add(ElementGroup::IRS, node(NodeGroup::OTN, i), node(NodeGroup::ITN, i + 1));
  }
  for (int i = 0; i < p; ++i) {
    add(ElementGroup::IDS, node(NodeGroup::IBN, i), node(NodeGroup::OTN, i));
    add(ElementGroup::IDS, node(NodeGroup::OTN, i), node(NodeGroup::IBN, i + 1));
  }

  // Hoops.
  for (int i = 0; i < p; ++i)
    add(ElementGroup::OHS, node(NodeGroup::OBN, i), node(NodeGroup::OBN, i + 1));
  for (int i = 0; i < p; ++i)
    add(ElementGroup::IHS, node(NodeGroup::IBN, i), node(NodeGroup::IBN, i + 1));
  for (int i = 0; i < p; ++i)
    add(ElementGroup::THS, node(NodeGroup::ITN, i), node(NodeGroup::ITN, i + 1));

  return t;
}

ClusterMap generate_clustering(const DomeTopology& topo, int clusters_per_group) {
  if (clusters_per_group < 1)
    throw IndivisibleClustering("clusters_per_group must be at least 1");

  ClusterMap map;
  map.n_classic = 0;
  for (const auto& group : topo.element_groups)
    map.n_classic += static_cast<int>(group.size());

  for (ElementGroup g : {ElementGroup::OB, ElementGroup::IB})
    for (int e : topo.element_groups[static_cast<int>(g)]) map.groups.push_back({e});

  for (int gi = 0; gi < kElementGroupCount; ++gi) {
    if (is_bar_group(static_cast<ElementGroup>(gi))) continue;
    const auto& loop = topo.element_groups[gi];
    const int size = static_cast<int>(loop.size());
    if (size % clusters_per_group != 0)
      throw IndivisibleClustering(
          "string loop " + kElementNames[gi] + " of " + std::to_string(size) +
          " members cannot be split into " + std::to_string(clusters_per_group) +
          " equal arcs (complexity " + std::to_string(topo.p) + ")");
    const int arc = size / clusters_per_group;
    for (int a = 0; a < clusters_per_group; ++a)
      map.groups.emplace_back(loop.begin() + a * arc, loop.begin() + (a + 1) * arc);
  }
  return map;
}

std::vector<ElementGroup> label_clusters(const DomeTopology& topo, const ClusterMap& cluster) {
  std::vector<ElementGroup> element_label(cluster.n_classic, ElementGroup::OB);
  for (int gi = 0; gi < kElementGroupCount; ++gi)
    for (int e : topo.element_groups[gi]) element_label[e] = static_cast<ElementGroup>(gi);

  std::vector<ElementGroup> labels(cluster.count());
  for (int g = 0; g < cluster.count(); ++g)
    labels[g] = element_label[cluster.groups[g].front()];
  return labels;
}

namespace {

MaterialTable unit_material(const Connectivity& conn, const ClusterMap& cluster) {
  MaterialTable mat;
  const int n = cluster.count();
  mat.area = Eigen::VectorXd::Ones(n);
  mat.modulus = Eigen::VectorXd::Ones(n);
  mat.tangent_modulus = Eigen::VectorXd::Ones(n);
  mat.density = Eigen::VectorXd::Ones(n);
  mat.capacity = Eigen::VectorXd::Ones(n);
  mat.kind.resize(n);
  for (int g = 0; g < n; ++g) mat.kind[g] = conn.kind(cluster.groups[g].front());
  return mat;
}

Structure assemble_geometry(const LevyParams& params) {
  Structure s;
  s.nodes = generate_nodes(params);
  Topology t = generate_topology(params);
  s.conn = std::move(t.conn);
  s.cluster = generate_clustering(t.topo, params.clusters_per_group);
  s.mat = unit_material(s.conn, s.cluster);
  s.rest_lengths_c =
      cluster_sums(s.cluster, element_lengths(member_matrix(s.nodes, s.conn)));
  return s;
}

// Force-density mode that is constant within every element family, read off
// the fully clustered arrangement (one cluster per loop), where the
// self-stress is unique.
Eigen::VectorXd family_constant_mode(const LevyParams& params, const DomeTopology& topo,
                                     const ClusterMap& cluster,
                                     const std::vector<ElementGroup>& labels) {
  LevyParams whole = params;
  whole.clusters_per_group = 1;
  Structure base = assemble_geometry(whole);
  const SelfStressModes base_modes =
      prestress_modes(equilibrium_matrices(base).density_form);
  if (base_modes.n_p != 1)
    throw MultipleModes("fully clustered arrangement has " +
                        std::to_string(base_modes.n_p) +
                        " self-stress modes; cannot pick the symmetric one");

  // Per-family force density in the base arrangement: bars are the same
  // element ids; each string family is one cluster, in family order.
  const ClusterMap base_cluster = generate_clustering(topo, 1);
  const std::vector<ElementGroup> base_labels = label_clusters(topo, base_cluster);
  std::array<double, kElementGroupCount> family_density{};
  for (int g = 0; g < base_cluster.count(); ++g)
    family_density[static_cast<int>(base_labels[g])] = base_modes.basis(g, 0);

  Eigen::VectorXd mode(cluster.count());
  for (int g = 0; g < cluster.count(); ++g) {
    if (is_bar_group(labels[g])) {
      // Bars are singletons in both arrangements with matching element ids.
      mode(g) = base_modes.basis(cluster.groups[g].front(), 0);
    } else {
      mode(g) = family_density[static_cast<int>(labels[g])];
    }
  }
  return mode;
}

}  // namespace

Structure geometry_structure(const LevyParams& params) { return assemble_geometry(params); }

MaterialTable size_members(const Structure& geometry, const Eigen::VectorXd& force_c,
                           const CapacityTable& caps) {
  const Eigen::VectorXd lengths_c =
      cluster_sums(geometry.cluster, element_lengths(member_matrix(geometry.nodes, geometry.conn)));

  MaterialTable mat;
  const int n = geometry.n_clusters();
  mat.area.resize(n);
  mat.modulus.resize(n);
  mat.tangent_modulus.resize(n);
  mat.density.resize(n);
  mat.capacity.resize(n);
  mat.kind.resize(n);
  for (int g = 0; g < n; ++g) {
    const ElementKind kind = geometry.conn.kind(geometry.cluster.groups[g].front());
    const CapacityTable::Grade& grade =
        kind == ElementKind::Bar ? caps.bar : caps.string;
    const double t = std::abs(force_c(g));

    double area = t / (0.1 * grade.capacity);  // working stress at 10% of capacity
    if (kind == ElementKind::Bar) {
      // Solid circular section, buckling load held at ten times the force:
      // pi^2 E I / l^2 = 10 t with I = A^2 / 4pi.
      const double euler =
          lengths_c(g) * std::sqrt(40.0 * t / (M_PI * grade.modulus));
      area = std::max(area, euler);
    }
    area = std::max(area, caps.min_gauge_area);

    mat.area(g) = area;
    mat.modulus(g) = grade.modulus;
    mat.tangent_modulus(g) = grade.modulus;
    mat.density(g) = grade.density;
    mat.capacity(g) = grade.capacity;
    mat.kind[g] = kind;
  }
  return mat;
}

PrestressAnchor ib_anchor(const DomeTopology& topo, double force) {
  // Bars are clustered singleton-first: OB occupy clusters [0, p), IB next.
  return {topo.p, force};
}

DesignedDome design_dome(const LevyParams& params, const CapacityTable& caps,
                         double anchor_force) {
  DesignedDome dome;
  Structure geometry = assemble_geometry(params);
  Topology t = generate_topology(params);
  dome.topo = std::move(t.topo);
  dome.cluster_group = label_clusters(dome.topo, geometry.cluster);

  const SelfStressModes modes =
      prestress_modes(equilibrium_matrices(geometry).density_form);
  const PrestressAnchor anchor = ib_anchor(dome.topo, anchor_force);

  const Eigen::VectorXd mode =
      modes.n_p == 1
          ? Eigen::VectorXd(modes.basis.col(0))
          : family_constant_mode(params, dome.topo, geometry.cluster, dome.cluster_group);
  PrestressState prestress = anchor_mode(geometry, mode, anchor);
  prestress.n_p = modes.n_p;
  prestress.mode_basis = modes.basis;

  geometry.mat = size_members(geometry, prestress.force_c, caps);
  // Rest lengths depend on the sections, so recover them after sizing.
  prestress.rest_lengths_c = rest_lengths_from_prestress(geometry, prestress.force_c);
  geometry.rest_lengths_c = prestress.rest_lengths_c;

  dome.structure = std::move(geometry);
  dome.prestress = prestress;
  cts::validate(dome.structure);
  return dome;
}

RetensionedDome retension(const DesignedDome& design, double deploy_ratio,
                          double anchor_force) {
  LevyParams params;
  params.complexity = design.topo.p;
  params.deploy_ratio = deploy_ratio;
  // Geometry regeneration needs the full parameter set; recover the fixed
  // heights and radius from the designed node rings.
  params.radius = design.structure.nodes.position(design.topo.node(NodeGroup::PN, 0)).head<2>().norm();
  params.z1 = design.structure.nodes.position(design.topo.node(NodeGroup::OTN, 0)).z();
  params.z2 = design.structure.nodes.position(design.topo.node(NodeGroup::OBN, 0)).z();
  params.z3 = design.structure.nodes.position(design.topo.node(NodeGroup::ITN, 0)).z();
  params.z4 = design.structure.nodes.position(design.topo.node(NodeGroup::IBN, 0)).z();
  params.clusters_per_group =
      (design.structure.n_clusters() - 2 * design.topo.p) / kStringGroupCount;

  RetensionedDome out;
  out.structure = design.structure;
  out.structure.nodes = generate_nodes(params);

  const SelfStressModes modes =
      prestress_modes(equilibrium_matrices(out.structure).density_form);
  const PrestressAnchor anchor = ib_anchor(design.topo, anchor_force);
  const Eigen::VectorXd mode =
      modes.n_p == 1 ? Eigen::VectorXd(modes.basis.col(0))
                     : family_constant_mode(params, design.topo,
                                            out.structure.cluster, design.cluster_group);
  out.prestress = anchor_mode(out.structure, mode, anchor);
  out.prestress.n_p = modes.n_p;
  out.prestress.mode_basis = modes.basis;
  out.prestress.rest_lengths_c =
      rest_lengths_from_prestress(out.structure, out.prestress.force_c);
  out.structure.rest_lengths_c = out.prestress.rest_lengths_c;
  return out;
}

}  // namespace cts::levy
