#pragma once

#include <array>
#include <string>
#include <vector>

#include "cts/statics.hpp"
#include "cts/structure.hpp"

namespace cts::levy {

// Parametric family of deployable cable domes with p-fold symmetry.  The plan
// radius of the inner rings is deploy_ratio * radius; ring heights z1..z4 stay
// fixed while deploy_ratio varies.  Default heights put the top nodes on the
// crown arc (rising from the pins toward the center) and hang the bottom
// nodes below the pin plane; this is the only assignment of the published
// heights under which the self-stress keeps every string in tension (see
// README).
struct LevyParams {
  double radius = 50.0;        // m, pin ring radius
  double deploy_ratio = 0.3;   // dimensionless, in (0, 1)
  int complexity = 12;         // p, units around the circumference
  double z1 = 8.663;           // m, outer top nodes
  double z2 = -9.623;          // m, outer bottom nodes
  double z3 = 13.458;          // m, inner top nodes
  double z4 = -0.960;          // m, inner bottom nodes
  int clusters_per_group = 3;  // arcs each string loop is split into
};

// Node families, one ring of p nodes each.  PN are the fixed pins.
enum class NodeGroup { PN, OTN, OBN, ITN, IBN };
inline constexpr int kNodeGroupCount = 5;

// Element families: two bar groups and seven closed string loops.
enum class ElementGroup { OB, IB, ORS, ODS, IRS, IDS, OHS, IHS, THS };
inline constexpr int kElementGroupCount = 9;
inline constexpr int kStringGroupCount = 7;  // ORS..THS

const std::string& to_string(NodeGroup g);
const std::string& to_string(ElementGroup g);
bool is_bar_group(ElementGroup g);

// Index bookkeeping for one generated dome: which nodes/elements belong to
// which family.  Element ids within a string group are stored in loop-walk
// order so clustering can slice them into contiguous arcs.
struct DomeTopology {
  int p = 0;
  std::array<std::vector<int>, kNodeGroupCount> node_groups;
  std::array<std::vector<int>, kElementGroupCount> element_groups;

  int node(NodeGroup g, int unit) const {
    return node_groups[static_cast<int>(g)][unit];
  }
};

// Section stock for sizing: one steel grade for bars, one aluminum grade for
// strings.
struct CapacityTable {
  struct Grade {
    double modulus = 0.0;   // Pa
    double density = 0.0;   // kg/m^3
    double capacity = 0.0;  // Pa
  };
  Grade bar{2.06e11, 7870.0, 355e6};
  Grade string{6.0e10, 2700.0, 110e6};
  double min_gauge_area = 1e-6;  // m^2, assigned to unloaded members
};

// A dome carried through design: geometry, clustered sections sized off the
// anchored prestress, rest lengths, and per-cluster family labels.
struct DesignedDome {
  Structure structure;
  DomeTopology topo;
  PrestressState prestress;
  std::vector<ElementGroup> cluster_group;  // per clustered element
};

void validate(const LevyParams& params);

// Node ring coordinates; PN fixed, all other rings free.  Nodes are stored
// ring-major: PN_0..PN_{p-1}, OTN, OBN, ITN, IBN.
NodeSet generate_nodes(const LevyParams& params);

// Bars first (OB then IB), then the seven string loops in walk order:
// ORS, ODS, IRS, IDS zig-zag between two rings; OHS, IHS, THS run around one.
struct Topology {
  Connectivity conn;
  DomeTopology topo;
};
Topology generate_topology(const LevyParams& params);

// Bars stay singletons; every string loop is cut into clusters_per_group
// contiguous equal arcs starting at unit 0.  Throws IndivisibleClustering
// when a loop cannot be divided evenly.
ClusterMap generate_clustering(const DomeTopology& topo, int clusters_per_group);

// Family label of every cluster produced by generate_clustering.
std::vector<ElementGroup> label_clusters(const DomeTopology& topo, const ClusterMap& cluster);

// Geometry-only structure (unit sections, rest lengths = current lengths);
// enough for equilibrium matrices and self-stress modes.
Structure geometry_structure(const LevyParams& params);

// Size every cluster to carry its prestress at 10% of capacity; bars also
// satisfy a ten-fold Euler buckling margin for a solid circular section
// (I = A^2 / 4pi).  Unloaded members get the minimum gauge area.
MaterialTable size_members(const Structure& geometry, const Eigen::VectorXd& force_c,
                           const CapacityTable& caps);

// The prestress anchor: first inner bar held at the given force.
PrestressAnchor ib_anchor(const DomeTopology& topo, double force);

// Full design pipeline at params.deploy_ratio: generate, solve the
// self-stress, anchor, size, and back out rest lengths.  When the arrangement
// has several self-stress modes the symmetric one (constant force density per
// family, taken from the fully clustered arrangement) is anchored instead;
// n_p in the result always reports the arrangement's own null-space dimension.
DesignedDome design_dome(const LevyParams& params, const CapacityTable& caps = {},
                         double anchor_force = -5000.0);

// Re-solve the prestress of an existing design at a different deploy ratio,
// keeping its sections.  Used pointwise along deployment trajectories.
struct RetensionedDome {
  Structure structure;
  PrestressState prestress;
};
RetensionedDome retension(const DesignedDome& design, double deploy_ratio,
                          double anchor_force = -5000.0);

}  // namespace cts::levy
