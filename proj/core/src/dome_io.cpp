#include "cts/dome_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cts/errors.hpp"

namespace cts::io {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "cts-dome";

levy::NodeGroup node_group_from(const std::string& tag) {
  for (int g = 0; g < levy::kNodeGroupCount; ++g) {
    const auto group = static_cast<levy::NodeGroup>(g);
    if (levy::to_string(group) == tag) return group;
  }
  throw InvalidInput("unknown node group tag '" + tag + "'");
}

levy::ElementGroup element_group_from(const std::string& tag) {
  for (int g = 0; g < levy::kElementGroupCount; ++g) {
    const auto group = static_cast<levy::ElementGroup>(g);
    if (levy::to_string(group) == tag) return group;
  }
  throw InvalidInput("unknown element group tag '" + tag + "'");
}

// Field access with path diagnostics: every missing key or type mismatch
// names the enclosing record so a hand-edited file fails loudly.
const json& require(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end())
    throw InvalidInput("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

double number_at(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number())
    throw InvalidInput("field '" + std::string(key) + "' in " + where +
                       " is not a number");
  return v.get<double>();
}

int int_at(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer())
    throw InvalidInput("field '" + std::string(key) + "' in " + where +
                       " is not an integer");
  return v.get<int>();
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array())
    throw InvalidInput("expected an array in " + where);
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) {
    if (!x.is_number())
      throw InvalidInput("non-numeric entry in " + where);
    v(i++) = x.get<double>();
  }
  return v;
}

}  // namespace

std::string write_dome(const levy::DesignedDome& dome) {
  const Structure& s = dome.structure;
  const int n = s.n_nodes();
  const int m = s.n_elements();
  const int nc = s.n_clusters();

  // Node groups and element groups are emitted as per-record tags; readers
  // rebuild the group tables by scanning ids in order, which matches the
  // generator's ring-major layout.
  std::vector<std::string> node_tag(n), element_tag(m);
  for (int g = 0; g < levy::kNodeGroupCount; ++g)
    for (int id : dome.topo.node_groups[g])
      node_tag[id] = levy::to_string(static_cast<levy::NodeGroup>(g));
  for (int g = 0; g < levy::kElementGroupCount; ++g)
    for (int id : dome.topo.element_groups[g])
      element_tag[id] = levy::to_string(static_cast<levy::ElementGroup>(g));

  const std::unordered_set<int> fixed(s.nodes.fixed_idx.begin(),
                                      s.nodes.fixed_idx.end());

  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kFormatVersion;
  doc["p"] = dome.topo.p;

  json nodes = json::array();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = s.nodes.position(i);
    nodes.push_back({{"id", i},
                     {"group", node_tag[i]},
                     {"x_m", x.x()},
                     {"y_m", x.y()},
                     {"z_m", x.z()},
                     {"fixed", fixed.count(i) > 0}});
  }
  doc["nodes"] = std::move(nodes);

  json elements = json::array();
  for (int e = 0; e < m; ++e) {
    elements.push_back(
        {{"id", e},
         {"group", element_tag[e]},
         {"kind", s.conn.kind(e) == ElementKind::Bar ? "bar" : "string"},
         {"from", s.conn.rows[e].from},
         {"to", s.conn.rows[e].to}});
  }
  doc["elements"] = std::move(elements);

  json clusters = json::array();
  for (int k = 0; k < nc; ++k) {
    json c = {{"id", k},
              {"group", levy::to_string(dome.cluster_group[k])},
              {"elements", s.cluster.groups[k]}};
    if (s.rest_lengths_c.size() == nc) c["rest_length_m"] = s.rest_lengths_c(k);
    clusters.push_back(std::move(c));
  }
  doc["clusters"] = std::move(clusters);

  doc["materials"] = {{"mass_scale", s.mat.mass_scale},
                      {"area_m2", vector_to_json(s.mat.area)},
                      {"modulus_pa", vector_to_json(s.mat.modulus)},
                      {"tangent_modulus_pa", vector_to_json(s.mat.tangent_modulus)},
                      {"density_kg_m3", vector_to_json(s.mat.density)},
                      {"capacity_pa", vector_to_json(s.mat.capacity)}};

  json prestress = {{"n_p", dome.prestress.n_p},
                    {"force_c_n", vector_to_json(dome.prestress.force_c)},
                    {"density_c_n_m", vector_to_json(dome.prestress.density_c)},
                    {"rest_lengths_m", vector_to_json(dome.prestress.rest_lengths_c)}};
  json basis = json::array();
  for (Eigen::Index col = 0; col < dome.prestress.mode_basis.cols(); ++col)
    basis.push_back(vector_to_json(dome.prestress.mode_basis.col(col)));
  prestress["mode_basis"] = std::move(basis);
  doc["prestress"] = std::move(prestress);

  return doc.dump(2) + "\n";
}

levy::DesignedDome read_dome(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("dome document is not valid JSON: ") + e.what());
  }

  if (require(doc, "format", "document").get<std::string>() != kFormatName)
    throw InvalidInput("unrecognized dome format tag");
  if (int_at(doc, "version", "document") != kFormatVersion)
    throw InvalidInput("unsupported dome format version");

  levy::DesignedDome dome;
  Structure& s = dome.structure;
  dome.topo.p = int_at(doc, "p", "document");

  // Nodes: coordinates, fixed partition, and group membership in id order.
  const json& nodes = require(doc, "nodes", "document");
  const int n = static_cast<int>(nodes.size());
  s.nodes.coords.resize(3 * n);
  for (const auto& rec : nodes) {
    const int id = int_at(rec, "id", "node record");
    const std::string where = "node " + std::to_string(id);
    if (id < 0 || id >= n) throw InvalidInput("node id out of range in " + where);
    s.nodes.coords.segment<3>(3 * id) = Eigen::Vector3d(
        number_at(rec, "x_m", where), number_at(rec, "y_m", where),
        number_at(rec, "z_m", where));
    const json& flag = require(rec, "fixed", where);
    if (!flag.is_boolean())
      throw InvalidInput("field 'fixed' in " + where + " is not a boolean");
    (flag.get<bool>() ? s.nodes.fixed_idx : s.nodes.free_idx).push_back(id);
    const auto group = node_group_from(
        require(rec, "group", where).get<std::string>());
    dome.topo.node_groups[static_cast<int>(group)].push_back(id);
  }

  // Elements: endpoints, kind (bars must precede strings), and family.
  const json& elements = require(doc, "elements", "document");
  const int m = static_cast<int>(elements.size());
  s.conn.rows.resize(m);
  s.conn.n_bars = 0;
  int last_bar = -1, first_string = m;
  for (const auto& rec : elements) {
    const int id = int_at(rec, "id", "element record");
    const std::string where = "element " + std::to_string(id);
    if (id < 0 || id >= m)
      throw InvalidInput("element id out of range in " + where);
    const int from = int_at(rec, "from", where);
    const int to = int_at(rec, "to", where);
    if (from < 0 || from >= n || to < 0 || to >= n)
      throw InvalidInput("endpoint out of range in " + where);
    s.conn.rows[id] = {from, to};
    const std::string kind = require(rec, "kind", where).get<std::string>();
    if (kind == "bar") {
      ++s.conn.n_bars;
      last_bar = std::max(last_bar, id);
    } else if (kind == "string") {
      first_string = std::min(first_string, id);
    } else {
      throw InvalidInput("unknown kind '" + kind + "' in " + where);
    }
    const auto group = element_group_from(
        require(rec, "group", where).get<std::string>());
    dome.topo.element_groups[static_cast<int>(group)].push_back(id);
  }
  if (last_bar >= first_string)
    throw InvalidInput("element records interleave bars and strings; bars "
                       "must occupy the leading ids");

  // Cluster groups: member lists in chain order plus the family tag.
  const json& clusters = require(doc, "clusters", "document");
  const int nc = static_cast<int>(clusters.size());
  s.cluster.groups.resize(nc);
  s.cluster.n_classic = m;
  dome.cluster_group.resize(nc);
  Eigen::VectorXd rest = Eigen::VectorXd::Zero(nc);
  bool any_rest = false;
  for (const auto& rec : clusters) {
    const int id = int_at(rec, "id", "cluster record");
    const std::string where = "cluster " + std::to_string(id);
    if (id < 0 || id >= nc)
      throw InvalidInput("cluster id out of range in " + where);
    dome.cluster_group[id] = element_group_from(
        require(rec, "group", where).get<std::string>());
    const json& members = require(rec, "elements", where);
    if (!members.is_array() || members.empty())
      throw InvalidInput("empty member list in " + where);
    for (const auto& e : members) {
      if (!e.is_number_integer())
        throw InvalidInput("non-integer member id in " + where);
      const int eid = e.get<int>();
      if (eid < 0 || eid >= m)
        throw InvalidInput("member id out of range in " + where);
      s.cluster.groups[id].push_back(eid);
    }
    if (rec.contains("rest_length_m")) {
      rest(id) = number_at(rec, "rest_length_m", where);
      any_rest = true;
    }
  }
  if (any_rest) s.rest_lengths_c = rest;

  // Materials: per-cluster property arrays; kinds mirror each cluster's
  // member records (validate() rejects mixed-kind clusters downstream).
  const json& mat = require(doc, "materials", "document");
  s.mat.mass_scale = number_at(mat, "mass_scale", "materials");
  s.mat.area = vector_from_json(require(mat, "area_m2", "materials"), "materials.area_m2");
  s.mat.modulus =
      vector_from_json(require(mat, "modulus_pa", "materials"), "materials.modulus_pa");
  s.mat.tangent_modulus = vector_from_json(
      require(mat, "tangent_modulus_pa", "materials"), "materials.tangent_modulus_pa");
  s.mat.density = vector_from_json(require(mat, "density_kg_m3", "materials"),
                                   "materials.density_kg_m3");
  s.mat.capacity =
      vector_from_json(require(mat, "capacity_pa", "materials"), "materials.capacity_pa");
  if (s.mat.area.size() != nc)
    throw InvalidInput("materials arrays do not match the cluster count");
  s.mat.kind.resize(nc);
  for (int k = 0; k < nc; ++k)
    s.mat.kind[k] = s.conn.kind(s.cluster.groups[k].front());

  const json& pre = require(doc, "prestress", "document");
  dome.prestress.n_p = int_at(pre, "n_p", "prestress");
  dome.prestress.force_c =
      vector_from_json(require(pre, "force_c_n", "prestress"), "prestress.force_c_n");
  dome.prestress.density_c = vector_from_json(require(pre, "density_c_n_m", "prestress"),
                                              "prestress.density_c_n_m");
  dome.prestress.rest_lengths_c = vector_from_json(
      require(pre, "rest_lengths_m", "prestress"), "prestress.rest_lengths_m");
  const json& basis = require(pre, "mode_basis", "prestress");
  dome.prestress.mode_basis.resize(nc, basis.size());
  Eigen::Index col = 0;
  for (const auto& column : basis) {
    const Eigen::VectorXd v = vector_from_json(column, "prestress.mode_basis");
    if (v.size() != nc)
      throw InvalidInput("mode basis column does not match the cluster count");
    dome.prestress.mode_basis.col(col++) = v;
  }

  validate(s);
  return dome;
}

void save_dome(const std::filesystem::path& path, const levy::DesignedDome& dome) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  out << write_dome(dome);
}

levy::DesignedDome load_dome(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dome file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_dome(buf.str());
}

}  // namespace cts::io
