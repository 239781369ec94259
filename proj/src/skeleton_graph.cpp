#include "skelfreq/skeleton_graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace skelfreq {

void SkeletonTopology::validate() const {
  require(node_count > 0, ErrorKind::topology, "node_count must be positive");
  std::set<Edge> seen;
  for (const auto& [a, b] : edges) {
    require(a < node_count && b < node_count, ErrorKind::topology,
            "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range for " +
                std::to_string(node_count) + " nodes");
    require(a != b, ErrorKind::topology, "self-loop at node " + std::to_string(a));
    const Edge key{std::min(a, b), std::max(a, b)};
    require(seen.insert(key).second, ErrorKind::topology,
            "duplicate edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
  }
  require(joint_names.empty() || joint_names.size() == node_count, ErrorKind::topology,
          "joint_names length differs from node_count");
  for (const auto& [part, joints] : part_sets) {
    for (const auto j : joints)
      require(j < node_count, ErrorKind::topology, "part " + std::to_string(part) + " references joint " +
                                                       std::to_string(j) + " out of range");
  }
  if (head_pair) {
    const auto [neck, head] = *head_pair;
    require(neck < node_count && head < node_count, ErrorKind::topology, "head_pair out of range");
    require(neck != head, ErrorKind::topology, "head_pair joints must differ");
  }
}

namespace {

std::vector<std::vector<std::size_t>> adjacency(const SkeletonTopology& t) {
  std::vector<std::vector<std::size_t>> adj(t.node_count);
  for (const auto& [a, b] : t.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  return adj;
}

}  // namespace

std::vector<std::size_t> SkeletonTopology::parents() const {
  validate();
  const auto adj = adjacency(*this);
  constexpr auto unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(node_count, unvisited);
  for (std::size_t root = 0; root < node_count; ++root) {
    if (parent[root] != unvisited) continue;
    parent[root] = root;
    std::queue<std::size_t> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (const auto v : adj[u]) {
        if (parent[v] == unvisited) {
          parent[v] = u;
          frontier.push(v);
        }
      }
    }
  }
  return parent;
}

const SkeletonTopology& SkeletonTopology::ntu25() {
  static const SkeletonTopology topo = [] {
    SkeletonTopology t;
    t.node_count = 25;
    t.joint_names = {"SpineBase",     "SpineMid",   "Neck",          "Head",       "ShoulderLeft",
                     "ElbowLeft",     "WristLeft",  "HandLeft",      "ShoulderRight", "ElbowRight",
                     "WristRight",    "HandRight",  "HipLeft",       "KneeLeft",   "AnkleLeft",
                     "FootLeft",      "HipRight",   "KneeRight",     "AnkleRight", "FootRight",
                     "SpineShoulder", "HandTipLeft", "ThumbLeft",    "HandTipRight", "ThumbRight"};
    // Kinect v2 bone list as used by the common NTU GCN code bases (1-based there).
    const std::vector<Edge> one_based = {{1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},
                                         {7, 6},   {8, 7},   {9, 21},  {10, 9},  {11, 10}, {12, 11},
                                         {13, 1},  {14, 13}, {15, 14}, {16, 15}, {17, 1},  {18, 17},
                                         {19, 18}, {20, 19}, {22, 23}, {23, 8},  {24, 25}, {25, 12}};
    for (const auto& [a, b] : one_based) t.edges.emplace_back(a - 1, b - 1);
    // Five-part split used by occlusion benchmarks on NTU.
    t.part_sets = {
        {1, {4, 5, 6, 7, 21, 22}},            // left arm
        {2, {8, 9, 10, 11, 23, 24}},          // right arm
        {3, {21, 22, 23, 24}},                // both hands
        {4, {12, 13, 14, 15, 16, 17, 18, 19}},  // both legs
        {5, {0, 1, 2, 3, 20}},                // torso
    };
    t.head_pair = std::pair<std::size_t, std::size_t>{2, 3};
    t.validate();
    return t;
  }();
  return topo;
}

TopologyPtr ntu25_topology() {
  static const TopologyPtr ptr = std::make_shared<const SkeletonTopology>(SkeletonTopology::ntu25());
  return ptr;
}

SkeletonTopology parse_topology(const std::string& edge_text, const std::string& sidecar_json) {
  SkeletonTopology t;
  std::istringstream in(edge_text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long a = 0;
    long long b = 0;
    std::string rest;
    if (!(fields >> a)) {
      require(line.find_first_not_of(" \t\r") == std::string::npos, ErrorKind::topology,
              "line " + std::to_string(line_no) + ": expected `i j`");
      continue;
    }
    require(static_cast<bool>(fields >> b) && !(fields >> rest), ErrorKind::topology,
            "line " + std::to_string(line_no) + ": expected exactly two indices");
    require(a >= 0 && b >= 0, ErrorKind::topology, "line " + std::to_string(line_no) + ": negative index");
    t.edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    max_index = std::max({max_index, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
    any = true;
  }
  if (any) t.node_count = max_index + 1;

  if (!sidecar_json.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(sidecar_json);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::topology, std::string("topology sidecar: ") + e.what());
    }
    try {
      if (j.contains("node_count")) t.node_count = j.at("node_count").get<std::size_t>();
      if (j.contains("joint_names")) {
        t.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        if (!j.contains("node_count") && !any) t.node_count = t.joint_names.size();
      }
      if (j.contains("part_sets")) {
        for (const auto& [key, joints] : j.at("part_sets").items())
          t.part_sets[std::stoi(key)] = joints.get<std::vector<std::size_t>>();
      }
      if (j.contains("head_pair")) {
        const auto hp = j.at("head_pair").get<std::vector<std::size_t>>();
        require(hp.size() == 2, ErrorKind::topology, "head_pair must hold two indices");
        t.head_pair = std::pair{hp[0], hp[1]};
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::topology, std::string("topology sidecar: ") + e.what());
    } catch (const std::logic_error& e) {
      fail(ErrorKind::topology, std::string("topology sidecar: ") + e.what());
    }
  }
  t.validate();
  return t;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::data, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SkeletonTopology load_topology(const std::filesystem::path& edge_file, const std::filesystem::path& sidecar) {
  return parse_topology(read_file(edge_file), sidecar.empty() ? std::string{} : read_file(sidecar));
}

Matrix build_laplacian(const SkeletonTopology& topology) {
  topology.validate();
  Matrix l(topology.node_count, topology.node_count);
  for (const auto& [a, b] : topology.edges) {
    l(a, b) = -1.0;
    l(b, a) = -1.0;
    l(a, a) += 1.0;
    l(b, b) += 1.0;
  }
  return l;
}

std::size_t connected_components(const SkeletonTopology& topology) {
  const auto parent = topology.parents();
  std::size_t roots = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) roots += parent[i] == i ? 1 : 0;
  return roots;
}

namespace {

constexpr double tie_tolerance = 1e-9;
constexpr double sign_tolerance = 1e-9;

using Column = std::vector<double>;

bool lexicographic_less(const Column& a, const Column& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) <= tie_tolerance) continue;
    return a[i] < b[i];
  }
  return false;
}

void fix_sign(Column& v) {
  for (const double x : v) {
    if (std::abs(x) > sign_tolerance) {
      if (x < 0) std::transform(v.begin(), v.end(), v.begin(), [](double y) { return -y; });
      return;
    }
  }
}

double norm(const Column& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

void orthogonalize(Column& w, const std::vector<Column>& basis) {
  // two passes of classical Gram-Schmidt keep orthogonality at ~1e-16
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) d += w[i] * b[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= d * b[i];
    }
  }
}

/// Canonical orthonormal basis of span(cluster): project e_1, e_2, ... and keep
/// the ones that add a new direction.
std::vector<Column> canonical_cluster_basis(const std::vector<Column>& cluster) {
  const std::size_t n = cluster.front().size();
  const std::size_t m = cluster.size();
  std::vector<Column> out;
  for (std::size_t i = 0; i < n && out.size() < m; ++i) {
    Column w(n, 0.0);
    for (const auto& v : cluster)
      for (std::size_t r = 0; r < n; ++r) w[r] += v[i] * v[r];
    orthogonalize(w, out);
    const double len = norm(w);
    if (len <= 1e-6) continue;
    for (auto& x : w) x /= len;
    out.push_back(std::move(w));
  }
  if (out.size() != m) fail(ErrorKind::numeric, "could not span a degenerate eigenspace");
  return out;
}

}  // namespace

GraphSpectrumBasis eigendecompose(const Matrix& laplacian) {
  const std::size_t n = laplacian.rows();
  require(n == laplacian.cols(), ErrorKind::shape, "Laplacian must be square");
  require(n > 0, ErrorKind::shape, "Laplacian must be non-empty");
  Eigen::MatrixXd dense(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      require(std::abs(laplacian(r, c) - laplacian(c, r)) <= 1e-12, ErrorKind::shape,
              "matrix is not symmetric");
      require(std::isfinite(laplacian(r, c)), ErrorKind::numeric, "matrix has non-finite entries");
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = laplacian(r, c);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "eigensolver did not converge");

  // Eigen returns ascending eigenvalues; walk backwards for descending order.
  std::vector<double> values(n);
  std::vector<Column> columns(n, Column(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = static_cast<Eigen::Index>(n - 1 - k);
    values[k] = solver.eigenvalues()(src);
    for (std::size_t r = 0; r < n; ++r) columns[k][r] = solver.eigenvectors()(static_cast<Eigen::Index>(r), src);
  }

  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n && std::abs(values[end - 1] - values[end]) < tie_tolerance) ++end;
    if (end - begin > 1) {
      std::vector<Column> cluster(columns.begin() + static_cast<std::ptrdiff_t>(begin),
                                  columns.begin() + static_cast<std::ptrdiff_t>(end));
      cluster = canonical_cluster_basis(cluster);
      for (auto& c : cluster) fix_sign(c);
      std::stable_sort(cluster.begin(), cluster.end(), lexicographic_less);
      std::move(cluster.begin(), cluster.end(), columns.begin() + static_cast<std::ptrdiff_t>(begin));
    } else {
      fix_sign(columns[begin]);
    }
    begin = end;
  }

  GraphSpectrumBasis basis;
  basis.eigenvalues = std::move(values);
  basis.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t r = 0; r < n; ++r) basis.eigenvectors(r, k) = columns[k][r];
  return basis;
}

GraphSpectrumBasis graph_basis(const SkeletonTopology& topology) {
  return eigendecompose(build_laplacian(topology));
}

std::string GraphSpectrumBasis::id() const {
  // FNV-1a over the raw bytes of eigenvalues then eigenvectors
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::span<const double> values) {
    for (const double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (const auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  mix(eigenvalues);
  mix(eigenvectors.values());
  std::ostringstream out;
  out << "gft-" << eigenvalues.size() << "-" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace skelfreq
