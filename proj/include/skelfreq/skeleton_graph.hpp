#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skelfreq/matrix.hpp"

namespace skelfreq {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected, unweighted skeleton graph plus the joint groups used by the
/// occlusion corruption and the joint pair that defines head length.
struct SkeletonTopology {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::vector<std::string> joint_names;
  std::map<int, std::vector<std::size_t>> part_sets;
  /// (neck, head); unset for topologies without a head bone.
  std::optional<std::pair<std::size_t, std::size_t>> head_pair;

  /// Throws topology-error on out-of-range indices, self-loops, duplicate
  /// edges, or a degenerate head pair.
  void validate() const;

  /// Parent of every joint in a breadth-first tree rooted at the lowest index
  /// of each connected component; roots map to themselves.
  std::vector<std::size_t> parents() const;

  /// NTU RGB+D 25-joint Kinect v2 skeleton (zero-based joint indices).
  static const SkeletonTopology& ntu25();
};

using TopologyPtr = std::shared_ptr<const SkeletonTopology>;

/// Shared handle to the built-in NTU topology.
TopologyPtr ntu25_topology();

/// Loads a user topology: `edge_file` holds one `i j` pair per line with `#`
/// comments; the JSON sidecar may carry node_count, joint_names, part_sets
/// and head_pair.
SkeletonTopology load_topology(const std::filesystem::path& edge_file,
                               const std::filesystem::path& sidecar = {});
SkeletonTopology parse_topology(const std::string& edge_text, const std::string& sidecar_json = {});

/// Combinatorial Laplacian L = D - A.
Matrix build_laplacian(const SkeletonTopology& topology);

std::size_t connected_components(const SkeletonTopology& topology);

/// Eigenbasis of a graph Laplacian. Column k of `eigenvectors` pairs with
/// eigenvalues[k]; eigenvalues descend, so the last column is the lowest
/// (spatial DC) frequency.
struct GraphSpectrumBasis {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  /// Content hash (hex), used to tie spectra and heatmaps to their basis.
  std::string id() const;
};

/// Symmetric eigendecomposition with a canonical output:
///  - eigenvalues sorted descending;
///  - inside a degenerate cluster (|λi - λj| < 1e-9) the basis is rebuilt by
///    Gram-Schmidt over the projected unit vectors e_1, e_2, ..., so it does
///    not depend on the solver's arbitrary rotation of the eigenspace;
///  - each column's first component with |value| > 1e-9 is positive;
///  - columns within a cluster are ordered lexicographically ascending.
GraphSpectrumBasis eigendecompose(const Matrix& laplacian);

/// Convenience: eigendecompose(build_laplacian(topology)).
GraphSpectrumBasis graph_basis(const SkeletonTopology& topology);

}  // namespace skelfreq
