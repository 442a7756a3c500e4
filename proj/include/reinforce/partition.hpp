#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reinforce/graph.hpp"

namespace reinforce {

/// Disjoint cover of the node set 0..n-1 into nonempty regions. Immutable.
class Partition {
 public:
  Partition(NodeId n, std::vector<std::vector<NodeId>> regions);

  NodeId node_count() const { return n_; }
  std::size_t region_count() const { return regions_.size(); }
  const std::vector<std::vector<NodeId>>& regions() const { return regions_; }
  std::uint32_t region_of(NodeId v) const;
  bool same_region(NodeId a, NodeId b) const { return region_of(a) == region_of(b); }

  bool operator==(const Partition& other) const {
    return n_ == other.n_ && regions_ == other.regions_;
  }

 private:
  NodeId n_ = 0;
  std::vector<std::vector<NodeId>> regions_;  // each sorted ascending
  std::vector<std::uint32_t> region_of_;
};

struct PartitionStats {
  std::size_t max_region = 0;   // R
  std::size_t min_region = 0;   // r
  std::size_t region_count = 0; // k
  std::size_t cut_arcs = 0;     // arcs whose endpoints lie in different regions
  std::size_t total_arcs = 0;
  double eps_hat = 0.0;         // cut_arcs / total_arcs (0 when there are no arcs)
  // Informational: whether each region induces a (weakly) connected subgraph.
  std::vector<bool> region_connected;
  bool all_connected = true;
};

/// Segments of h consecutive nodes; the last segment may be shorter.
Partition path_partition(NodeId n, NodeId h);

/// Axis-aligned subdivision of a q-ary d-dimensional grid/torus into
/// (q/h)^d blocks of h^d nodes. Requires h to divide q.
Partition hypercube_partition(const GridSpec& spec, std::uint32_t h);

/// Checks that the partition covers exactly the network's nodes and computes
/// cut statistics. eps_hat counts directed arcs crossing regions over all
/// arcs; for symmetric networks this equals the undirected edge fraction.
PartitionStats validate_partition(const Network& net, const Partition& part);

/// Partition JSON: {"regions": [[ids...], ...]}.
Partition parse_partition_json(const std::string& text, std::optional<NodeId> expected_n = std::nullopt,
                               const std::string& origin = "<string>");
std::string partition_to_json(const Partition& part);
Partition load_partition(const std::string& path, std::optional<NodeId> expected_n = std::nullopt);
void save_partition(const Partition& part, const std::string& path);

}  // namespace reinforce
