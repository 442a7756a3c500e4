#include "reinforce/partition.hpp"

#include <algorithm>
#include <queue>

#include <nlohmann/json.hpp>

namespace reinforce {

using nlohmann::json;

Partition::Partition(NodeId n, std::vector<std::vector<NodeId>> regions)
    : n_(n), regions_(std::move(regions)) {
  constexpr std::uint32_t kUnset = 0xffffffffu;
  region_of_.assign(n_, kUnset);
  for (std::uint32_t k = 0; k < regions_.size(); ++k) {
    auto& region = regions_[k];
    if (region.empty()) throw InvalidPartition("region " + std::to_string(k) + " is empty");
    std::sort(region.begin(), region.end());
    for (NodeId v : region) {
      if (v >= n_) {
        throw InvalidPartition("node " + std::to_string(v) + " out of range (n=" +
                               std::to_string(n_) + ")");
      }
      if (region_of_[v] != kUnset) {
        throw InvalidPartition("node " + std::to_string(v) + " appears in regions " +
                               std::to_string(region_of_[v]) + " and " + std::to_string(k));
      }
      region_of_[v] = k;
    }
  }
  for (NodeId v = 0; v < n_; ++v) {
    if (region_of_[v] == kUnset) {
      throw InvalidPartition("node " + std::to_string(v) + " is not covered by any region");
    }
  }
}

std::uint32_t Partition::region_of(NodeId v) const {
  if (v >= n_) throw InvalidArgument("node " + std::to_string(v) + " out of range");
  return region_of_[v];
}

Partition path_partition(NodeId n, NodeId h) {
  if (n < 1) throw InvalidArgument("path_partition needs n >= 1");
  if (h < 1) throw InvalidArgument("segment length must be >= 1");
  std::vector<std::vector<NodeId>> regions;
  for (NodeId start = 0; start < n; start += h) {
    std::vector<NodeId> region;
    for (NodeId v = start; v < std::min<NodeId>(start + h, n); ++v) region.push_back(v);
    regions.push_back(std::move(region));
  }
  return Partition(n, std::move(regions));
}

Partition hypercube_partition(const GridSpec& spec, std::uint32_t h) {
  if (h < 1) throw InvalidArgument("block side must be >= 1");
  if (spec.q % h != 0) {
    throw InvalidArgument("block side " + std::to_string(h) + " does not divide q=" +
                          std::to_string(spec.q));
  }
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < spec.d; ++i) n *= spec.q;
  const std::uint32_t blocks_per_dim = spec.q / h;
  std::uint64_t region_count = 1;
  for (std::uint32_t i = 0; i < spec.d; ++i) region_count *= blocks_per_dim;

  std::vector<std::vector<NodeId>> regions(region_count);
  for (NodeId v = 0; v < n; ++v) {
    std::vector<std::uint32_t> coords = grid_coords(spec, v);
    std::uint64_t block = 0;
    for (std::uint32_t i = spec.d; i-- > 0;) block = block * blocks_per_dim + coords[i] / h;
    regions[block].push_back(v);
  }
  return Partition(static_cast<NodeId>(n), std::move(regions));
}

static bool region_is_connected(const Network& net, const std::vector<NodeId>& region,
                                const Partition& part, std::uint32_t k) {
  if (region.size() <= 1) return true;
  // Undirected BFS restricted to the region.
  std::vector<NodeId> stack{region[0]};
  std::vector<bool> seen(net.node_count(), false);
  seen[region[0]] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId w) {
      if (!seen[w] && part.region_of(w) == k) {
        seen[w] = true;
        ++reached;
        stack.push_back(w);
      }
    };
    for (NodeId w : net.out_neighbors(v)) visit(w);
    for (NodeId w : net.in_neighbors(v)) visit(w);
  }
  return reached == region.size();
}

PartitionStats validate_partition(const Network& net, const Partition& part) {
  if (part.node_count() != net.node_count()) {
    throw InvalidPartition("partition covers " + std::to_string(part.node_count()) +
                           " nodes but the network has " + std::to_string(net.node_count()));
  }
  PartitionStats stats;
  stats.region_count = part.region_count();
  stats.total_arcs = net.arc_count();
  stats.max_region = 0;
  stats.min_region = net.node_count();
  for (const auto& region : part.regions()) {
    stats.max_region = std::max(stats.max_region, region.size());
    stats.min_region = std::min(stats.min_region, region.size());
  }
  for (const Arc& a : net.arcs()) {
    if (!part.same_region(a.src, a.dst)) ++stats.cut_arcs;
  }
  stats.eps_hat = stats.total_arcs == 0
                      ? 0.0
                      : static_cast<double>(stats.cut_arcs) / static_cast<double>(stats.total_arcs);
  stats.region_connected.reserve(part.region_count());
  for (std::uint32_t k = 0; k < part.region_count(); ++k) {
    bool conn = region_is_connected(net, part.regions()[k], part, k);
    stats.region_connected.push_back(conn);
    stats.all_connected = stats.all_connected && conn;
  }
  return stats;
}

Partition parse_partition_json(const std::string& text, std::optional<NodeId> expected_n,
                               const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("regions") || !j["regions"].is_array()) {
    throw ParseError(origin + ": expected an object with a \"regions\" array");
  }
  std::vector<std::vector<NodeId>> regions;
  NodeId max_id = 0;
  bool any = false;
  std::size_t k = 0;
  for (const auto& r : j["regions"]) {
    std::string where = origin + ": regions[" + std::to_string(k) + "]";
    if (!r.is_array()) throw ParseError(where + ": expected an array of node ids");
    std::vector<NodeId> region;
    for (const auto& e : r) {
      if (!e.is_number_unsigned()) throw ParseError(where + ": node ids must be non-negative integers");
      NodeId v = e.get<NodeId>();
      max_id = std::max(max_id, v);
      any = true;
      region.push_back(v);
    }
    regions.push_back(std::move(region));
    ++k;
  }
  NodeId n = expected_n.value_or(any ? max_id + 1 : 0);
  return Partition(n, std::move(regions));
}

std::string partition_to_json(const Partition& part) {
  json j;
  json regions = json::array();
  for (const auto& region : part.regions()) regions.push_back(region);
  j["regions"] = std::move(regions);
  return j.dump() + "\n";
}

Partition load_partition(const std::string& path, std::optional<NodeId> expected_n) {
  return parse_partition_json(read_text_file(path), expected_n, path);
}

void save_partition(const Partition& part, const std::string& path) {
  write_text_file(path, partition_to_json(part));
}

}  // namespace reinforce
