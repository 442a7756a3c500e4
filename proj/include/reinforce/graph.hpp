#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reinforce/errors.hpp"

namespace reinforce {

/// Dense node index in 0..n-1.
using NodeId = std::uint32_t;

struct Arc {
  NodeId src;
  NodeId dst;
  auto operator<=>(const Arc&) const = default;
};

/// Immutable directed graph. Arcs are kept sorted lexicographically; no
/// self-loops, no duplicates, every endpoint < n. Safe to share across
/// concurrent readers.
class Network {
 public:
  Network() = default;
  Network(NodeId n, std::vector<Arc> arcs);

  NodeId node_count() const { return n_; }
  std::size_t arc_count() const { return arcs_.size(); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  std::span<const NodeId> out_neighbors(NodeId v) const;
  std::span<const NodeId> in_neighbors(NodeId v) const;

  /// Index of (src, dst) in arcs(), or npos if absent.
  std::size_t arc_index(NodeId src, NodeId dst) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const Network& other) const {
    return n_ == other.n_ && arcs_ == other.arcs_;
  }

 private:
  NodeId n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<NodeId> out_adj_, in_adj_;
  std::vector<std::uint32_t> out_off_, in_off_;
};

/// Side length / dimension of a q-ary d-dimensional grid; wraparound selects
/// the torus variant.
struct GridSpec {
  std::uint32_t q = 2;
  std::uint32_t d = 1;
  bool wraparound = false;
  bool operator==(const GridSpec&) const = default;
};

/// Directed path 0 -> 1 -> ... -> n-1. Requires n >= 2.
Network make_path(NodeId n);

/// q-ary d-dimensional grid (or torus): node set [q]^d, adjacency when the
/// coordinate vectors agree on all but one index, where they differ by one.
/// Each undirected adjacency is materialized as two opposite arcs. For q = 2
/// the wraparound adjacency coincides with the grid adjacency and adds nothing.
Network make_grid(const GridSpec& spec);

/// Mixed-radix coordinate encoding, least-significant dimension first:
/// id = x_0 + x_1*q + x_2*q^2 + ...
NodeId grid_node_id(const GridSpec& spec, const std::vector<std::uint32_t>& coords);
std::vector<std::uint32_t> grid_coords(const GridSpec& spec, NodeId v);

/// Graph JSON: {"n": <int>, "arcs": [[src, dst], ...]}. Arcs are sorted on
/// save so output is byte-stable.
Network parse_network_json(const std::string& text, const std::string& origin = "<string>");
std::string network_to_json(const Network& net);
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

// Small file helpers shared by the JSON loaders.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace reinforce
