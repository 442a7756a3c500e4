#include "reinforce/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace reinforce {

using nlohmann::json;

Network::Network(NodeId n, std::vector<Arc> arcs) : n_(n), arcs_(std::move(arcs)) {
  std::sort(arcs_.begin(), arcs_.end());
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    const Arc& a = arcs_[i];
    if (a.src >= n_ || a.dst >= n_) {
      throw InvalidArgument("arc (" + std::to_string(a.src) + "," + std::to_string(a.dst) +
                            ") has an endpoint out of range (n=" + std::to_string(n_) + ")");
    }
    if (a.src == a.dst) {
      throw InvalidArgument("self-loop (" + std::to_string(a.src) + "," + std::to_string(a.dst) +
                            ") is not allowed");
    }
    if (i > 0 && arcs_[i - 1] == a) {
      throw InvalidArgument("duplicate arc (" + std::to_string(a.src) + "," +
                            std::to_string(a.dst) + ")");
    }
  }

  out_off_.assign(n_ + 1, 0);
  in_off_.assign(n_ + 1, 0);
  for (const Arc& a : arcs_) {
    ++out_off_[a.src + 1];
    ++in_off_[a.dst + 1];
  }
  for (NodeId v = 0; v < n_; ++v) {
    out_off_[v + 1] += out_off_[v];
    in_off_[v + 1] += in_off_[v];
  }
  out_adj_.resize(arcs_.size());
  in_adj_.resize(arcs_.size());
  std::vector<std::uint32_t> opos(out_off_.begin(), out_off_.end() - 1);
  std::vector<std::uint32_t> ipos(in_off_.begin(), in_off_.end() - 1);
  for (const Arc& a : arcs_) {
    out_adj_[opos[a.src]++] = a.dst;
    in_adj_[ipos[a.dst]++] = a.src;
  }
  // arcs_ is sorted, so out lists come out ascending; sort the in lists.
  for (NodeId v = 0; v < n_; ++v) {
    std::sort(in_adj_.begin() + in_off_[v], in_adj_.begin() + in_off_[v + 1]);
  }
}

std::span<const NodeId> Network::out_neighbors(NodeId v) const {
  if (v >= n_) throw InvalidArgument("node " + std::to_string(v) + " out of range");
  return {out_adj_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
}

std::span<const NodeId> Network::in_neighbors(NodeId v) const {
  if (v >= n_) throw InvalidArgument("node " + std::to_string(v) + " out of range");
  return {in_adj_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
}

std::size_t Network::arc_index(NodeId src, NodeId dst) const {
  auto it = std::lower_bound(arcs_.begin(), arcs_.end(), Arc{src, dst});
  if (it == arcs_.end() || !(*it == Arc{src, dst})) return npos;
  return static_cast<std::size_t>(it - arcs_.begin());
}

Network make_path(NodeId n) {
  if (n < 2) throw InvalidArgument("a path needs at least 2 nodes, got " + std::to_string(n));
  std::vector<Arc> arcs;
  arcs.reserve(n - 1);
  for (NodeId v = 0; v + 1 < n; ++v) arcs.push_back({v, v + 1});
  return Network(n, std::move(arcs));
}

static void check_grid_spec(const GridSpec& spec) {
  if (spec.q < 2) throw InvalidArgument("grid side length must be >= 2");
  if (spec.d < 1) throw InvalidArgument("grid dimension must be >= 1");
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < spec.d; ++i) {
    n *= spec.q;
    if (n > (1ull << 28)) throw InvalidArgument("grid node count overflows the supported range");
  }
}

NodeId grid_node_id(const GridSpec& spec, const std::vector<std::uint32_t>& coords) {
  if (coords.size() != spec.d) throw InvalidArgument("coordinate count does not match dimension");
  std::uint64_t id = 0;
  for (std::uint32_t i = spec.d; i-- > 0;) {
    if (coords[i] >= spec.q) throw InvalidArgument("coordinate out of range");
    id = id * spec.q + coords[i];
  }
  return static_cast<NodeId>(id);
}

std::vector<std::uint32_t> grid_coords(const GridSpec& spec, NodeId v) {
  std::vector<std::uint32_t> coords(spec.d);
  for (std::uint32_t i = 0; i < spec.d; ++i) {
    coords[i] = v % spec.q;
    v /= spec.q;
  }
  return coords;
}

Network make_grid(const GridSpec& spec) {
  check_grid_spec(spec);
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < spec.d; ++i) n *= spec.q;
  std::vector<Arc> arcs;
  std::uint64_t stride = 1;
  for (std::uint32_t dim = 0; dim < spec.d; ++dim) {
    for (NodeId v = 0; v < n; ++v) {
      std::uint32_t x = (v / stride) % spec.q;
      if (x + 1 < spec.q) {
        NodeId w = static_cast<NodeId>(v + stride);
        arcs.push_back({v, w});
        arcs.push_back({w, v});
      } else if (spec.wraparound && spec.q > 2) {
        // q = 2 wraparound would duplicate the existing adjacency.
        NodeId w = static_cast<NodeId>(v - (spec.q - 1) * stride);
        arcs.push_back({v, w});
        arcs.push_back({w, v});
      }
    }
    stride *= spec.q;
  }
  return Network(static_cast<NodeId>(n), std::move(arcs));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << content;
  if (!out) throw Error(path + ": write failed");
}

Network parse_network_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("arcs")) {
    throw ParseError(origin + ": expected an object with \"n\" and \"arcs\"");
  }
  if (!j["n"].is_number_unsigned()) throw ParseError(origin + ": \"n\" must be a non-negative integer");
  std::uint64_t n = j["n"].get<std::uint64_t>();
  if (n > (1ull << 31)) throw ParseError(origin + ": \"n\" too large");
  if (!j["arcs"].is_array()) throw ParseError(origin + ": \"arcs\" must be an array");
  std::vector<Arc> arcs;
  arcs.reserve(j["arcs"].size());
  std::size_t idx = 0;
  for (const auto& e : j["arcs"]) {
    std::string where = origin + ": arcs[" + std::to_string(idx) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      throw ParseError(where + ": expected [src, dst] with non-negative integers");
    }
    std::uint64_t s = e[0].get<std::uint64_t>(), d = e[1].get<std::uint64_t>();
    if (s >= n || d >= n) throw ParseError(where + ": endpoint out of range (n=" + std::to_string(n) + ")");
    if (s == d) throw ParseError(where + ": self-loop not allowed");
    arcs.push_back({static_cast<NodeId>(s), static_cast<NodeId>(d)});
    ++idx;
  }
  try {
    return Network(static_cast<NodeId>(n), std::move(arcs));
  } catch (const InvalidArgument& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

std::string network_to_json(const Network& net) {
  json j;
  j["n"] = net.node_count();
  json arcs = json::array();
  for (const Arc& a : net.arcs()) arcs.push_back(json::array({a.src, a.dst}));
  j["arcs"] = std::move(arcs);
  return j.dump() + "\n";
}

Network load_network(const std::string& path) {
  return parse_network_json(read_text_file(path), path);
}

void save_network(const Network& net, const std::string& path) {
  write_text_file(path, network_to_json(net));
}

}  // namespace reinforce
