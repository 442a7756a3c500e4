#include "reinforce/reinforcement.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace reinforce {

using nlohmann::json;

FaultKind fault_kind(Mode mode) {
  return (mode == Mode::StrongByz || mode == Mode::PartitionedByz) ? FaultKind::Byz : FaultKind::Om;
}

bool is_partitioned(Mode mode) {
  return mode == Mode::PartitionedByz || mode == Mode::PartitionedOm;
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::StrongByz: return "strong_byz";
    case Mode::StrongOm: return "strong_om";
    case Mode::PartitionedByz: return "partitioned_byz";
    case Mode::PartitionedOm: return "partitioned_om";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "strong_byz") return Mode::StrongByz;
  if (s == "strong_om") return Mode::StrongOm;
  if (s == "partitioned_byz") return Mode::PartitionedByz;
  if (s == "partitioned_om") return Mode::PartitionedOm;
  throw InvalidArgument("unknown mode \"" + s + "\"");
}

const char* to_string(FaultKind kind) {
  return kind == FaultKind::Byz ? "byz" : "om";
}

FaultKind fault_kind_from_string(const std::string& s) {
  if (s == "byz") return FaultKind::Byz;
  if (s == "om") return FaultKind::Om;
  throw InvalidArgument("unknown fault kind \"" + s + "\"");
}

ReinforcedNetwork::ReinforcedNetwork(Network original, Mode mode, std::uint32_t f,
                                     std::optional<Partition> partition)
    : original_(std::move(original)), mode_(mode), f_(f), partition_(std::move(partition)) {
  ell_ = fault_kind(mode_) == FaultKind::Byz ? 2 * f_ + 1 : f_ + 1;
  if (is_partitioned(mode_)) {
    if (!partition_) throw InvalidArgument("partitioned modes need a partition");
    if (partition_->node_count() != original_.node_count()) {
      throw InvalidPartition("partition covers " + std::to_string(partition_->node_count()) +
                             " nodes but the network has " +
                             std::to_string(original_.node_count()));
    }
    arc_intra_.reserve(original_.arc_count());
    for (const Arc& a : original_.arcs()) {
      bool intra = partition_->same_region(a.src, a.dst);
      arc_intra_.push_back(intra);
      if (intra) ++intra_arcs_;
    }
  } else {
    partition_.reset();
  }
}

std::size_t ReinforcedNetwork::eprime_count() const {
  const std::size_t ell = ell_;
  return intra_arcs_ * ell + cross_arc_count() * ell * ell;
}

bool ReinforcedNetwork::arc_is_intra(std::size_t arc_idx) const {
  if (arc_idx >= original_.arc_count()) throw InvalidArgument("arc index out of range");
  return is_partitioned(mode_) ? static_cast<bool>(arc_intra_[arc_idx]) : false;
}

NodeId ReinforcedNetwork::project(CopyId v) const {
  if (v.base >= original_.node_count() || v.copy < 1 || v.copy > ell_) {
    throw InvalidArgument("copy id out of range");
  }
  return v.base;
}

std::vector<CopyId> ReinforcedNetwork::copies_of(NodeId v) const {
  if (v >= original_.node_count()) throw InvalidArgument("node out of range");
  std::vector<CopyId> out;
  out.reserve(ell_);
  for (std::uint32_t i = 1; i <= ell_; ++i) out.push_back(CopyId{v, i});
  return out;
}

bool ReinforcedNetwork::arc_matched(NodeId w, NodeId v) const {
  return is_partitioned(mode_) && partition_->same_region(w, v);
}

std::vector<CopyId> ReinforcedNetwork::sender_copies(CopyId receiver, NodeId w) const {
  auto in = original_.in_neighbors(receiver.base);
  if (std::find(in.begin(), in.end(), w) == in.end()) {
    throw InvalidArgument("node " + std::to_string(w) + " is not an in-neighbor of " +
                          std::to_string(receiver.base));
  }
  if (arc_matched(w, receiver.base)) return {CopyId{w, receiver.copy}};
  return copies_of(w);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ReinforcedNetwork::flattened_arcs() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(eprime_count());
  for (std::size_t idx = 0; idx < original_.arc_count(); ++idx) {
    const Arc& a = original_.arcs()[idx];
    if (arc_is_intra(idx)) {
      for (std::uint32_t i = 1; i <= ell_; ++i) {
        out.emplace_back(flat_id({a.src, i}), flat_id({a.dst, i}));
      }
    } else {
      for (std::uint32_t i = 1; i <= ell_; ++i) {
        for (std::uint32_t j = 1; j <= ell_; ++j) {
          out.emplace_back(flat_id({a.src, i}), flat_id({a.dst, j}));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReinforcedNetwork build_strong(Network net, std::uint32_t f, FaultKind model) {
  return ReinforcedNetwork(std::move(net),
                           model == FaultKind::Byz ? Mode::StrongByz : Mode::StrongOm, f);
}

ReinforcedNetwork build_partitioned(Network net, std::uint32_t f, Partition part, FaultKind model) {
  return ReinforcedNetwork(std::move(net),
                           model == FaultKind::Byz ? Mode::PartitionedByz : Mode::PartitionedOm, f,
                           std::move(part));
}

Metrics metrics(const ReinforcedNetwork& rn) {
  Metrics m;
  m.v_count = rn.original().node_count();
  m.e_count = rn.original().arc_count();
  m.vprime_count = rn.vprime_count();
  m.eprime_count = rn.eprime_count();
  m.nu = rn.ell();
  if (m.e_count > 0) {
    m.eta = static_cast<double>(m.eprime_count) / static_cast<double>(m.e_count);
    if (is_partitioned(rn.mode())) {
      m.eps_hat = static_cast<double>(rn.cross_arc_count()) / static_cast<double>(m.e_count);
      // eta == (1-eps)*ell + eps*ell^2, checked on exact arc counts.
      const std::size_t ell = rn.ell();
      std::size_t expected = rn.intra_arc_count() * ell + rn.cross_arc_count() * ell * ell;
      if (expected != m.eprime_count) {
        throw Error("reinforced arc count does not satisfy the partitioned identity");
      }
    }
  }
  return m;
}

std::string reinforced_to_json(const ReinforcedNetwork& rn) {
  json j;
  j["mode"] = to_string(rn.mode());
  j["f"] = rn.f();
  j["ell"] = rn.ell();
  j["vprime_count"] = rn.vprime_count();
  j["original"] = json::parse(network_to_json(rn.original()));
  j["partition"] =
      rn.partition() ? json::parse(partition_to_json(*rn.partition())) : json(nullptr);
  json arcs = json::array();
  for (const auto& [s, d] : rn.flattened_arcs()) arcs.push_back(json::array({s, d}));
  j["arcs_flat"] = std::move(arcs);
  return j.dump() + "\n";
}

ReinforcedNetwork parse_reinforced_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  for (const char* field : {"mode", "f", "original"}) {
    if (!j.contains(field)) throw ParseError(origin + ": missing \"" + std::string(field) + "\"");
  }
  Mode mode = mode_from_string(j["mode"].get<std::string>());
  if (!j["f"].is_number_unsigned()) throw ParseError(origin + ": \"f\" must be unsigned");
  std::uint32_t f = j["f"].get<std::uint32_t>();
  Network net = parse_network_json(j["original"].dump(), origin + ": original");
  std::optional<Partition> part;
  if (is_partitioned(mode)) {
    if (!j.contains("partition") || j["partition"].is_null()) {
      throw ParseError(origin + ": partitioned mode without a partition");
    }
    part = parse_partition_json(j["partition"].dump(), net.node_count(), origin + ": partition");
  }
  ReinforcedNetwork rn(std::move(net), mode, f, std::move(part));
  if (j.contains("arcs_flat") && j["arcs_flat"].is_array() &&
      j["arcs_flat"].size() != rn.eprime_count()) {
    throw ParseError(origin + ": arcs_flat has " + std::to_string(j["arcs_flat"].size()) +
                     " entries, expected " + std::to_string(rn.eprime_count()));
  }
  return rn;
}

ReinforcedNetwork load_reinforced(const std::string& path) {
  return parse_reinforced_json(read_text_file(path), path);
}

void save_reinforced(const ReinforcedNetwork& rn, const std::string& path) {
  write_text_file(path, reinforced_to_json(rn));
}

}  // namespace reinforce
