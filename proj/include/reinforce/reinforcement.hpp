#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reinforce/graph.hpp"
#include "reinforce/partition.hpp"

namespace reinforce {

enum class FaultKind { Byz, Om };

enum class Mode { StrongByz, StrongOm, PartitionedByz, PartitionedOm };

FaultKind fault_kind(Mode mode);
bool is_partitioned(Mode mode);
const char* to_string(Mode mode);
Mode mode_from_string(const std::string& s);
const char* to_string(FaultKind kind);
FaultKind fault_kind_from_string(const std::string& s);

/// A node of the reinforced network: copy `copy` (1-based, in 1..ell) of the
/// original node `base`.
struct CopyId {
  NodeId base;
  std::uint32_t copy;
  auto operator<=>(const CopyId&) const = default;
};

/// The reinforced network G' = (V', E') with projection P(v_i) = v.
///
/// V' is V x [ell] with ell = 2f+1 for Byzantine modes and f+1 for omission
/// modes. In the strong modes every original arc becomes the full ell x ell
/// biclique between the endpoint copies. In the partitioned modes arcs inside
/// a region are replicated copy-index-matched (v_i, w_i) and only arcs
/// crossing regions get the biclique. E' is not materialized; it is defined
/// by these per-arc rules and exposed through sender_copies()/flattened_arcs().
/// Immutable and shareable across concurrent trials.
class ReinforcedNetwork {
 public:
  ReinforcedNetwork(Network original, Mode mode, std::uint32_t f,
                    std::optional<Partition> partition = std::nullopt);

  const Network& original() const { return original_; }
  Mode mode() const { return mode_; }
  FaultKind kind() const { return fault_kind(mode_); }
  std::uint32_t f() const { return f_; }
  std::uint32_t ell() const { return ell_; }
  const std::optional<Partition>& partition() const { return partition_; }

  std::size_t vprime_count() const {
    return static_cast<std::size_t>(ell_) * original_.node_count();
  }
  std::size_t eprime_count() const;
  /// Original arcs whose reinforced image is copy-index-matched / a biclique.
  std::size_t intra_arc_count() const { return intra_arcs_; }
  std::size_t cross_arc_count() const { return original_.arc_count() - intra_arcs_; }
  bool arc_is_intra(std::size_t arc_idx) const;

  NodeId project(CopyId v) const;
  std::vector<CopyId> copies_of(NodeId v) const;

  /// Deterministic flattening base*ell + (copy-1), used for file export and
  /// fault-set indexing.
  std::uint32_t flat_id(CopyId v) const {
    return v.base * ell_ + (v.copy - 1);
  }
  CopyId from_flat(std::uint32_t flat) const {
    return CopyId{static_cast<NodeId>(flat / ell_), flat % ell_ + 1};
  }

  /// The copies of in-neighbor w wired into receiver copy v' (the group the
  /// receiver decodes over).
  std::vector<CopyId> sender_copies(CopyId receiver, NodeId w) const;
  /// True when the single arc (w_i, v_i) realizes (w, v), i.e. w and v share
  /// a region in a partitioned mode.
  bool arc_matched(NodeId w, NodeId v) const;

  /// E' as flattened id pairs, sorted lexicographically.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> flattened_arcs() const;

 private:
  Network original_;
  Mode mode_;
  std::uint32_t f_;
  std::uint32_t ell_;
  std::optional<Partition> partition_;
  std::vector<bool> arc_intra_;  // by arc index; empty for strong modes
  std::size_t intra_arcs_ = 0;
};

ReinforcedNetwork build_strong(Network net, std::uint32_t f, FaultKind model);
ReinforcedNetwork build_partitioned(Network net, std::uint32_t f, Partition part, FaultKind model);

/// Cost metrics nu = |V'|/|V| and eta = |E'|/|E| (eta is unset when the base
/// network has no arcs). eps_hat is reported for partitioned modes.
struct Metrics {
  std::size_t v_count = 0;
  std::size_t e_count = 0;
  std::size_t vprime_count = 0;
  std::size_t eprime_count = 0;
  double nu = 0.0;
  std::optional<double> eta;
  std::optional<double> eps_hat;
};
Metrics metrics(const ReinforcedNetwork& rn);

/// Reinforced-network JSON export: original graph, mode, f, partition (or
/// null) and the flattened arc list, deterministically ordered.
std::string reinforced_to_json(const ReinforcedNetwork& rn);
ReinforcedNetwork parse_reinforced_json(const std::string& text,
                                        const std::string& origin = "<string>");
ReinforcedNetwork load_reinforced(const std::string& path);
void save_reinforced(const ReinforcedNetwork& rn, const std::string& path);

}  // namespace reinforce
