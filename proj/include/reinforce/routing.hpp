#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reinforce/graph.hpp"

namespace reinforce {

/// Opaque message contents; equality is exact byte equality.
using Payload = std::string;

/// Canonical scheme-defined state snapshot; equality is exact byte equality,
/// so schemes must serialize deterministically (sorted queues etc.).
using NodeState = std::string;

using Round = std::uint32_t;

/// One environment event: a payload handed to a node, optionally with a
/// destination (used by packet-routing schemes).
struct EnvInput {
  Payload payload;
  std::optional<NodeId> dest;
  bool operator==(const EnvInput&) const = default;
};

/// Finite-horizon schedule of environment inputs, keyed by (round, node).
class EnvSchedule {
 public:
  EnvSchedule() = default;
  explicit EnvSchedule(Round horizon) : horizon_(horizon) {}

  Round horizon() const { return horizon_; }
  void set_horizon(Round t) { horizon_ = t; }
  void inject(Round r, NodeId v, Payload payload, std::optional<NodeId> dest = std::nullopt);
  const std::vector<EnvInput>& at(Round r, NodeId v) const;

  /// JSON: {"horizon": T, "injections": [{"round": r, "node": v,
  /// "payload": <string>, "dest": <int|null>}, ...]}.
  static EnvSchedule parse_json(const std::string& text, const std::string& origin = "<string>");
  std::string to_json() const;
  static EnvSchedule load(const std::string& path);
  void save(const std::string& path) const;

 private:
  Round horizon_ = 0;
  std::map<std::pair<Round, NodeId>, std::vector<EnvInput>> injections_;
};

/// What the node receives this round, one slot per in-neighbor of the
/// original graph; nullopt means no message arrived on that arc.
using Inbox = std::map<NodeId, std::optional<Payload>>;

/// What the node transmits this round, keyed by out-neighbor. An absent
/// out-neighbor means the algorithm sends nothing on that arc (distinct from
/// the wire-level blank marker the partitioned-omission engine adds).
using Outbox = std::map<NodeId, Payload>;

struct StepResult {
  NodeState state;
  Outbox outbox;
};

/// The pluggable synchronous scheduling-algorithm contract. Implementations
/// must be pure: the result of init/step depends only on the arguments (the
/// seed provides the node's randomness stream, shared by all copies of the
/// node). Instances are stateless and safe to use from concurrent trials.
class SchedulingAlgorithm {
 public:
  virtual ~SchedulingAlgorithm() = default;
  virtual std::string name() const = 0;
  virtual NodeState init(NodeId v, const Network& net, std::uint64_t seed) const = 0;
  virtual StepResult step(const NodeState& state, NodeId v, const Network& net, Round round,
                          const std::vector<EnvInput>& env, const Inbox& inbox) const = 0;
};

/// Single-message relay along a path: the payload injected at node 0 in round
/// 0 reaches node n-1 after round n-1. Requires a path network.
std::unique_ptr<SchedulingAlgorithm> pipeline_scheme();

/// Store-and-forward packet routing on a grid/torus: packets correct their
/// coordinates dimension by dimension (dimension 0 first), one packet per arc
/// per round, FIFO queues, unbounded.
std::unique_ptr<SchedulingAlgorithm> dimension_order_scheme(const GridSpec& spec);

/// Every node retransmits the maximum payload seen so far (numeric order for
/// numeric payloads) on all out-arcs each round.
std::unique_ptr<SchedulingAlgorithm> flooding_scheme();

/// Factory by name: "pipeline", "dimension-order" (needs a grid spec),
/// "flooding".
std::unique_ptr<SchedulingAlgorithm> make_scheme(const std::string& name,
                                                 const std::optional<GridSpec>& grid = std::nullopt);

// State inspection helpers for tests and trace tooling.
std::optional<Payload> pipeline_held(const NodeState& state);
std::optional<Payload> flooding_value(const NodeState& state);
struct DeliveredPacket {
  Payload payload;
  NodeId dest;
  Round round;
  bool operator==(const DeliveredPacket&) const = default;
};
std::vector<DeliveredPacket> dimension_order_delivered(const NodeState& state);

}  // namespace reinforce
