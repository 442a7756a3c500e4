#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reinforce/reinforcement.hpp"
#include "reinforce/routing.hpp"

namespace reinforce {

struct FaultModel {
  FaultKind kind = FaultKind::Om;
  double p = 0.0;
};

/// The sampled set F' of faulty copies, indexed by flattened copy id.
class FaultSet {
 public:
  explicit FaultSet(std::size_t vprime) : bits_(vprime, false) {}

  std::size_t size() const { return bits_.size(); }
  std::size_t count() const { return count_; }
  bool faulty(std::uint32_t flat) const { return bits_[flat]; }
  void mark(std::uint32_t flat) {
    if (!bits_[flat]) {
      bits_[flat] = true;
      ++count_;
    }
  }
  std::vector<std::uint32_t> flat_ids() const;

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

/// Samples each copy into F' with independent probability p, reproducibly
/// from the seed.
FaultSet sample_faults(const ReinforcedNetwork& rn, const FaultModel& model, std::uint64_t seed);

/// A message on a reinforced-network arc. `blank` is the wire marker meaning
/// "the simulated node deliberately sends nothing here"; only the
/// partitioned-omission protocol puts it on the wire.
struct WireMsg {
  bool blank = false;
  Payload payload;
  bool operator==(const WireMsg&) const = default;
};

struct AdversaryContext {
  std::uint64_t trial_seed;
  Round round;
  std::uint32_t self_flat;
};

/// Behavior of a faulty copy: rewrites intended per-arc sends into actual
/// sends each round. Omission-kind adversaries may only erase slots; the
/// engine enforces this in omission modes. Instances may keep per-trial
/// state (e.g. replay); create a fresh one per trial.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string name() const = 0;
  virtual FaultKind kind() const = 0;
  virtual void corrupt(const AdversaryContext& ctx, std::span<const std::uint32_t> receivers,
                       std::vector<std::optional<WireMsg>>& slots) = 0;
};

/// Built-in strategies: "silent" (drop all; omission-kind), "coin-omit"
/// (drop each outbound independently with probability q; omission-kind),
/// "random-bytes" (one random payload per round, broadcast), "equivocate"
/// (a different payload per receiver), "replay" (resend the previous round's
/// intended sends). The last three are Byzantine-kind.
std::unique_ptr<Adversary> make_adversary(const std::string& name, double omit_q = 0.5);
std::vector<std::string> adversary_names();
bool adversary_compatible(const std::string& name, FaultKind mode_kind);

/// Fault-free execution of the scheme on the original network.
/// states[r][v] is the state after r executed rounds (states[0] holds the
/// initial states); sent[r][arc] is what round r put on each arc.
struct ReferenceTrace {
  Round horizon = 0;
  std::vector<std::vector<NodeState>> states;
  std::vector<std::vector<std::optional<Payload>>> sent;
};

ReferenceTrace run_reference(const Network& net, const SchedulingAlgorithm& scheme,
                             const EnvSchedule& env, std::uint64_t master_seed, Round horizon);

enum class DecodeEvent { NoMajority, MissingInput, ConflictingOmMessages };
const char* to_string(DecodeEvent e);

struct DecodeRecord {
  Round round;  // the executed round the decode happened in
  std::uint32_t receiver_flat;
  NodeId neighbor;
  DecodeEvent event;
};

/// Full dump of one decode group, recorded only when requested.
struct GroupDump {
  Round round;
  std::uint32_t receiver_flat;
  NodeId neighbor;
  std::vector<std::pair<std::uint32_t, WireMsg>> received;  // (sender flat, message)
  std::optional<Payload> decoded;
  bool failed = false;
};

/// Per-round per-copy snapshots of a simulated execution, indexed like the
/// reference trace. know[r][c] tracks the partitioned-omission know flag
/// (always 1 in the other modes).
struct SimTrace {
  Mode mode = Mode::StrongOm;
  std::uint32_t f = 0;
  std::uint32_t ell = 1;
  Round horizon = 0;
  FaultSet faults{0};
  std::vector<std::vector<NodeState>> states;
  std::vector<std::vector<std::uint8_t>> know;
  std::vector<DecodeRecord> decode_failures;
  std::vector<GroupDump> group_dumps;
};

/// Runs the reinforced execution A' for the network's mode:
///  - StrongByz: per in-neighbor group, decode the outcome (payload or
///    silence) sent by at least f+1 of the copies; a copy with no such
///    majority keeps running on a "no message" fallback and the failure is
///    recorded.
///  - StrongOm: decode the unique payload received from any copy; distinct
///    payloads in one group are recorded as ConflictingOmMessages.
///  - PartitionedOm: the know-flag protocol; copies with know lost send
///    nothing and stop updating state.
///  - PartitionedByz: strict majority over each wired group (singleton
///    groups on matched arcs accept whatever the single sender did).
/// Faulty copies' outboxes pass through the adversary each round.
SimTrace run_simulation(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                        const EnvSchedule& env, std::uint64_t master_seed, const FaultSet& faults,
                        Adversary& adversary, Round horizon, std::uint64_t trial_seed,
                        bool record_groups = false);

enum class ViolationReason { NoMajority, NoCopyCorrect, ConflictingOmMessages, MissingInput };
const char* to_string(ViolationReason r);

struct Violation {
  Round round;  // trace snapshot index (state after `round` executed rounds)
  NodeId node;
  ViolationReason reason;
};

/// ok: the mode's simulation relation holds every round (Byzantine modes: a
/// strict majority of all ell copies has the reference state; omission
/// modes: at least one copy does). strong_ok additionally requires every
/// non-faulty copy (Byzantine) or every copy (omission) to be correct;
/// strong_ok implies ok.
struct Verdict {
  bool ok = false;
  bool strong_ok = false;
  std::optional<Violation> first_violation;
};

Verdict check(const SimTrace& sim, const ReferenceTrace& ref, const ReinforcedNetwork& rn);

/// The mode's sufficient structural condition on F': per-node fault caps for
/// the strong modes, per-region clean copy-index counts for the partitioned
/// modes.
bool precondition_holds(const ReinforcedNetwork& rn, const FaultSet& faults);

}  // namespace reinforce
