#include "reinforce/fault_sim.hpp"

#include <algorithm>
#include <map>

#include "reinforce/rng.hpp"

namespace reinforce {

std::vector<std::uint32_t> FaultSet::flat_ids() const {
  std::vector<std::uint32_t> out;
  out.reserve(count_);
  for (std::uint32_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

FaultSet sample_faults(const ReinforcedNetwork& rn, const FaultModel& model, std::uint64_t seed) {
  if (model.p < 0.0 || model.p > 1.0) throw InvalidArgument("fault probability must be in [0,1]");
  FaultSet faults(rn.vprime_count());
  for (std::uint32_t flat = 0; flat < rn.vprime_count(); ++flat) {
    if (rng::uniform01(rng::mix(seed, rng::kFaultStream, flat)) < model.p) faults.mark(flat);
  }
  return faults;
}

namespace {

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

class SilentAdversary final : public Adversary {
 public:
  std::string name() const override { return "silent"; }
  FaultKind kind() const override { return FaultKind::Om; }
  void corrupt(const AdversaryContext&, std::span<const std::uint32_t>,
               std::vector<std::optional<WireMsg>>& slots) override {
    for (auto& s : slots) s.reset();
  }
};

class CoinOmitAdversary final : public Adversary {
 public:
  explicit CoinOmitAdversary(double q) : q_(q) {
    if (q < 0.0 || q > 1.0) throw InvalidArgument("coin-omit probability must be in [0,1]");
  }
  std::string name() const override { return "coin-omit"; }
  FaultKind kind() const override { return FaultKind::Om; }
  void corrupt(const AdversaryContext& ctx, std::span<const std::uint32_t> receivers,
               std::vector<std::optional<WireMsg>>& slots) override {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::uint64_t h =
          rng::mix(ctx.trial_seed, rng::kAdversaryStream, ctx.self_flat, ctx.round, receivers[i]);
      if (rng::uniform01(h) < q_) slots[i].reset();
    }
  }

 private:
  double q_;
};

class RandomBytesAdversary final : public Adversary {
 public:
  std::string name() const override { return "random-bytes"; }
  FaultKind kind() const override { return FaultKind::Byz; }
  void corrupt(const AdversaryContext& ctx, std::span<const std::uint32_t>,
               std::vector<std::optional<WireMsg>>& slots) override {
    // One garbage payload per round, broadcast on every out-arc.
    Payload garbage =
        "rb-" + hex16(rng::mix(ctx.trial_seed, rng::kAdversaryStream, ctx.self_flat, ctx.round));
    for (auto& s : slots) s = WireMsg{false, garbage};
  }
};

class EquivocateAdversary final : public Adversary {
 public:
  std::string name() const override { return "equivocate"; }
  FaultKind kind() const override { return FaultKind::Byz; }
  void corrupt(const AdversaryContext& ctx, std::span<const std::uint32_t> receivers,
               std::vector<std::optional<WireMsg>>& slots) override {
    // A different payload per receiver; the receiver id in the payload makes
    // the split-brain unconditional.
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::uint64_t h = rng::mix(ctx.trial_seed, rng::kAdversaryStream, ctx.self_flat, ctx.round,
                                 receivers[i], 0xd1ffull);
      slots[i] = WireMsg{false, "eq" + std::to_string(receivers[i]) + "-" + hex16(h)};
    }
  }
};

class ReplayAdversary final : public Adversary {
 public:
  std::string name() const override { return "replay"; }
  FaultKind kind() const override { return FaultKind::Byz; }
  void corrupt(const AdversaryContext& ctx, std::span<const std::uint32_t> receivers,
               std::vector<std::optional<WireMsg>>& slots) override {
    auto& prev = prev_[ctx.self_flat];
    std::map<std::uint32_t, WireMsg> next;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i]) next.emplace(receivers[i], *slots[i]);
      auto it = prev.find(receivers[i]);
      if (it != prev.end()) {
        slots[i] = it->second;
      } else {
        slots[i].reset();
      }
    }
    prev_[ctx.self_flat] = std::move(next);
  }

 private:
  std::map<std::uint32_t, std::map<std::uint32_t, WireMsg>> prev_;
};

}  // namespace

std::unique_ptr<Adversary> make_adversary(const std::string& name, double omit_q) {
  if (name == "silent") return std::make_unique<SilentAdversary>();
  if (name == "coin-omit") return std::make_unique<CoinOmitAdversary>(omit_q);
  if (name == "random-bytes") return std::make_unique<RandomBytesAdversary>();
  if (name == "equivocate") return std::make_unique<EquivocateAdversary>();
  if (name == "replay") return std::make_unique<ReplayAdversary>();
  throw InvalidArgument("unknown adversary \"" + name + "\"");
}

std::vector<std::string> adversary_names() {
  return {"silent", "coin-omit", "random-bytes", "equivocate", "replay"};
}

bool adversary_compatible(const std::string& name, FaultKind mode_kind) {
  if (mode_kind == FaultKind::Byz) return true;  // omission behavior is a special case
  return name == "silent" || name == "coin-omit";
}

const char* to_string(DecodeEvent e) {
  switch (e) {
    case DecodeEvent::NoMajority: return "no-majority";
    case DecodeEvent::MissingInput: return "missing-input";
    case DecodeEvent::ConflictingOmMessages: return "conflicting-om-messages";
  }
  return "?";
}

const char* to_string(ViolationReason r) {
  switch (r) {
    case ViolationReason::NoMajority: return "no-majority";
    case ViolationReason::NoCopyCorrect: return "no-copy-correct";
    case ViolationReason::ConflictingOmMessages: return "conflicting-om-messages";
    case ViolationReason::MissingInput: return "missing-input";
  }
  return "?";
}

namespace {

std::uint64_t scheme_seed(std::uint64_t master_seed, NodeId v) {
  // Keyed by (master seed, original node) only: every copy of a node draws
  // the identical stream, which realizes the shared-randomness assumption.
  return rng::mix(master_seed, rng::kSchemeStream, v);
}

void validate_outbox(const Network& net, NodeId v, const Outbox& outbox,
                     const std::string& scheme_name) {
  auto out = net.out_neighbors(v);
  for (const auto& [w, payload] : outbox) {
    (void)payload;
    if (std::find(out.begin(), out.end(), w) == out.end()) {
      throw ContractViolation("scheme \"" + scheme_name + "\" emitted to non-neighbor " +
                              std::to_string(w) + " from node " + std::to_string(v));
    }
  }
}

// Per-node in-arc list (in-neighbor, arc index), ascending by neighbor.
std::vector<std::vector<std::pair<NodeId, std::size_t>>> in_arcs_by_node(const Network& net) {
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> out(net.node_count());
  for (NodeId v = 0; v < net.node_count(); ++v) {
    for (NodeId w : net.in_neighbors(v)) {
      out[v].emplace_back(w, net.arc_index(w, v));
    }
  }
  return out;
}

}  // namespace

ReferenceTrace run_reference(const Network& net, const SchedulingAlgorithm& scheme,
                             const EnvSchedule& env, std::uint64_t master_seed, Round horizon) {
  const NodeId n = net.node_count();
  ReferenceTrace trace;
  trace.horizon = horizon;

  std::vector<NodeState> states(n);
  for (NodeId v = 0; v < n; ++v) states[v] = scheme.init(v, net, scheme_seed(master_seed, v));
  trace.states.push_back(states);

  auto in_arcs = in_arcs_by_node(net);
  std::vector<std::optional<Payload>> wire(net.arc_count());

  for (Round r = 0; r < horizon; ++r) {
    std::vector<std::optional<Payload>> next_wire(net.arc_count());
    std::vector<NodeState> next_states(n);
    for (NodeId v = 0; v < n; ++v) {
      Inbox inbox;
      for (const auto& [w, arc] : in_arcs[v]) inbox[w] = r == 0 ? std::nullopt : wire[arc];
      StepResult res = scheme.step(states[v], v, net, r, env.at(r, v), inbox);
      validate_outbox(net, v, res.outbox, scheme.name());
      next_states[v] = std::move(res.state);
      for (const auto& [w, payload] : res.outbox) {
        next_wire[net.arc_index(v, w)] = payload;
      }
    }
    states = std::move(next_states);
    wire = std::move(next_wire);
    trace.states.push_back(states);
    trace.sent.push_back(wire);
  }
  return trace;
}

namespace {

// Messages delivered to one copy this round, in ascending sender order.
using Arrivals = std::vector<std::pair<std::uint32_t, WireMsg>>;

struct Engine {
  const ReinforcedNetwork& rn;
  const SchedulingAlgorithm& scheme;
  const EnvSchedule& env;
  std::uint64_t master_seed;
  const FaultSet& faults;
  Adversary& adversary;
  Round horizon;
  std::uint64_t trial_seed;
  bool record_groups;

  const Network& net = rn.original();
  std::uint32_t ell = rn.ell();
  std::size_t vprime = rn.vprime_count();
  bool partitioned_om = rn.mode() == Mode::PartitionedOm;
  bool byz_decode = fault_kind(rn.mode()) == FaultKind::Byz;

  SimTrace trace = SimTrace{rn.mode(), rn.f(), rn.ell(), horizon, faults, {}, {}, {}, {}};
  std::vector<NodeState> states;
  std::vector<std::uint8_t> know;
  std::vector<Arrivals> incoming, incoming_next;

  // Scratch reused across copies.
  std::vector<std::uint32_t> send_receivers;
  std::vector<std::optional<WireMsg>> send_slots;

  SimTrace run() {
    states.resize(vprime);
    know.assign(vprime, 1);
    incoming.assign(vprime, {});
    incoming_next.assign(vprime, {});
    for (std::uint32_t flat = 0; flat < vprime; ++flat) {
      NodeId v = rn.from_flat(flat).base;
      states[flat] = scheme.init(v, net, scheme_seed(master_seed, v));
    }
    trace.states.push_back(states);
    trace.know.push_back(know);

    for (Round r = 0; r < horizon; ++r) {
      for (auto& bucket : incoming_next) bucket.clear();
      for (std::uint32_t flat = 0; flat < vprime; ++flat) step_copy(r, flat);
      std::swap(incoming, incoming_next);
      trace.states.push_back(states);
      trace.know.push_back(know);
    }
    return std::move(trace);
  }

  void step_copy(Round r, std::uint32_t flat) {
    const CopyId self = rn.from_flat(flat);
    const NodeId v = self.base;

    if (partitioned_om && !know[flat]) return;  // dropped out: no updates, no sends

    // Decode one input per original in-neighbor.
    Inbox inbox;
    bool dropped = false;
    for (NodeId w : net.in_neighbors(v)) {
      std::optional<Payload> decoded;
      if (byz_decode) {
        decoded = decode_majority(r, flat, self, w);
      } else {
        decoded = decode_any(r, flat, self, w, dropped);
        if (dropped) break;
      }
      inbox[w] = std::move(decoded);
    }
    if (dropped) {
      know[flat] = 0;
      return;
    }

    StepResult res = scheme.step(states[flat], v, net, r, env.at(r, v), inbox);
    validate_outbox(net, v, res.outbox, scheme.name());
    states[flat] = std::move(res.state);

    // Map the outbox onto reinforced arcs.
    send_receivers.clear();
    send_slots.clear();
    for (NodeId w : net.out_neighbors(v)) {
      auto it = res.outbox.find(w);
      std::optional<WireMsg> msg;
      if (it != res.outbox.end()) {
        msg = WireMsg{false, it->second};
      } else if (partitioned_om) {
        msg = WireMsg{true, {}};  // the explicit "nothing scheduled" marker
      }
      if (rn.arc_matched(v, w)) {
        send_receivers.push_back(rn.flat_id({w, self.copy}));
        send_slots.push_back(msg);
      } else {
        for (std::uint32_t j = 1; j <= ell; ++j) {
          send_receivers.push_back(rn.flat_id({w, j}));
          send_slots.push_back(msg);
        }
      }
    }

    if (faults.faulty(flat) && !send_slots.empty()) {
      std::vector<std::optional<WireMsg>> intended;
      bool om_mode = !byz_decode;
      if (om_mode) intended = send_slots;
      adversary.corrupt(AdversaryContext{trial_seed, r, flat}, send_receivers, send_slots);
      if (send_slots.size() != send_receivers.size()) {
        throw ContractViolation("adversary \"" + adversary.name() + "\" resized the outbox");
      }
      if (om_mode) {
        for (std::size_t i = 0; i < send_slots.size(); ++i) {
          if (send_slots[i] && !(intended[i] && *send_slots[i] == *intended[i])) {
            throw ContractViolation("omission adversary \"" + adversary.name() +
                                    "\" altered or forged a message");
          }
        }
      }
    }

    for (std::size_t i = 0; i < send_slots.size(); ++i) {
      if (send_slots[i]) incoming_next[send_receivers[i]].emplace_back(flat, *send_slots[i]);
    }
  }

  // Arrivals from copies of w, ascending sender order.
  Arrivals group_arrivals(std::uint32_t flat, NodeId w) const {
    Arrivals out;
    for (const auto& entry : incoming[flat]) {
      if (entry.first / ell == w) out.push_back(entry);
    }
    return out;
  }

  void dump_group(Round r, std::uint32_t flat, NodeId w, const Arrivals& arrivals,
                  const std::optional<Payload>& decoded, bool failed) {
    if (!record_groups) return;
    trace.group_dumps.push_back(GroupDump{r, flat, w, arrivals, decoded, failed});
  }

  // Byzantine decode: each copy of w contributes one outcome (its message, or
  // silence); an outcome held by a strict majority of the group wins. With no
  // majority the copy is recorded as diverged and continues on "no message".
  std::optional<Payload> decode_majority(Round r, std::uint32_t flat, CopyId self, NodeId w) {
    Arrivals arrivals = group_arrivals(flat, w);
    std::size_t group_size = rn.arc_matched(w, self.base) ? 1 : ell;
    std::size_t threshold = group_size / 2 + 1;
    std::size_t silent = group_size - arrivals.size();

    std::optional<Payload> decoded;
    bool failed = false;
    if (silent >= threshold) {
      // Majority silence decodes as "no message".
    } else {
      // Count identical messages.
      const WireMsg* winner = nullptr;
      for (std::size_t i = 0; i < arrivals.size() && !winner; ++i) {
        std::size_t count = 1;
        for (std::size_t j = 0; j < arrivals.size(); ++j) {
          if (j != i && arrivals[j].second == arrivals[i].second) ++count;
        }
        if (count >= threshold) winner = &arrivals[i].second;
      }
      if (winner) {
        if (!winner->blank) decoded = winner->payload;
      } else {
        failed = true;
        trace.decode_failures.push_back(DecodeRecord{r, flat, w, DecodeEvent::NoMajority});
      }
    }
    dump_group(r, flat, w, arrivals, decoded, failed);
    return decoded;
  }

  // Omission decode: accept the message any copy of w delivered; distinct
  // messages in one group are a contract breach and get recorded. In the
  // partitioned mode an empty group (after round 0) costs the know flag.
  std::optional<Payload> decode_any(Round r, std::uint32_t flat, CopyId, NodeId w, bool& dropped) {
    Arrivals arrivals = group_arrivals(flat, w);
    std::optional<Payload> decoded;
    bool failed = false;
    if (arrivals.empty()) {
      if (partitioned_om && r > 0) {
        dropped = true;
        failed = true;
        trace.decode_failures.push_back(DecodeRecord{r, flat, w, DecodeEvent::MissingInput});
      }
    } else {
      const WireMsg& first = arrivals.front().second;
      if (!first.blank) decoded = first.payload;
      for (std::size_t i = 1; i < arrivals.size(); ++i) {
        if (!(arrivals[i].second == first)) {
          trace.decode_failures.push_back(
              DecodeRecord{r, flat, w, DecodeEvent::ConflictingOmMessages});
          break;
        }
      }
    }
    dump_group(r, flat, w, arrivals, decoded, failed);
    return decoded;
  }
};

}  // namespace

SimTrace run_simulation(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                        const EnvSchedule& env, std::uint64_t master_seed, const FaultSet& faults,
                        Adversary& adversary, Round horizon, std::uint64_t trial_seed,
                        bool record_groups) {
  if (faults.size() != rn.vprime_count()) {
    throw InvalidArgument("fault set size does not match the reinforced network");
  }
  if (fault_kind(rn.mode()) == FaultKind::Om && adversary.kind() != FaultKind::Om) {
    throw InvalidArgument("adversary \"" + adversary.name() +
                          "\" is not valid under an omission-fault mode");
  }
  Engine engine{rn, scheme, env, master_seed, faults, adversary, horizon, trial_seed, record_groups};
  return engine.run();
}

bool precondition_holds(const ReinforcedNetwork& rn, const FaultSet& faults) {
  if (faults.size() != rn.vprime_count()) {
    throw InvalidArgument("fault set size does not match the reinforced network");
  }
  const std::uint32_t ell = rn.ell();
  if (!is_partitioned(rn.mode())) {
    // At most f faulty copies of any node.
    for (NodeId v = 0; v < rn.original().node_count(); ++v) {
      std::uint32_t cnt = 0;
      for (std::uint32_t i = 1; i <= ell; ++i) {
        if (faults.faulty(rn.flat_id({v, i}))) ++cnt;
      }
      if (cnt > rn.f()) return false;
    }
    return true;
  }
  // Per region, enough copy indices whose whole slice is clean: one for the
  // omission mode, f+1 for the Byzantine mode.
  const std::uint32_t needed = rn.mode() == Mode::PartitionedOm ? 1 : rn.f() + 1;
  for (const auto& region : rn.partition()->regions()) {
    std::uint32_t clean = 0;
    for (std::uint32_t i = 1; i <= ell; ++i) {
      bool ok = true;
      for (NodeId v : region) {
        if (faults.faulty(rn.flat_id({v, i}))) {
          ok = false;
          break;
        }
      }
      if (ok) ++clean;
    }
    if (clean < needed) return false;
  }
  return true;
}

Verdict check(const SimTrace& sim, const ReferenceTrace& ref, const ReinforcedNetwork& rn) {
  if (sim.horizon != ref.horizon) throw InvalidArgument("trace horizons do not match");
  const std::uint32_t ell = rn.ell();
  const NodeId n = rn.original().node_count();
  const bool byz = fault_kind(rn.mode()) == FaultKind::Byz;
  const std::uint32_t majority = ell / 2 + 1;

  Verdict verdict;
  verdict.ok = true;
  bool strong_part = true;

  for (Round s = 0; s <= sim.horizon; ++s) {
    for (NodeId v = 0; v < n; ++v) {
      const NodeState& want = ref.states[s][v];
      std::uint32_t correct = 0, correct_nonfaulty = 0, nonfaulty = 0;
      for (std::uint32_t i = 1; i <= ell; ++i) {
        std::uint32_t flat = rn.flat_id({v, i});
        bool is_correct = sim.states[s][flat] == want;
        if (is_correct) ++correct;
        if (!sim.faults.faulty(flat)) {
          ++nonfaulty;
          if (is_correct) ++correct_nonfaulty;
        }
      }
      bool ok_v = byz ? correct >= majority : correct >= 1;
      bool strong_v = byz ? correct_nonfaulty == nonfaulty : correct == ell;
      strong_part = strong_part && strong_v;
      if (!ok_v && verdict.ok) {
        verdict.ok = false;
        // Attribute the most recent decode failure at this node, if any.
        const DecodeRecord* best = nullptr;
        for (const auto& rec : sim.decode_failures) {
          if (rec.receiver_flat / ell == v && rec.round < s) {
            if (!best || rec.round > best->round) best = &rec;
          }
        }
        ViolationReason reason;
        if (best) {
          switch (best->event) {
            case DecodeEvent::NoMajority: reason = ViolationReason::NoMajority; break;
            case DecodeEvent::MissingInput: reason = ViolationReason::MissingInput; break;
            case DecodeEvent::ConflictingOmMessages:
              reason = ViolationReason::ConflictingOmMessages;
              break;
            default: reason = ViolationReason::NoMajority; break;
          }
        } else {
          reason = byz ? ViolationReason::NoMajority : ViolationReason::NoCopyCorrect;
        }
        verdict.first_violation = Violation{s, v, reason};
      }
    }
  }
  verdict.strong_ok = verdict.ok && strong_part;
  return verdict;
}

}  // namespace reinforce
