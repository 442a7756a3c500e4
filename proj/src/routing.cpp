#include "reinforce/routing.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include <nlohmann/json.hpp>

namespace reinforce {

using nlohmann::json;

void EnvSchedule::inject(Round r, NodeId v, Payload payload, std::optional<NodeId> dest) {
  injections_[{r, v}].push_back(EnvInput{std::move(payload), dest});
  if (r >= horizon_) horizon_ = r + 1;
}

const std::vector<EnvInput>& EnvSchedule::at(Round r, NodeId v) const {
  static const std::vector<EnvInput> kEmpty;
  auto it = injections_.find({r, v});
  return it == injections_.end() ? kEmpty : it->second;
}

EnvSchedule EnvSchedule::parse_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("horizon") || !j["horizon"].is_number_unsigned()) {
    throw ParseError(origin + ": expected an object with an unsigned \"horizon\"");
  }
  EnvSchedule env(j["horizon"].get<Round>());
  if (j.contains("injections")) {
    if (!j["injections"].is_array()) throw ParseError(origin + ": \"injections\" must be an array");
    std::size_t idx = 0;
    for (const auto& e : j["injections"]) {
      std::string where = origin + ": injections[" + std::to_string(idx) + "]";
      if (!e.is_object() || !e.contains("round") || !e.contains("node") || !e.contains("payload")) {
        throw ParseError(where + ": expected {round, node, payload[, dest]}");
      }
      if (!e["round"].is_number_unsigned() || !e["node"].is_number_unsigned() ||
          !e["payload"].is_string()) {
        throw ParseError(where + ": bad field types");
      }
      std::optional<NodeId> dest;
      if (e.contains("dest") && !e["dest"].is_null()) {
        if (!e["dest"].is_number_unsigned()) throw ParseError(where + ": \"dest\" must be an integer or null");
        dest = e["dest"].get<NodeId>();
      }
      env.inject(e["round"].get<Round>(), e["node"].get<NodeId>(),
                 e["payload"].get<std::string>(), dest);
      ++idx;
    }
  }
  return env;
}

std::string EnvSchedule::to_json() const {
  json j;
  j["horizon"] = horizon_;
  json inj = json::array();
  for (const auto& [key, inputs] : injections_) {
    for (const auto& input : inputs) {
      json e;
      e["round"] = key.first;
      e["node"] = key.second;
      e["payload"] = input.payload;
      e["dest"] = input.dest ? json(*input.dest) : json(nullptr);
      inj.push_back(std::move(e));
    }
  }
  j["injections"] = std::move(inj);
  return j.dump() + "\n";
}

EnvSchedule EnvSchedule::load(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

void EnvSchedule::save(const std::string& path) const {
  write_text_file(path, to_json());
}

namespace {

// Length-prefixed string encoding so payload bytes never collide with the
// surrounding state syntax.
std::string enc(const std::string& s) {
  return std::to_string(s.size()) + ":" + s;
}

std::optional<std::string> dec(const std::string& text, std::size_t& pos) {
  std::size_t colon = text.find(':', pos);
  if (colon == std::string::npos) return std::nullopt;
  std::size_t len = 0;
  auto res = std::from_chars(text.data() + pos, text.data() + colon, len);
  if (res.ec != std::errc() || res.ptr != text.data() + colon) return std::nullopt;
  if (colon + 1 + len > text.size()) return std::nullopt;
  std::string out = text.substr(colon + 1, len);
  pos = colon + 1 + len;
  return out;
}

std::optional<std::uint64_t> parse_uint(const std::string& text, std::size_t& pos, char terminator) {
  std::size_t end = text.find(terminator, pos);
  if (end == std::string::npos) return std::nullopt;
  std::uint64_t value = 0;
  auto res = std::from_chars(text.data() + pos, text.data() + end, value);
  if (res.ec != std::errc() || res.ptr != text.data() + end) return std::nullopt;
  pos = end + 1;
  return value;
}

void require_path(const Network& net) {
  if (net.node_count() < 2 || net.arc_count() != net.node_count() - 1) {
    throw ContractViolation("pipeline scheme requires a path network");
  }
  for (NodeId v = 0; v + 1 < net.node_count(); ++v) {
    if (net.arc_index(v, v + 1) == Network::npos) {
      throw ContractViolation("pipeline scheme requires a path network");
    }
  }
}

class PipelineScheme final : public SchedulingAlgorithm {
 public:
  std::string name() const override { return "pipeline"; }

  NodeState init(NodeId, const Network& net, std::uint64_t) const override {
    require_path(net);
    return "-";
  }

  StepResult step(const NodeState& state, NodeId v, const Network& net, Round,
                  const std::vector<EnvInput>& env, const Inbox& inbox) const override {
    std::optional<Payload> held;
    if (state.size() >= 1 && state[0] == 'H') {
      std::size_t pos = 1;
      held = dec(state, pos);
    }
    StepResult out;
    if (!held) {
      // Environment input takes priority over the wire.
      std::optional<Payload> arrived;
      if (!env.empty()) {
        arrived = env.front().payload;
      } else if (v > 0) {
        auto it = inbox.find(v - 1);
        if (it != inbox.end() && it->second) arrived = *it->second;
      }
      if (arrived) {
        held = arrived;
        if (v + 1 < net.node_count()) out.outbox[v + 1] = *arrived;
      }
    }
    out.state = held ? "H" + enc(*held) : "-";
    return out;
  }
};

class FloodingScheme final : public SchedulingAlgorithm {
 public:
  std::string name() const override { return "flooding"; }

  NodeState init(NodeId, const Network&, std::uint64_t) const override { return "-"; }

  StepResult step(const NodeState& state, NodeId v, const Network& net, Round,
                  const std::vector<EnvInput>& env, const Inbox& inbox) const override {
    std::optional<Payload> best;
    if (state.size() >= 1 && state[0] == 'V') {
      std::size_t pos = 1;
      best = dec(state, pos);
    }
    auto consider = [&](const Payload& candidate) {
      if (!best || payload_less(*best, candidate)) best = candidate;
    };
    for (const auto& e : env) consider(e.payload);
    for (const auto& [w, msg] : inbox) {
      (void)w;
      if (msg) consider(*msg);
    }
    StepResult out;
    if (best) {
      out.state = "V" + enc(*best);
      for (NodeId w : net.out_neighbors(v)) out.outbox[w] = *best;
    } else {
      out.state = "-";
    }
    return out;
  }

 private:
  // Numeric payloads compare by value; anything unparseable compares as a
  // plain string above all numerics. Ties break on the raw bytes so the
  // ordering is total and deterministic.
  static bool payload_less(const Payload& a, const Payload& b) {
    auto parse = [](const Payload& s) -> std::optional<long long> {
      if (s.empty() || s.size() > 18) return std::nullopt;
      long long value = 0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), value);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
      return value;
    };
    auto na = parse(a), nb = parse(b);
    if (na && nb) {
      if (*na != *nb) return *na < *nb;
      return a < b;
    }
    if (na != nb) return na.has_value();  // numerics sort below non-numerics
    return a < b;
  }
};

struct Packet {
  Payload payload;
  NodeId dest;
};

class DimensionOrderScheme final : public SchedulingAlgorithm {
 public:
  explicit DimensionOrderScheme(const GridSpec& spec) : spec_(spec), expected_(make_grid(spec)) {}

  std::string name() const override { return "dimension-order"; }

  NodeState init(NodeId, const Network& net, std::uint64_t) const override {
    if (!(net == expected_)) {
      throw ContractViolation("dimension-order scheme requires the grid/torus it was built for");
    }
    return "Q|D";
  }

  StepResult step(const NodeState& state, NodeId v, const Network& net, Round round,
                  const std::vector<EnvInput>& env, const Inbox& inbox) const override {
    std::deque<Packet> queue;
    std::string delivered;
    parse_state(state, queue, delivered);

    for (const auto& e : env) {
      if (!e.dest) throw ContractViolation("dimension-order injections need a destination");
      if (*e.dest < net.node_count()) queue.push_back({e.payload, *e.dest});
    }
    for (const auto& [w, msg] : inbox) {
      (void)w;
      if (!msg) continue;
      if (auto pkt = parse_wire(*msg, net.node_count())) queue.push_back(*pkt);
      // Unparseable wire bytes are dropped.
    }

    StepResult out;
    std::vector<NodeId> used;
    std::deque<Packet> waiting;
    for (Packet& pkt : queue) {
      if (pkt.dest == v) {
        delivered += enc(pkt.payload) + "@" + std::to_string(pkt.dest) + "#" +
                     std::to_string(round) + ";";
        continue;
      }
      NodeId next = next_hop(v, pkt.dest);
      if (std::find(used.begin(), used.end(), next) == used.end()) {
        used.push_back(next);
        out.outbox[next] = enc(pkt.payload) + "@" + std::to_string(pkt.dest);
      } else {
        waiting.push_back(std::move(pkt));
      }
    }

    out.state = "Q";
    for (const Packet& pkt : waiting) {
      out.state += enc(pkt.payload) + "@" + std::to_string(pkt.dest) + ";";
    }
    out.state += "|D" + delivered;
    return out;
  }

 private:
  GridSpec spec_;
  Network expected_;

  NodeId next_hop(NodeId v, NodeId dest) const {
    auto cv = grid_coords(spec_, v);
    auto cd = grid_coords(spec_, dest);
    std::uint64_t stride = 1;
    for (std::uint32_t dim = 0; dim < spec_.d; ++dim) {
      if (cv[dim] != cd[dim]) {
        // Unit step toward the destination; wraparound arcs are never used.
        return cv[dim] < cd[dim] ? static_cast<NodeId>(v + stride)
                                 : static_cast<NodeId>(v - stride);
      }
      stride *= spec_.q;
    }
    return v;
  }

  static std::optional<Packet> parse_wire(const std::string& text, NodeId n) {
    std::size_t pos = 0;
    auto payload = dec(text, pos);
    if (!payload || pos >= text.size() || text[pos] != '@') return std::nullopt;
    ++pos;
    std::uint64_t dest = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + text.size(), dest);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    if (dest >= n) return std::nullopt;
    return Packet{*payload, static_cast<NodeId>(dest)};
  }

  static void parse_state(const NodeState& state, std::deque<Packet>& queue, std::string& delivered) {
    std::size_t bar = state.find("|D");
    if (state.empty() || state[0] != 'Q' || bar == std::string::npos) return;
    std::size_t pos = 1;
    while (pos < bar) {
      auto payload = dec(state, pos);
      if (!payload || pos >= bar || state[pos] != '@') return;
      ++pos;
      auto dest = parse_uint(state, pos, ';');
      if (!dest) return;
      queue.push_back({*payload, static_cast<NodeId>(*dest)});
    }
    delivered = state.substr(bar + 2);
  }
};

}  // namespace

std::unique_ptr<SchedulingAlgorithm> pipeline_scheme() {
  return std::make_unique<PipelineScheme>();
}

std::unique_ptr<SchedulingAlgorithm> dimension_order_scheme(const GridSpec& spec) {
  return std::make_unique<DimensionOrderScheme>(spec);
}

std::unique_ptr<SchedulingAlgorithm> flooding_scheme() {
  return std::make_unique<FloodingScheme>();
}

std::unique_ptr<SchedulingAlgorithm> make_scheme(const std::string& name,
                                                 const std::optional<GridSpec>& grid) {
  if (name == "pipeline") return pipeline_scheme();
  if (name == "flooding") return flooding_scheme();
  if (name == "dimension-order") {
    if (!grid) throw InvalidArgument("dimension-order needs a grid spec");
    return dimension_order_scheme(*grid);
  }
  throw InvalidArgument("unknown scheme \"" + name + "\"");
}

std::optional<Payload> pipeline_held(const NodeState& state) {
  if (state.size() >= 1 && state[0] == 'H') {
    std::size_t pos = 1;
    return dec(state, pos);
  }
  return std::nullopt;
}

std::optional<Payload> flooding_value(const NodeState& state) {
  if (state.size() >= 1 && state[0] == 'V') {
    std::size_t pos = 1;
    return dec(state, pos);
  }
  return std::nullopt;
}

std::vector<DeliveredPacket> dimension_order_delivered(const NodeState& state) {
  std::vector<DeliveredPacket> out;
  std::size_t bar = state.find("|D");
  if (bar == std::string::npos) return out;
  std::size_t pos = bar + 2;
  while (pos < state.size()) {
    auto payload = dec(state, pos);
    if (!payload || pos >= state.size() || state[pos] != '@') break;
    ++pos;
    auto dest = parse_uint(state, pos, '#');
    if (!dest) break;
    auto round = parse_uint(state, pos, ';');
    if (!round) break;
    out.push_back({*payload, static_cast<NodeId>(*dest), static_cast<Round>(*round)});
  }
  return out;
}

}  // namespace reinforce
