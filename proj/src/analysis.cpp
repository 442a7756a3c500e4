#include "reinforce/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "reinforce/rng.hpp"

namespace reinforce {

using nlohmann::json;

void parallel_for(std::uint32_t threads, std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = static_cast<std::uint32_t>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> geometric_p_grid(double lo, double hi, std::uint32_t per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || hi > 1.0) {
    throw InvalidArgument("p grid bounds must satisfy 0 < min <= max <= 1");
  }
  if (per_decade == 0) throw InvalidArgument("per_decade must be >= 1");
  std::vector<double> grid;
  double ratio = std::pow(10.0, 1.0 / per_decade);
  for (double p = lo; p < hi * (1.0 + 1e-12); p *= ratio) grid.push_back(std::min(p, hi));
  if (grid.empty() || std::abs(grid.back() - hi) > 1e-12 * hi) grid.push_back(hi);
  return grid;
}

namespace {

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  json j = parse_json_text(text, origin);
  if (!j.is_object()) throw ParseError(origin + ": expected a JSON object");
  auto require = [&](const char* field) {
    if (!j.contains(field)) throw ParseError(origin + ": missing \"" + std::string(field) + "\"");
    return j[field];
  };

  ExperimentConfig cfg;

  json net = require("network");
  std::string kind = net.value("kind", "");
  if (kind == "path") {
    cfg.net = make_path(net.value("n", NodeId{0}));
  } else if (kind == "grid") {
    GridSpec spec{net.value("q", 2u), net.value("d", 1u), net.value("wrap", false)};
    cfg.net = make_grid(spec);
    cfg.grid = spec;
  } else if (kind == "file") {
    if (!net.contains("path")) throw ParseError(origin + ": network.kind=file needs \"path\"");
    cfg.net = load_network(net["path"].get<std::string>());
  } else {
    throw ParseError(origin + ": network.kind must be path|grid|file");
  }

  cfg.scheme_name = require("scheme").get<std::string>();
  cfg.mode = mode_from_string(require("mode").get<std::string>());
  cfg.f = j.value("f", 1u);

  if (j.contains("env")) {
    const json& env = j["env"];
    if (env.contains("file")) {
      cfg.env = EnvSchedule::load(env["file"].get<std::string>());
    } else {
      cfg.env = EnvSchedule::parse_json(env.dump(), origin + ": env");
    }
  }

  if (is_partitioned(cfg.mode)) {
    json part = require("partition");
    std::string pkind = part.value("kind", "");
    if (pkind == "path") {
      cfg.partition = path_partition(cfg.net.node_count(), part.value("h", 1u));
    } else if (pkind == "grid") {
      if (!cfg.grid) throw ParseError(origin + ": partition.kind=grid needs a generated grid network");
      cfg.partition = hypercube_partition(*cfg.grid, part.value("h", 1u));
    } else if (pkind == "file") {
      if (!part.contains("path")) throw ParseError(origin + ": partition.kind=file needs \"path\"");
      cfg.partition = load_partition(part["path"].get<std::string>(), cfg.net.node_count());
    } else {
      throw ParseError(origin + ": partition.kind must be path|grid|file");
    }
    validate_partition(cfg.net, *cfg.partition);
  }

  cfg.adversary = j.value("adversary", std::string("silent"));
  cfg.adversary_q = j.value("adversary_q", 0.5);
  if (j.contains("p_grid")) {
    const json& pg = j["p_grid"];
    if (pg.is_array()) {
      for (const auto& e : pg) cfg.p_grid.push_back(e.get<double>());
    } else if (pg.is_object()) {
      cfg.p_grid = geometric_p_grid(pg.value("min", 1e-3), pg.value("max", 1e-1),
                                    pg.value("per_decade", 2u));
    } else {
      throw ParseError(origin + ": p_grid must be an array or {min, max, per_decade}");
    }
  }
  for (double p : cfg.p_grid) {
    if (p < 0.0 || p > 1.0) throw ParseError(origin + ": p_grid values must lie in [0,1]");
  }
  cfg.trials = j.value("trials", 1000u);
  cfg.horizon = j.value("horizon", cfg.env.horizon());
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 0u);
  cfg.out = j.value("out", std::string());
  cfg.format = j.value("format", std::string("csv"));
  cfg.trials_out = j.value("trials_out", std::string());
  if (cfg.format != "csv" && cfg.format != "json") {
    throw ParseError(origin + ": format must be csv or json");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path), path);
}

namespace {

ReinforcedNetwork build_from_config(const ExperimentConfig& cfg) {
  if (is_partitioned(cfg.mode)) {
    if (!cfg.partition) throw InvalidArgument("partitioned mode without a partition");
    return ReinforcedNetwork(cfg.net, cfg.mode, cfg.f, cfg.partition);
  }
  return ReinforcedNetwork(cfg.net, cfg.mode, cfg.f);
}

struct TrialSeeds {
  std::uint64_t faults;
  std::uint64_t adversary;
};

TrialSeeds trial_seeds(std::uint64_t master, std::size_t p_index, std::size_t trial) {
  std::uint64_t base = rng::mix(master, rng::kTrialStream, p_index, trial);
  return {rng::mix(base, 0), rng::mix(base, 1)};
}

}  // namespace

std::vector<SweepRow> monte_carlo(const ExperimentConfig& cfg, std::vector<TrialRecord>* records) {
  if (cfg.p_grid.empty()) throw InvalidArgument("sweep needs a non-empty p grid");
  if (cfg.trials == 0) throw InvalidArgument("sweep needs trials >= 1");
  auto scheme = make_scheme(cfg.scheme_name, cfg.grid);
  ReinforcedNetwork rn = build_from_config(cfg);
  ReferenceTrace ref = run_reference(cfg.net, *scheme, cfg.env, cfg.seed, cfg.horizon);

  std::vector<SweepRow> rows;
  rows.reserve(cfg.p_grid.size());
  for (std::size_t pi = 0; pi < cfg.p_grid.size(); ++pi) {
    const double p = cfg.p_grid[pi];
    std::vector<TrialRecord> trial_results(cfg.trials);
    parallel_for(cfg.threads, cfg.trials, [&](std::size_t t) {
      TrialSeeds seeds = trial_seeds(cfg.seed, pi, t);
      FaultSet faults = sample_faults(rn, FaultModel{rn.kind(), p}, seeds.faults);
      auto adversary = make_adversary(cfg.adversary, cfg.adversary_q);
      SimTrace sim = run_simulation(rn, *scheme, cfg.env, cfg.seed, faults, *adversary,
                                    cfg.horizon, seeds.adversary);
      Verdict verdict = check(sim, ref, rn);
      TrialRecord rec;
      rec.trial = static_cast<std::uint32_t>(t);
      rec.p = p;
      rec.precond = precondition_holds(rn, faults);
      rec.ok = verdict.ok;
      rec.strong_ok = verdict.strong_ok;
      rec.violation = verdict.first_violation;
      trial_results[t] = std::move(rec);
    });

    SweepRow row;
    row.p = p;
    row.trials = cfg.trials;
    for (const auto& rec : trial_results) {
      row.precond_hold_count += rec.precond;
      row.ok_count += rec.ok;
      row.strong_ok_count += rec.strong_ok;
    }
    WilsonInterval ci = wilson95(row.ok_count, row.trials);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    rows.push_back(row);
    if (records) {
      records->insert(records->end(), trial_results.begin(), trial_results.end());
    }
  }
  return rows;
}

namespace {

double binom_pmf(std::uint32_t n, std::uint32_t k, double p) {
  double c = 1.0;
  for (std::uint32_t i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double binom_cdf_le(std::uint32_t n, std::uint32_t k, double p) {
  double sum = 0.0;
  for (std::uint32_t j = 0; j <= k && j <= n; ++j) sum += binom_pmf(n, j, p);
  return std::min(sum, 1.0);
}

}  // namespace

double exact_precondition_probability(const ReinforcedNetwork& rn, double p) {
  if (p < 0.0 || p > 1.0) throw InvalidArgument("p must be in [0,1]");
  const std::uint32_t ell = rn.ell();
  if (!is_partitioned(rn.mode())) {
    double per_node = binom_cdf_le(ell, rn.f(), p);
    return std::pow(per_node, rn.original().node_count());
  }
  const std::uint32_t needed = rn.mode() == Mode::PartitionedOm ? 1 : rn.f() + 1;
  double prob = 1.0;
  for (const auto& region : rn.partition()->regions()) {
    // A copy index is clean when its whole slice of the region is non-faulty.
    double clean = std::pow(1.0 - p, static_cast<double>(region.size()));
    double fail_le = binom_cdf_le(ell, needed - 1, clean);  // #clean <= needed-1
    prob *= 1.0 - fail_le;
  }
  return prob;
}

double enumerate_exact(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                       const EnvSchedule& env, std::uint64_t master_seed,
                       const std::string& adversary, double adversary_q, Round horizon, double p) {
  const std::size_t vprime = rn.vprime_count();
  if (vprime > kEnumerationGuard) {
    throw InvalidArgument("enumeration refused: |V'| = " + std::to_string(vprime) + " exceeds " +
                          std::to_string(kEnumerationGuard));
  }
  if (p < 0.0 || p > 1.0) throw InvalidArgument("p must be in [0,1]");
  ReferenceTrace ref = run_reference(rn.original(), scheme, env, master_seed, horizon);

  std::vector<double> pow_p(vprime + 1, 1.0), pow_q(vprime + 1, 1.0);
  for (std::size_t k = 1; k <= vprime; ++k) {
    pow_p[k] = pow_p[k - 1] * p;
    pow_q[k] = pow_q[k - 1] * (1.0 - p);
  }

  double prob = 0.0;
  const std::uint64_t subsets = 1ull << vprime;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    FaultSet faults(vprime);
    for (std::size_t i = 0; i < vprime; ++i) {
      if (mask & (1ull << i)) faults.mark(static_cast<std::uint32_t>(i));
    }
    auto adv = make_adversary(adversary, adversary_q);
    SimTrace sim = run_simulation(rn, scheme, env, master_seed, faults, *adv, horizon, mask);
    if (check(sim, ref, rn).ok) {
      std::size_t k = faults.count();
      prob += pow_p[k] * pow_q[vprime - k];
    }
  }
  return prob;
}

double slope_fit(const std::vector<SlopePoint>& points) {
  if (points.size() < 3) {
    throw InvalidArgument("slope_fit needs at least 3 points, got " +
                          std::to_string(points.size()));
  }
  bool constant = true;
  for (const auto& pt : points) {
    if (!(pt.p > 0.0)) throw InvalidArgument("slope_fit needs p > 0");
    if (!(pt.failure > 0.0) || pt.failure > 1.0) {
      throw InvalidArgument("slope_fit needs failure probabilities in (0, 1]");
    }
    constant = constant && pt.failure == points.front().failure;
  }
  if (constant) throw InvalidArgument("slope_fit refused: failure rates are constant");

  double sx = 0, sy = 0;
  for (const auto& pt : points) {
    sx += std::log(pt.p);
    sy += std::log(pt.failure);
  }
  const double mx = sx / points.size(), my = sy / points.size();
  double sxx = 0, sxy = 0;
  for (const auto& pt : points) {
    double dx = std::log(pt.p) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(pt.failure) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("slope_fit needs at least two distinct p values");
  return sxy / sxx;
}

double slope_fit_rows(const std::vector<SweepRow>& rows) {
  std::vector<SlopePoint> points;
  for (const auto& row : rows) {
    std::uint32_t failures = row.trials - row.precond_hold_count;
    if (failures < 10) continue;  // statistical floor
    points.push_back({row.p, static_cast<double>(failures) / row.trials});
  }
  if (points.size() < 3) {
    throw InvalidArgument("slope_fit refused: only " + std::to_string(points.size()) +
                          " rows have >= 10 precondition failures (need 3)");
  }
  return slope_fit(points);
}

WilsonInterval wilson95(std::uint32_t successes, std::uint32_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double phat = static_cast<double>(successes) / n;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

double pow_int(double base, std::uint64_t exp) {
  double out = 1.0;
  for (std::uint64_t i = 0; i < exp; ++i) out *= base;
  return out;
}

std::uint32_t count_delivered(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                              const EnvSchedule& env, const NodeState& ref_final, NodeId target,
                              double p, std::uint32_t trials, std::uint64_t seed,
                              std::uint64_t stream, std::uint32_t threads, Round horizon) {
  std::vector<std::uint8_t> delivered(trials, 0);
  parallel_for(threads, trials, [&](std::size_t t) {
    std::uint64_t fault_seed = rng::mix(seed, stream, t);
    FaultSet faults = sample_faults(rn, FaultModel{FaultKind::Om, p}, fault_seed);
    auto adversary = make_adversary("silent");
    SimTrace sim = run_simulation(rn, scheme, env, seed, faults, *adversary, horizon, fault_seed);
    for (std::uint32_t i = 1; i <= rn.ell(); ++i) {
      if (sim.states[horizon][rn.flat_id({target, i})] == ref_final) {
        delivered[t] = 1;
        break;
      }
    }
  });
  std::uint32_t count = 0;
  for (auto d : delivered) count += d;
  return count;
}

}  // namespace

ToyReport toy_bound_experiment(NodeId n, NodeId h, double p, std::uint32_t trials,
                               std::uint64_t seed, std::uint32_t threads, bool with_baseline) {
  if (n < 2) throw InvalidArgument("toy experiment needs n >= 2");
  if (h < 1) throw InvalidArgument("toy experiment needs h >= 1");
  if (p < 0.0 || p > 1.0) throw InvalidArgument("p must be in [0,1]");
  if (trials == 0) throw InvalidArgument("toy experiment needs trials >= 1");

  Network net = make_path(n);
  EnvSchedule env(n);
  env.inject(0, 0, "X");
  auto scheme = pipeline_scheme();
  const Round horizon = n;
  ReferenceTrace ref = run_reference(net, *scheme, env, seed, horizon);
  const NodeState& ref_final = ref.states[horizon][n - 1];

  ReinforcedNetwork rn = build_partitioned(net, 1, path_partition(n, h), FaultKind::Om);
  ToyReport report;
  report.n = n;
  report.h = h;
  report.p = p;
  report.trials = trials;
  report.delivered = count_delivered(rn, *scheme, env, ref_final, n - 1, p, trials, seed,
                                     rng::kTrialStream, threads, horizon);
  report.rate = static_cast<double>(report.delivered) / trials;
  WilsonInterval ci = wilson95(report.delivered, trials);
  report.ci_lo = ci.lo;
  report.ci_hi = ci.hi;

  const std::uint64_t segments = (n + h - 1) / h;
  report.bound_product = pow_int(1.0 - (p * h) * (p * h), segments);
  report.bound_linear = 1.0 - static_cast<double>(n) * h * p * p;
  auto sigma3 = [&](double b) {
    double var = std::max(b * (1.0 - b), 0.0) / trials;
    return 3.0 * std::sqrt(var);
  };
  report.meets_bounds = report.rate >= report.bound_product - sigma3(report.bound_product) &&
                        report.rate >= report.bound_linear - sigma3(report.bound_linear);

  if (with_baseline) {
    // Two disjoint copies of the whole path: the single-region partition.
    ReinforcedNetwork baseline = build_partitioned(net, 1, path_partition(n, n), FaultKind::Om);
    std::uint32_t delivered = count_delivered(baseline, *scheme, env, ref_final, n - 1, p, trials,
                                              seed, rng::kTrialStream + 1, threads, horizon);
    report.baseline_delivered = delivered;
    report.baseline_rate = static_cast<double>(delivered) / trials;
  }
  return report;
}

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

json violation_json(const std::optional<Violation>& v) {
  if (!v) return json(nullptr);
  json j;
  j["round"] = v->round;
  j["node"] = v->node;
  j["reason"] = to_string(v->reason);
  return j;
}

}  // namespace

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "p,trials,precond,ok,strong_ok,ci_lo,ci_hi\n";
  for (const auto& r : rows) {
    out += fmt("%.10g", r.p) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.precond_hold_count) + "," + std::to_string(r.ok_count) + "," +
           std::to_string(r.strong_ok_count) + "," + fmt("%.6f", r.ci_lo) + "," +
           fmt("%.6f", r.ci_hi) + "\n";
  }
  return out;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["p"] = r.p;
    j["trials"] = r.trials;
    j["precond"] = r.precond_hold_count;
    j["ok"] = r.ok_count;
    j["strong_ok"] = r.strong_ok_count;
    j["ci_lo"] = r.ci_lo;
    j["ci_hi"] = r.ci_hi;
    arr.push_back(std::move(j));
  }
  return arr.dump() + "\n";
}

std::string trials_to_jsonl(const std::vector<TrialRecord>& records, Mode mode, std::uint32_t f) {
  std::string out;
  for (const auto& rec : records) {
    json j;
    j["trial"] = rec.trial;
    j["p"] = rec.p;
    j["mode"] = to_string(mode);
    j["f"] = f;
    j["precond"] = rec.precond;
    j["ok"] = rec.ok;
    j["strong_ok"] = rec.strong_ok;
    j["first_violation"] = violation_json(rec.violation);
    out += j.dump() + "\n";
  }
  return out;
}

std::string metrics_to_json(const Metrics& m) {
  json j;
  j["v"] = m.v_count;
  j["e"] = m.e_count;
  j["vprime"] = m.vprime_count;
  j["eprime"] = m.eprime_count;
  j["nu"] = m.nu;
  j["eta"] = m.eta ? json(*m.eta) : json(nullptr);
  j["eps_hat"] = m.eps_hat ? json(*m.eps_hat) : json(nullptr);
  return j.dump() + "\n";
}

std::string metrics_to_csv(const Metrics& m) {
  std::string out = "v,e,vprime,eprime,nu,eta,eps_hat\n";
  out += std::to_string(m.v_count) + "," + std::to_string(m.e_count) + "," +
         std::to_string(m.vprime_count) + "," + std::to_string(m.eprime_count) + "," +
         fmt("%.10g", m.nu) + ",";
  out += m.eta ? fmt("%.10g", *m.eta) : "";
  out += ",";
  out += m.eps_hat ? fmt("%.10g", *m.eps_hat) : "";
  out += "\n";
  return out;
}

std::string toy_report_to_json(const ToyReport& r) {
  json j;
  j["n"] = r.n;
  j["h"] = r.h;
  j["p"] = r.p;
  j["trials"] = r.trials;
  j["delivered"] = r.delivered;
  j["rate"] = r.rate;
  j["ci_lo"] = r.ci_lo;
  j["ci_hi"] = r.ci_hi;
  j["bound_product"] = r.bound_product;
  j["bound_linear"] = r.bound_linear;
  j["meets_bounds"] = r.meets_bounds;
  j["baseline_rate"] = r.baseline_rate ? json(*r.baseline_rate) : json(nullptr);
  j["baseline_delivered"] =
      r.baseline_delivered ? json(*r.baseline_delivered) : json(nullptr);
  return j.dump() + "\n";
}

std::string verdict_to_json(const Verdict& v) {
  json j;
  j["ok"] = v.ok;
  j["strong_ok"] = v.strong_ok;
  j["first_violation"] = violation_json(v.first_violation);
  return j.dump() + "\n";
}

std::string trace_to_json(const SimTrace& sim, const ReferenceTrace& ref,
                          const ReinforcedNetwork& rn, const Verdict& verdict) {
  json j;
  j["mode"] = to_string(sim.mode);
  j["f"] = sim.f;
  j["ell"] = sim.ell;
  j["horizon"] = sim.horizon;
  j["faults"] = sim.faults.flat_ids();
  j["precond"] = precondition_holds(rn, sim.faults);
  j["verdict"] = json::parse(verdict_to_json(verdict));

  json reference = json::array();
  for (const auto& round_states : ref.states) reference.push_back(round_states);
  j["reference"] = std::move(reference);

  json rounds = json::array();
  for (Round r = 0; r < sim.states.size(); ++r) {
    json round;
    round["round"] = r;
    json copies = json::array();
    for (std::uint32_t flat = 0; flat < sim.states[r].size(); ++flat) {
      CopyId id = rn.from_flat(flat);
      json c;
      c["flat"] = flat;
      c["base"] = id.base;
      c["copy"] = id.copy;
      c["state"] = sim.states[r][flat];
      c["know"] = static_cast<bool>(sim.know[r][flat]);
      copies.push_back(std::move(c));
    }
    round["copies"] = std::move(copies);
    rounds.push_back(std::move(round));
  }
  j["rounds"] = std::move(rounds);

  json failures = json::array();
  for (const auto& rec : sim.decode_failures) {
    json f;
    f["round"] = rec.round;
    f["receiver"] = rec.receiver_flat;
    f["neighbor"] = rec.neighbor;
    f["event"] = to_string(rec.event);
    failures.push_back(std::move(f));
  }
  j["decode_failures"] = std::move(failures);

  json decodes = json::array();
  for (const auto& dump : sim.group_dumps) {
    json d;
    d["round"] = dump.round;
    d["receiver"] = dump.receiver_flat;
    d["neighbor"] = dump.neighbor;
    json received = json::array();
    for (const auto& [sender, msg] : dump.received) {
      json m;
      m["sender"] = sender;
      m["blank"] = msg.blank;
      m["payload"] = msg.payload;
      received.push_back(std::move(m));
    }
    d["received"] = std::move(received);
    d["decoded"] = dump.decoded ? json(*dump.decoded) : json(nullptr);
    d["failed"] = dump.failed;
    decodes.push_back(std::move(d));
  }
  j["decodes"] = std::move(decodes);

  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace reinforce
