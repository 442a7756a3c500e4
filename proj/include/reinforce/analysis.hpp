#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reinforce/fault_sim.hpp"

namespace reinforce {

/// Fully materialized experiment description (network, workload, sweep
/// parameters). Built from the config JSON documented in the README.
struct ExperimentConfig {
  Network net;
  std::optional<GridSpec> grid;  // set when the network is a generated grid/torus
  std::string scheme_name = "pipeline";
  EnvSchedule env;
  Mode mode = Mode::StrongOm;
  std::uint32_t f = 1;
  std::optional<Partition> partition;
  std::string adversary = "silent";
  double adversary_q = 0.5;
  std::vector<double> p_grid;
  std::uint32_t trials = 1000;
  Round horizon = 0;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;  // 0 = available parallelism
  // Default output destinations; command-line flags take precedence.
  std::string out;
  std::string format = "csv";
  std::string trials_out;
};

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin = "<string>");
ExperimentConfig load_experiment_config(const std::string& path);

/// Geometric p-grid from lo to hi with `per_decade` points per decade.
std::vector<double> geometric_p_grid(double lo, double hi, std::uint32_t per_decade = 2);

struct SweepRow {
  double p = 0.0;
  std::uint32_t trials = 0;
  std::uint32_t precond_hold_count = 0;
  std::uint32_t ok_count = 0;
  std::uint32_t strong_ok_count = 0;
  double ci_lo = 0.0;  // Wilson 95% interval for the ok proportion
  double ci_hi = 0.0;
};

struct TrialRecord {
  std::uint32_t trial = 0;
  double p = 0.0;
  bool precond = false;
  bool ok = false;
  bool strong_ok = false;
  std::optional<Violation> violation;
};

/// Monte Carlo sweep: for each p in the grid runs cfg.trials independent
/// sample -> simulate -> check trials. Deterministic given cfg.seed and
/// independent of cfg.threads. Optionally collects per-trial records in
/// (p index, trial index) order.
std::vector<SweepRow> monte_carlo(const ExperimentConfig& cfg,
                                  std::vector<TrialRecord>* records = nullptr);

/// Exact probability that the mode's lemma precondition holds under
/// independent per-copy fault probability p.
double exact_precondition_probability(const ReinforcedNetwork& rn, double p);

/// Brute-force ground truth: sums p^|F'| (1-p)^(|V'|-|F'|) over all fault
/// sets F' with check(...).ok. Guarded to |V'| <= 22. Meaningful for
/// deterministic adversaries such as "silent"; seeded adversaries use the
/// subset index as their trial seed.
double enumerate_exact(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                       const EnvSchedule& env, std::uint64_t master_seed,
                       const std::string& adversary, double adversary_q, Round horizon, double p);
constexpr std::size_t kEnumerationGuard = 22;

struct SlopePoint {
  double p = 0.0;
  double failure = 0.0;  // failure probability at p, in (0, 1]
};

/// Least-squares slope of log(failure) vs log(p). Requires at least three
/// points with distinct p and non-identical failure values.
double slope_fit(const std::vector<SlopePoint>& points);

/// Same fit on sweep rows using the precondition-failure rate
/// 1 - precond/trials; rows with fewer than 10 failures are dropped
/// (statistical floor) and at least three usable rows are required.
double slope_fit_rows(const std::vector<SweepRow>& rows);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};
WilsonInterval wilson95(std::uint32_t successes, std::uint32_t n);

/// Path-of-n-nodes delivery experiment: partitioned-omission reinforcement
/// with f = 1 over segments of h nodes, pipeline workload, omit-all faulty
/// copies. Reports the empirical delivery rate against the analytic lower
/// bounds (1-(ph)^2)^ceil(n/h) and 1-n*h*p^2. The optional baseline re-runs
/// the sweep with the whole path as a single region (two disjoint copies).
struct ToyReport {
  NodeId n = 0;
  NodeId h = 0;
  double p = 0.0;
  std::uint32_t trials = 0;
  std::uint32_t delivered = 0;
  double rate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double bound_product = 0.0;  // (1-(ph)^2)^ceil(n/h)
  double bound_linear = 0.0;   // 1 - n*h*p^2
  bool meets_bounds = false;   // rate >= each bound - 3 sigma
  std::optional<double> baseline_rate;
  std::optional<std::uint32_t> baseline_delivered;
};
ToyReport toy_bound_experiment(NodeId n, NodeId h, double p, std::uint32_t trials,
                               std::uint64_t seed, std::uint32_t threads = 0,
                               bool with_baseline = false);

// Deterministic serialization of results.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows);
std::string trials_to_jsonl(const std::vector<TrialRecord>& records, Mode mode, std::uint32_t f);
std::string metrics_to_json(const Metrics& m);
std::string metrics_to_csv(const Metrics& m);
std::string toy_report_to_json(const ToyReport& r);
std::string verdict_to_json(const Verdict& v);

/// Single-trial trace dump (states, know flags, decode groups, verdict) as a
/// JSON document; used by the `simulate` subcommand.
std::string trace_to_json(const SimTrace& sim, const ReferenceTrace& ref,
                          const ReinforcedNetwork& rn, const Verdict& verdict);

/// Deterministic helper used by sweeps and experiments: runs fn(i) for
/// i in [0, count) across up to `threads` workers (0 = hardware).
void parallel_for(std::uint32_t threads, std::size_t count,
                  const std::function<void(std::size_t)>& fn);

}  // namespace reinforce
