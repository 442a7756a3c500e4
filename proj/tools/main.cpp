// Command-line front end: network/partition generators, reinforcement
// construction, single-trial simulation, Monte Carlo sweeps, exact oracles
// and the path delivery experiment.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reinforce/analysis.hpp"
#include "reinforce/rng.hpp"

using namespace reinforce;

namespace {

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text_file(out_path, content);
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed,
                           const std::optional<std::uint64_t>& config_seed) {
  if (cli_seed) return *cli_seed;
  if (config_seed) return *config_seed;
  if (const char* env = std::getenv("REINFORCE_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

struct ConfigSource {
  ExperimentConfig cfg;
  std::optional<std::uint64_t> config_seed;
};

ConfigSource load_config(const std::string& path) {
  ConfigSource src{load_experiment_config(path), std::nullopt};
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  if (j.contains("seed")) src.config_seed = j["seed"].get<std::uint64_t>();
  return src;
}

Network network_from_flags(const std::string& kind, std::uint32_t n, std::uint32_t q,
                           std::uint32_t d, bool wrap, std::optional<GridSpec>* grid_out) {
  if (kind == "path") return make_path(n);
  if (kind == "grid") {
    GridSpec spec{q, d, wrap};
    if (grid_out) *grid_out = spec;
    return make_grid(spec);
  }
  throw InvalidArgument("--kind must be path or grid");
}

int run(int argc, char** argv) {
  CLI::App app{"fault-tolerant routing-network reinforcement toolkit"};
  app.require_subcommand(1);
  // --h is a domain parameter (segment length / block side), so help loses
  // its short name.
  app.set_help_flag("--help", "print help and exit");

  std::optional<std::uint64_t> cli_seed;
  std::string out_path;
  std::string format = "csv";
  std::uint32_t threads = 0;

  // generate
  auto* generate = app.add_subcommand("generate", "emit a network as graph JSON");
  std::string gen_kind = "path";
  std::uint32_t gen_n = 9, gen_q = 4, gen_d = 2;
  bool gen_wrap = false;
  generate->add_option("--kind", gen_kind, "path|grid")->required();
  generate->add_option("--n", gen_n, "path node count");
  generate->add_option("--q", gen_q, "grid side length");
  generate->add_option("--d", gen_d, "grid dimension");
  generate->add_flag("--wrap", gen_wrap, "torus wraparound");
  generate->add_option("--out", out_path, "output file (default stdout)");

  // partition
  auto* partition = app.add_subcommand("partition", "build or validate a node partition");
  std::string part_net_file, part_kind = "path", part_in;
  std::uint32_t part_n = 9, part_q = 4, part_d = 2, part_h = 2;
  bool part_wrap = false;
  partition->add_option("--net", part_net_file, "network JSON file");
  partition->add_option("--kind", part_kind, "generator when --net is absent: path|grid");
  partition->add_option("--n", part_n, "path node count");
  partition->add_option("--q", part_q, "grid side length");
  partition->add_option("--d", part_d, "grid dimension");
  partition->add_flag("--wrap", part_wrap, "torus wraparound");
  partition->add_option("--h", part_h, "segment length / block side");
  partition->add_option("--in", part_in, "validate an existing partition file instead");
  partition->add_option("--out", out_path, "partition JSON output");

  // reinforce
  auto* reinforce_cmd = app.add_subcommand("reinforce", "build the reinforced network");
  std::string config_path;
  reinforce_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  reinforce_cmd->add_option("--out", out_path, "reinforced-network JSON output");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "report nu/eta for a reinforced network");
  std::string rn_path;
  metrics_cmd->add_option("file", rn_path, "reinforced-network JSON")->required();
  metrics_cmd->add_option("--format", format, "csv|json");
  metrics_cmd->add_option("--out", out_path, "output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run one trial and dump the full trace");
  std::optional<double> sim_p;
  std::uint32_t sim_trial = 0;
  simulate->add_option("--config", config_path, "experiment config JSON")->required();
  simulate->add_option("--seed", cli_seed, "master seed override");
  simulate->add_option("--p", sim_p, "fault probability (default: first grid entry)");
  simulate->add_option("--trial", sim_trial, "trial index");
  simulate->add_option("--out", out_path, "trace JSON output (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the p grid");
  std::string trials_out;
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--seed", cli_seed, "master seed override");
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");
  sweep->add_option("--format", format, "csv|json");
  sweep->add_option("--out", out_path, "row output (default stdout)");
  sweep->add_option("--trials-out", trials_out, "per-trial JSON-lines log");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "exact ok probability by fault-set enumeration");
  enumerate->add_option("--config", config_path, "experiment config JSON")->required();
  enumerate->add_option("--seed", cli_seed, "master seed override");
  enumerate->add_option("--format", format, "csv|json");
  enumerate->add_option("--out", out_path, "output file (default stdout)");

  // toy
  auto* toy = app.add_subcommand("toy", "segmented path delivery-bound experiment");
  std::uint32_t toy_n = 9, toy_h = 4, toy_trials = 100000;
  double toy_p = 0.05;
  bool toy_baseline = false;
  toy->add_option("--n", toy_n, "path length");
  toy->add_option("--h", toy_h, "segment length");
  toy->add_option("--p", toy_p, "per-copy fault probability");
  toy->add_option("--trials", toy_trials, "trial count");
  toy->add_option("--seed", cli_seed, "seed");
  toy->add_option("--threads", threads, "worker threads");
  toy->add_flag("--baseline", toy_baseline, "also run the two-disjoint-copies baseline");
  toy->add_option("--out", out_path, "report JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (format != "csv" && format != "json") {
    std::cerr << "error: --format must be csv or json\n";
    return 2;
  }

  if (generate->parsed()) {
    Network net = network_from_flags(gen_kind, gen_n, gen_q, gen_d, gen_wrap, nullptr);
    emit(network_to_json(net), out_path);
    return 0;
  }

  if (partition->parsed()) {
    std::optional<GridSpec> grid;
    Network net = part_net_file.empty()
                      ? network_from_flags(part_kind, part_n, part_q, part_d, part_wrap, &grid)
                      : load_network(part_net_file);
    Partition part = [&] {
      if (!part_in.empty()) return load_partition(part_in, net.node_count());
      if (grid) return hypercube_partition(*grid, part_h);
      return path_partition(net.node_count(), part_h);
    }();
    PartitionStats stats = validate_partition(net, part);
    if (!out_path.empty()) save_partition(part, out_path);
    nlohmann::json j;
    j["regions"] = stats.region_count;
    j["max_region"] = stats.max_region;
    j["min_region"] = stats.min_region;
    j["cut_arcs"] = stats.cut_arcs;
    j["total_arcs"] = stats.total_arcs;
    j["eps_hat"] = stats.eps_hat;
    j["all_connected"] = stats.all_connected;
    std::cout << j.dump() << "\n";
    return 0;
  }

  if (reinforce_cmd->parsed()) {
    ConfigSource src = load_config(config_path);
    ReinforcedNetwork rn = is_partitioned(src.cfg.mode)
                               ? ReinforcedNetwork(src.cfg.net, src.cfg.mode, src.cfg.f,
                                                   src.cfg.partition)
                               : ReinforcedNetwork(src.cfg.net, src.cfg.mode, src.cfg.f);
    emit(reinforced_to_json(rn), out_path);
    return 0;
  }

  if (metrics_cmd->parsed()) {
    Metrics m = metrics(load_reinforced(rn_path));
    emit(format == "csv" ? metrics_to_csv(m) : metrics_to_json(m), out_path);
    return 0;
  }

  if (simulate->parsed()) {
    ConfigSource src = load_config(config_path);
    ExperimentConfig& cfg = src.cfg;
    cfg.seed = resolve_seed(cli_seed, src.config_seed);
    double p = sim_p ? *sim_p : (cfg.p_grid.empty() ? 0.0 : cfg.p_grid[0]);
    std::size_t pi = 0;
    for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
      if (cfg.p_grid[i] == p) pi = i;
    }
    auto scheme = make_scheme(cfg.scheme_name, cfg.grid);
    ReinforcedNetwork rn = is_partitioned(cfg.mode)
                               ? ReinforcedNetwork(cfg.net, cfg.mode, cfg.f, cfg.partition)
                               : ReinforcedNetwork(cfg.net, cfg.mode, cfg.f);
    ReferenceTrace ref = run_reference(cfg.net, *scheme, cfg.env, cfg.seed, cfg.horizon);
    std::uint64_t base = rng::mix(cfg.seed, rng::kTrialStream, pi, sim_trial);
    FaultSet faults = sample_faults(rn, FaultModel{rn.kind(), p}, rng::mix(base, 0));
    auto adversary = make_adversary(cfg.adversary, cfg.adversary_q);
    SimTrace sim = run_simulation(rn, *scheme, cfg.env, cfg.seed, faults, *adversary, cfg.horizon,
                                  rng::mix(base, 1), true);
    Verdict verdict = check(sim, ref, rn);
    emit(trace_to_json(sim, ref, rn, verdict), out_path);
    return 0;
  }

  if (sweep->parsed()) {
    ConfigSource src = load_config(config_path);
    ExperimentConfig& cfg = src.cfg;
    cfg.seed = resolve_seed(cli_seed, src.config_seed);
    if (threads != 0) cfg.threads = threads;
    // Command-line flags win over the config's output settings.
    std::string row_out = !out_path.empty() ? out_path : cfg.out;
    std::string row_format = sweep->count("--format") ? format : cfg.format;
    std::string log_out = !trials_out.empty() ? trials_out : cfg.trials_out;
    std::vector<TrialRecord> records;
    std::vector<SweepRow> rows = monte_carlo(cfg, log_out.empty() ? nullptr : &records);
    emit(row_format == "csv" ? sweep_to_csv(rows) : sweep_to_json(rows), row_out);
    if (!log_out.empty()) {
      write_text_file(log_out, trials_to_jsonl(records, cfg.mode, cfg.f));
    }
    return 0;
  }

  if (enumerate->parsed()) {
    ConfigSource src = load_config(config_path);
    ExperimentConfig& cfg = src.cfg;
    cfg.seed = resolve_seed(cli_seed, src.config_seed);
    auto scheme = make_scheme(cfg.scheme_name, cfg.grid);
    ReinforcedNetwork rn = is_partitioned(cfg.mode)
                               ? ReinforcedNetwork(cfg.net, cfg.mode, cfg.f, cfg.partition)
                               : ReinforcedNetwork(cfg.net, cfg.mode, cfg.f);
    if (format == "csv") {
      std::string out = "p,exact_ok\n";
      for (double p : cfg.p_grid) {
        double exact = enumerate_exact(rn, *scheme, cfg.env, cfg.seed, cfg.adversary,
                                       cfg.adversary_q, cfg.horizon, p);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g,%.12g\n", p, exact);
        out += buf;
      }
      emit(out, out_path);
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (double p : cfg.p_grid) {
        nlohmann::json j;
        j["p"] = p;
        j["exact_ok"] = enumerate_exact(rn, *scheme, cfg.env, cfg.seed, cfg.adversary,
                                        cfg.adversary_q, cfg.horizon, p);
        arr.push_back(std::move(j));
      }
      emit(arr.dump() + "\n", out_path);
    }
    return 0;
  }

  if (toy->parsed()) {
    ToyReport report = toy_bound_experiment(toy_n, toy_h, toy_p, toy_trials,
                                            resolve_seed(cli_seed, std::nullopt), threads,
                                            toy_baseline);
    emit(toy_report_to_json(report), out_path);
    if (!report.meets_bounds) {
      std::cerr << "error: empirical delivery rate fell below the analytic bound\n";
      return 3;
    }
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
