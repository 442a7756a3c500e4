#include <doctest.h>

#include <cmath>

#include "reinforce/analysis.hpp"

using namespace reinforce;

namespace {

// Probability-weighted enumeration of precondition_holds over every fault
// set; the independent oracle for the closed-form computation.
double oracle_precondition_probability(const ReinforcedNetwork& rn, double p) {
  const std::size_t vprime = rn.vprime_count();
  REQUIRE(vprime <= 22);
  double prob = 0.0;
  for (std::uint64_t mask = 0; mask < (1ull << vprime); ++mask) {
    FaultSet faults(vprime);
    for (std::size_t i = 0; i < vprime; ++i) {
      if (mask & (1ull << i)) faults.mark(static_cast<std::uint32_t>(i));
    }
    if (precondition_holds(rn, faults)) {
      prob += std::pow(p, faults.count()) * std::pow(1.0 - p, vprime - faults.count());
    }
  }
  return prob;
}

ExperimentConfig path3_strong_om_config() {
  ExperimentConfig cfg;
  cfg.net = make_path(3);
  cfg.scheme_name = "pipeline";
  EnvSchedule env(3);
  env.inject(0, 0, "X");
  cfg.env = env;
  cfg.mode = Mode::StrongOm;
  cfg.f = 1;
  cfg.adversary = "silent";
  cfg.horizon = 3;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("exact precondition probability closed forms") {
  Network p3 = make_path(3);
  ReinforcedNetwork om = build_strong(p3, 1, FaultKind::Om);
  CHECK(exact_precondition_probability(om, 0.1) == doctest::Approx(0.970299).epsilon(1e-12));
  CHECK(exact_precondition_probability(om, 0.0) == 1.0);

  ReinforcedNetwork byz = build_strong(p3, 1, FaultKind::Byz);
  double per_node = 0.9 * 0.9 * 0.9 + 3 * 0.1 * 0.9 * 0.9;
  CHECK(exact_precondition_probability(byz, 0.1) ==
        doctest::Approx(per_node * per_node * per_node).epsilon(1e-12));
}

TEST_CASE("exact precondition probability matches the subset enumeration oracle") {
  Network p3 = make_path(3);
  Network p4 = make_path(4);
  std::vector<ReinforcedNetwork> cases;
  cases.push_back(build_strong(p3, 1, FaultKind::Om));
  cases.push_back(build_strong(p3, 1, FaultKind::Byz));
  cases.push_back(build_partitioned(p4, 1, path_partition(4, 2), FaultKind::Om));
  cases.push_back(build_partitioned(p3, 1, path_partition(3, 3), FaultKind::Byz));
  for (const auto& rn : cases) {
    for (double p : {0.0, 0.1, 0.35, 1.0}) {
      CHECK(exact_precondition_probability(rn, p) ==
            doctest::Approx(oracle_precondition_probability(rn, p)).epsilon(1e-10));
    }
  }
}

TEST_CASE("enumerate_exact bounds and edge probabilities") {
  ExperimentConfig cfg = path3_strong_om_config();
  ReinforcedNetwork rn = build_strong(cfg.net, 1, FaultKind::Om);
  auto scheme = make_scheme(cfg.scheme_name, cfg.grid);

  double exact = enumerate_exact(rn, *scheme, cfg.env, cfg.seed, "silent", 0.5, 3, 0.1);
  // The precondition is sufficient but not necessary.
  CHECK(exact >= exact_precondition_probability(rn, 0.1));
  CHECK(exact <= 1.0);

  CHECK(enumerate_exact(rn, *scheme, cfg.env, cfg.seed, "silent", 0.5, 3, 0.0) == 1.0);
  CHECK(enumerate_exact(rn, *scheme, cfg.env, cfg.seed, "silent", 0.5, 3, 1.0) == 0.0);

  ReinforcedNetwork big = build_strong(make_path(12), 1, FaultKind::Om);
  CHECK_THROWS_AS(enumerate_exact(big, *scheme, cfg.env, cfg.seed, "silent", 0.5, 3, 0.1),
                  InvalidArgument);
}

TEST_CASE("monte carlo agrees with enumeration within 3 sigma") {
  ExperimentConfig cfg = path3_strong_om_config();
  cfg.p_grid = {0.1};
  cfg.trials = 20000;
  ReinforcedNetwork rn = build_strong(cfg.net, 1, FaultKind::Om);
  auto scheme = make_scheme(cfg.scheme_name, cfg.grid);
  double exact = enumerate_exact(rn, *scheme, cfg.env, cfg.seed, "silent", 0.5, 3, 0.1);

  std::vector<SweepRow> rows = monte_carlo(cfg);
  REQUIRE(rows.size() == 1);
  double rate = static_cast<double>(rows[0].ok_count) / rows[0].trials;
  double sigma = std::sqrt(exact * (1 - exact) / cfg.trials);
  CHECK(std::abs(rate - exact) <= 3 * sigma);
  // Soundness: precondition implies ok.
  CHECK(rows[0].ok_count >= rows[0].precond_hold_count);
}

TEST_CASE("monte carlo is deterministic and thread-count independent") {
  ExperimentConfig cfg = path3_strong_om_config();
  cfg.p_grid = {0.05, 0.2};
  cfg.trials = 500;

  std::vector<TrialRecord> rec1, rec2;
  cfg.threads = 1;
  auto rows1 = monte_carlo(cfg, &rec1);
  cfg.threads = 4;
  auto rows2 = monte_carlo(cfg, &rec2);
  CHECK(sweep_to_csv(rows1) == sweep_to_csv(rows2));
  CHECK(trials_to_jsonl(rec1, cfg.mode, cfg.f) == trials_to_jsonl(rec2, cfg.mode, cfg.f));

  // p = 0 rows always succeed.
  cfg.p_grid = {0.0};
  auto rows0 = monte_carlo(cfg);
  CHECK(rows0[0].ok_count == cfg.trials);
  CHECK(rows0[0].strong_ok_count == cfg.trials);
  CHECK(rows0[0].precond_hold_count == cfg.trials);

  // p = 1 with a message-bearing schedule: every trial fails.
  cfg.p_grid = {1.0};
  auto rows_one = monte_carlo(cfg);
  CHECK(rows_one[0].ok_count == 0);
}

TEST_CASE("sweep precondition rate matches the closed form on path(50)") {
  // Precondition failure = some node loses both copies: 1-(1-p^2)^50.
  ExperimentConfig cfg;
  cfg.net = make_path(50);
  cfg.scheme_name = "flooding";  // horizon-independent statistic; keep rounds short
  cfg.env = EnvSchedule(2);
  cfg.mode = Mode::StrongOm;
  cfg.f = 1;
  cfg.p_grid = {0.01};
  cfg.trials = 10000;
  cfg.horizon = 2;
  cfg.seed = 321;
  std::vector<SweepRow> rows = monte_carlo(cfg);
  double fail_rate = 1.0 - static_cast<double>(rows[0].precond_hold_count) / rows[0].trials;
  double expected = 1.0 - std::pow(1.0 - 0.01 * 0.01, 50.0);  // ~0.4988%
  ReinforcedNetwork rn = build_strong(cfg.net, 1, FaultKind::Om);
  CHECK(1.0 - exact_precondition_probability(rn, 0.01) == doctest::Approx(expected).epsilon(1e-9));
  double sigma = std::sqrt(expected * (1.0 - expected) / cfg.trials);
  CHECK(std::abs(fail_rate - expected) <= 3 * sigma);
}

TEST_CASE("wilson interval basics") {
  WilsonInterval ci = wilson95(50, 100);
  CHECK(ci.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(ci.hi == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK(wilson95(0, 0).lo == 0.0);
  CHECK(wilson95(100, 100).hi == 1.0);
  CHECK(wilson95(0, 100).lo <= 1e-12);
}

TEST_CASE("slope fit recovers the failure exponent from exact probabilities") {
  GridSpec spec{10, 2, false};
  Network net = make_grid(spec);
  for (std::uint32_t f : {1u, 2u}) {
    ReinforcedNetwork rn = build_strong(net, f, FaultKind::Om);
    std::vector<SlopePoint> points;
    for (double p : {3e-4, 1e-3, 3e-3}) {
      points.push_back({p, 1.0 - exact_precondition_probability(rn, p)});
    }
    double slope = slope_fit(points);
    CHECK(std::abs(slope - (f + 1)) <= 0.05);
  }
}

TEST_CASE("slope fit refuses degenerate inputs") {
  CHECK_THROWS_AS(slope_fit({{0.1, 0.5}, {0.2, 0.6}}), InvalidArgument);
  CHECK_THROWS_AS(slope_fit({{0.1, 0.5}, {0.2, 0.5}, {0.4, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(slope_fit({{0.1, 0.0}, {0.2, 0.1}, {0.4, 0.2}}), InvalidArgument);

  // Row adapter: the statistical floor drops rows with < 10 failures.
  std::vector<SweepRow> rows(3);
  rows[0] = {0.01, 1000, 995, 995, 995, 0, 0};
  rows[1] = {0.03, 1000, 950, 950, 950, 0, 0};
  rows[2] = {0.1, 1000, 600, 600, 600, 0, 0};
  CHECK_THROWS_AS(slope_fit_rows(rows), InvalidArgument);
  rows[0].precond_hold_count = 980;
  CHECK_NOTHROW(slope_fit_rows(rows));
}

TEST_CASE("geometric grids step by sqrt(10) decades") {
  auto grid = geometric_p_grid(1e-3, 1e-2, 2);
  REQUIRE(grid.size() == 3);
  CHECK(grid[0] == doctest::Approx(1e-3));
  CHECK(grid[1] == doctest::Approx(1e-3 * std::sqrt(10.0)));
  CHECK(grid[2] == doctest::Approx(1e-2));
  CHECK_THROWS_AS(geometric_p_grid(0.0, 0.1), InvalidArgument);
}

TEST_CASE("toy experiment baseline cases") {
  ToyReport zero = toy_bound_experiment(9, 4, 0.0, 200, 5);
  CHECK(zero.rate == 1.0);
  CHECK(zero.meets_bounds);

  ToyReport small = toy_bound_experiment(9, 4, 0.05, 4000, 5, 0, true);
  CHECK(small.bound_linear == doctest::Approx(0.91));
  CHECK(small.bound_product == doctest::Approx(std::pow(0.96, 3.0)));
  CHECK(small.meets_bounds);
  REQUIRE(small.baseline_rate.has_value());
  CHECK(*small.baseline_rate <= 1.0);
}

TEST_CASE("experiment config parsing") {
  std::string text = R"({
    "network": {"kind": "grid", "q": 3, "d": 2, "wrap": false},
    "scheme": "dimension-order",
    "env": {"horizon": 6, "injections": [{"round": 0, "node": 0, "payload": "m", "dest": 8}]},
    "mode": "partitioned_om",
    "f": 1,
    "partition": {"kind": "grid", "h": 3},
    "adversary": "coin-omit",
    "adversary_q": 0.25,
    "p_grid": [0.01, 0.1],
    "trials": 10,
    "seed": 9
  })";
  ExperimentConfig cfg = parse_experiment_config(text);
  CHECK(cfg.net.node_count() == 9);
  CHECK(cfg.grid.has_value());
  CHECK(cfg.mode == Mode::PartitionedOm);
  CHECK(cfg.partition->region_count() == 1);
  CHECK(cfg.horizon == 6);
  CHECK(cfg.adversary_q == 0.25);
  auto rows = monte_carlo(cfg);
  CHECK(rows.size() == 2);

  CHECK_THROWS_AS(parse_experiment_config("{}"), ParseError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"network":{"kind":"path","n":4},
    "scheme":"pipeline","mode":"strong_om","p_grid":[2.0]})"),
                  ParseError);
  // Partitioned mode without a partition.
  CHECK_THROWS_AS(parse_experiment_config(R"({"network":{"kind":"path","n":4},
    "scheme":"pipeline","mode":"partitioned_om"})"),
                  ParseError);
}

TEST_CASE("serializers emit the documented shapes") {
  std::vector<SweepRow> rows(1);
  rows[0] = {0.1, 100, 90, 95, 80, 0.8871, 0.9781};
  std::string csv = sweep_to_csv(rows);
  CHECK(csv.find("p,trials,precond,ok,strong_ok,ci_lo,ci_hi\n") == 0);
  CHECK(csv.find("0.1,100,90,95,80,") != std::string::npos);

  std::vector<TrialRecord> recs(1);
  recs[0] = {3, 0.1, true, false, false,
             Violation{2, 1, ViolationReason::NoMajority}};
  std::string jsonl = trials_to_jsonl(recs, Mode::StrongByz, 1);
  CHECK(jsonl.find("\"trial\":3") != std::string::npos);
  CHECK(jsonl.find("\"mode\":\"strong_byz\"") != std::string::npos);
  CHECK(jsonl.find("\"reason\":\"no-majority\"") != std::string::npos);

  Metrics m = metrics(build_strong(make_path(9), 1, FaultKind::Byz));
  CHECK(metrics_to_csv(m).find("9,8,27,72,3,9,") != std::string::npos);
}
