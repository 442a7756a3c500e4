#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reinforce/analysis.hpp"

namespace py = pybind11;
using namespace reinforce;

namespace {

ReinforcedNetwork build_rn(const Network& net, Mode mode, std::uint32_t f,
                           const std::optional<Partition>& part) {
  if (is_partitioned(mode)) {
    if (!part) throw InvalidArgument("partitioned modes need a partition");
    return ReinforcedNetwork(net, mode, f, *part);
  }
  return ReinforcedNetwork(net, mode, f);
}

SimTrace run_simulation_py(const ReinforcedNetwork& rn, const SchedulingAlgorithm& scheme,
                           const EnvSchedule& env, std::uint64_t master_seed,
                           const FaultSet& faults, const std::string& adversary, double adversary_q,
                           Round horizon, std::uint64_t trial_seed, bool record_groups) {
  auto adv = make_adversary(adversary, adversary_q);
  return run_simulation(rn, scheme, env, master_seed, faults, *adv, horizon, trial_seed,
                        record_groups);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Node-replication reinforcement of synchronous routing networks: "
            "builders, fault simulation and Monte Carlo analysis.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InvalidPartition>(m, "InvalidPartition", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  py::class_<Arc>(m, "Arc")
      .def(py::init<NodeId, NodeId>())
      .def_readonly("src", &Arc::src)
      .def_readonly("dst", &Arc::dst)
      .def("__repr__", [](const Arc& a) {
        return "Arc(" + std::to_string(a.src) + ", " + std::to_string(a.dst) + ")";
      });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<std::uint32_t, std::uint32_t, bool>(), py::arg("q"), py::arg("d"),
           py::arg("wraparound") = false)
      .def_readonly("q", &GridSpec::q)
      .def_readonly("d", &GridSpec::d)
      .def_readonly("wraparound", &GridSpec::wraparound);

  py::class_<Network>(m, "Network")
      .def(py::init([](NodeId n, const std::vector<std::pair<NodeId, NodeId>>& arcs) {
             std::vector<Arc> list;
             list.reserve(arcs.size());
             for (const auto& [s, d] : arcs) list.push_back({s, d});
             return Network(n, std::move(list));
           }),
           py::arg("n"), py::arg("arcs"))
      .def_property_readonly("n", &Network::node_count)
      .def_property_readonly("m", &Network::arc_count)
      .def("arcs",
           [](const Network& net) {
             std::vector<std::pair<NodeId, NodeId>> out;
             for (const Arc& a : net.arcs()) out.emplace_back(a.src, a.dst);
             return out;
           })
      .def("out_neighbors",
           [](const Network& net, NodeId v) {
             auto span = net.out_neighbors(v);
             return std::vector<NodeId>(span.begin(), span.end());
           })
      .def("in_neighbors",
           [](const Network& net, NodeId v) {
             auto span = net.in_neighbors(v);
             return std::vector<NodeId>(span.begin(), span.end());
           })
      .def("__eq__", [](const Network& a, const Network& b) { return a == b; })
      .def("to_json", &network_to_json)
      .def("save", &save_network);

  m.def("make_path", &make_path, py::arg("n"));
  m.def("make_grid", &make_grid, py::arg("spec"));
  m.def("load_network", &load_network, py::arg("path"));
  m.def("grid_node_id", &grid_node_id);
  m.def("grid_coords", &grid_coords);

  py::class_<Partition>(m, "Partition")
      .def(py::init<NodeId, std::vector<std::vector<NodeId>>>(), py::arg("n"), py::arg("regions"))
      .def_property_readonly("n", &Partition::node_count)
      .def_property_readonly("k", &Partition::region_count)
      .def("regions", &Partition::regions)
      .def("region_of", &Partition::region_of)
      .def("to_json", &partition_to_json)
      .def("save", &save_partition);

  py::class_<PartitionStats>(m, "PartitionStats")
      .def_readonly("max_region", &PartitionStats::max_region)
      .def_readonly("min_region", &PartitionStats::min_region)
      .def_readonly("region_count", &PartitionStats::region_count)
      .def_readonly("cut_arcs", &PartitionStats::cut_arcs)
      .def_readonly("total_arcs", &PartitionStats::total_arcs)
      .def_readonly("eps_hat", &PartitionStats::eps_hat)
      .def_readonly("all_connected", &PartitionStats::all_connected);

  m.def("path_partition", &path_partition, py::arg("n"), py::arg("h"));
  m.def("hypercube_partition", &hypercube_partition, py::arg("spec"), py::arg("h"));
  m.def("validate_partition", &validate_partition);
  m.def("load_partition", &load_partition, py::arg("path"),
        py::arg("expected_n") = std::nullopt);

  py::enum_<FaultKind>(m, "FaultKind")
      .value("Byz", FaultKind::Byz)
      .value("Om", FaultKind::Om);

  py::enum_<Mode>(m, "Mode")
      .value("StrongByz", Mode::StrongByz)
      .value("StrongOm", Mode::StrongOm)
      .value("PartitionedByz", Mode::PartitionedByz)
      .value("PartitionedOm", Mode::PartitionedOm);

  py::class_<CopyId>(m, "CopyId")
      .def(py::init<NodeId, std::uint32_t>())
      .def_readonly("base", &CopyId::base)
      .def_readonly("copy", &CopyId::copy);

  py::class_<ReinforcedNetwork>(m, "ReinforcedNetwork")
      .def(py::init(&build_rn), py::arg("net"), py::arg("mode"), py::arg("f"),
           py::arg("partition") = std::nullopt)
      .def_property_readonly("mode", &ReinforcedNetwork::mode)
      .def_property_readonly("f", &ReinforcedNetwork::f)
      .def_property_readonly("ell", &ReinforcedNetwork::ell)
      .def_property_readonly("vprime", &ReinforcedNetwork::vprime_count)
      .def_property_readonly("eprime", &ReinforcedNetwork::eprime_count)
      .def("original", &ReinforcedNetwork::original, py::return_value_policy::reference_internal)
      .def("copies_of", &ReinforcedNetwork::copies_of)
      .def("project", &ReinforcedNetwork::project)
      .def("flat_id", &ReinforcedNetwork::flat_id)
      .def("flattened_arcs", &ReinforcedNetwork::flattened_arcs)
      .def("to_json", &reinforced_to_json)
      .def("save", &save_reinforced);

  m.def("build_strong", &build_strong, py::arg("net"), py::arg("f"), py::arg("model"));
  m.def("build_partitioned", &build_partitioned, py::arg("net"), py::arg("f"),
        py::arg("partition"), py::arg("model"));
  m.def("load_reinforced", &load_reinforced);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("v", &Metrics::v_count)
      .def_readonly("e", &Metrics::e_count)
      .def_readonly("vprime", &Metrics::vprime_count)
      .def_readonly("eprime", &Metrics::eprime_count)
      .def_readonly("nu", &Metrics::nu)
      .def_readonly("eta", &Metrics::eta)
      .def_readonly("eps_hat", &Metrics::eps_hat);
  m.def("metrics", &metrics);

  py::class_<EnvSchedule>(m, "EnvSchedule")
      .def(py::init<Round>(), py::arg("horizon"))
      .def_property_readonly("horizon", &EnvSchedule::horizon)
      .def("inject", &EnvSchedule::inject, py::arg("round"), py::arg("node"), py::arg("payload"),
           py::arg("dest") = std::nullopt)
      .def("to_json", &EnvSchedule::to_json)
      .def_static("load", &EnvSchedule::load)
      .def("save", &EnvSchedule::save);

  py::class_<SchedulingAlgorithm, std::shared_ptr<SchedulingAlgorithm>>(m, "SchedulingAlgorithm")
      .def_property_readonly("name", &SchedulingAlgorithm::name);
  m.def(
      "make_scheme",
      [](const std::string& name, const std::optional<GridSpec>& grid) {
        return std::shared_ptr<SchedulingAlgorithm>(make_scheme(name, grid));
      },
      py::arg("name"), py::arg("grid") = std::nullopt);

  py::class_<FaultSet>(m, "FaultSet")
      .def(py::init<std::size_t>(), py::arg("vprime"))
      .def("mark", &FaultSet::mark)
      .def("faulty", &FaultSet::faulty)
      .def_property_readonly("count", &FaultSet::count)
      .def("flat_ids", &FaultSet::flat_ids);

  m.def(
      "sample_faults",
      [](const ReinforcedNetwork& rn, FaultKind kind, double p, std::uint64_t seed) {
        return sample_faults(rn, FaultModel{kind, p}, seed);
      },
      py::arg("rn"), py::arg("kind"), py::arg("p"), py::arg("seed"));

  py::class_<ReferenceTrace>(m, "ReferenceTrace")
      .def_readonly("horizon", &ReferenceTrace::horizon)
      .def_readonly("states", &ReferenceTrace::states);

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("horizon", &SimTrace::horizon)
      .def_readonly("ell", &SimTrace::ell)
      .def_readonly("states", &SimTrace::states)
      .def_readonly("know", &SimTrace::know);

  py::class_<Violation>(m, "Violation")
      .def_readonly("round", &Violation::round)
      .def_readonly("node", &Violation::node)
      .def_property_readonly("reason", [](const Violation& v) { return to_string(v.reason); });

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("ok", &Verdict::ok)
      .def_readonly("strong_ok", &Verdict::strong_ok)
      .def_readonly("first_violation", &Verdict::first_violation);

  m.def("run_reference", &run_reference, py::arg("net"), py::arg("scheme"), py::arg("env"),
        py::arg("master_seed"), py::arg("horizon"));
  m.def("run_simulation", &run_simulation_py, py::arg("rn"), py::arg("scheme"), py::arg("env"),
        py::arg("master_seed"), py::arg("faults"), py::arg("adversary"),
        py::arg("adversary_q"), py::arg("horizon"), py::arg("trial_seed"),
        py::arg("record_groups") = false);
  m.def("check", &check, py::arg("sim"), py::arg("ref"), py::arg("rn"));
  m.def("precondition_holds", &precondition_holds);
  m.def("adversary_names", &adversary_names);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("p", &SweepRow::p)
      .def_readonly("trials", &SweepRow::trials)
      .def_readonly("precond", &SweepRow::precond_hold_count)
      .def_readonly("ok", &SweepRow::ok_count)
      .def_readonly("strong_ok", &SweepRow::strong_ok_count)
      .def_readonly("ci_lo", &SweepRow::ci_lo)
      .def_readonly("ci_hi", &SweepRow::ci_hi);

  py::class_<ToyReport>(m, "ToyReport")
      .def_readonly("rate", &ToyReport::rate)
      .def_readonly("delivered", &ToyReport::delivered)
      .def_readonly("trials", &ToyReport::trials)
      .def_readonly("bound_product", &ToyReport::bound_product)
      .def_readonly("bound_linear", &ToyReport::bound_linear)
      .def_readonly("meets_bounds", &ToyReport::meets_bounds)
      .def_readonly("baseline_rate", &ToyReport::baseline_rate);

  m.def("parse_experiment_config", &parse_experiment_config, py::arg("text"),
        py::arg("origin") = "<string>");
  m.def("load_experiment_config", &load_experiment_config);
  m.def(
      "monte_carlo",
      [](const std::string& config_json) {
        ExperimentConfig cfg = parse_experiment_config(config_json);
        return monte_carlo(cfg);
      },
      py::arg("config_json"));
  m.def("exact_precondition_probability", &exact_precondition_probability, py::arg("rn"),
        py::arg("p"));
  m.def("enumerate_exact", &enumerate_exact, py::arg("rn"), py::arg("scheme"), py::arg("env"),
        py::arg("master_seed"), py::arg("adversary"), py::arg("adversary_q"), py::arg("horizon"),
        py::arg("p"));
  m.def(
      "slope_fit",
      [](const std::vector<std::pair<double, double>>& points) {
        std::vector<SlopePoint> pts;
        pts.reserve(points.size());
        for (const auto& [p, failure] : points) pts.push_back({p, failure});
        return slope_fit(pts);
      },
      py::arg("points"));
  m.def("toy_bound_experiment", &toy_bound_experiment, py::arg("n"), py::arg("h"), py::arg("p"),
        py::arg("trials"), py::arg("seed"), py::arg("threads") = 0,
        py::arg("with_baseline") = false);
  m.def("wilson95", [](std::uint32_t successes, std::uint32_t n) {
    WilsonInterval ci = wilson95(successes, n);
    return std::make_pair(ci.lo, ci.hi);
  });
}
