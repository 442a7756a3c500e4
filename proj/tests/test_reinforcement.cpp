#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "reinforce/reinforcement.hpp"

using namespace reinforce;

namespace {

// Independent enumeration of E' straight from the definition.
std::set<std::pair<std::uint32_t, std::uint32_t>> oracle_eprime(const ReinforcedNetwork& rn) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> arcs;
  const std::uint32_t ell = rn.ell();
  for (const Arc& a : rn.original().arcs()) {
    bool matched = rn.arc_matched(a.src, a.dst);
    for (std::uint32_t i = 1; i <= ell; ++i) {
      for (std::uint32_t j = 1; j <= ell; ++j) {
        if (matched && i != j) continue;
        arcs.insert({rn.flat_id({a.src, i}), rn.flat_id({a.dst, j})});
      }
    }
  }
  return arcs;
}

}  // namespace

TEST_CASE("strong reinforcement blow-up factors") {
  Network net = make_path(9);

  ReinforcedNetwork byz = build_strong(net, 1, FaultKind::Byz);
  CHECK(byz.ell() == 3);
  CHECK(byz.vprime_count() == 27);
  CHECK(byz.eprime_count() == 72);
  Metrics mb = metrics(byz);
  CHECK(mb.nu == 3.0);
  CHECK(mb.eta == 9.0);

  ReinforcedNetwork om = build_strong(net, 1, FaultKind::Om);
  CHECK(om.ell() == 2);
  CHECK(om.vprime_count() == 18);
  CHECK(om.eprime_count() == 32);
  Metrics mo = metrics(om);
  CHECK(mo.nu == 2.0);
  CHECK(mo.eta == 4.0);

  ReinforcedNetwork id = build_strong(net, 0, FaultKind::Byz);
  CHECK(id.ell() == 1);
  CHECK(id.vprime_count() == net.node_count());
  CHECK(id.eprime_count() == net.arc_count());

  ReinforcedNetwork byz2 = build_strong(net, 2, FaultKind::Byz);
  Metrics m2 = metrics(byz2);
  CHECK(m2.nu == 5.0);
  CHECK(m2.eta == 25.0);
}

TEST_CASE("partitioned reinforcement arc counts follow the eps identity") {
  // path(6) with segments of 3: one crossing arc of five, eps = 1/5.
  Network net = make_path(6);
  Partition part = path_partition(6, 3);

  ReinforcedNetwork om = build_partitioned(net, 1, part, FaultKind::Om);
  CHECK(om.intra_arc_count() == 4);
  CHECK(om.cross_arc_count() == 1);
  CHECK(om.eprime_count() == 12);
  Metrics mo = metrics(om);
  CHECK(*mo.eta == doctest::Approx(2.4));
  CHECK(*mo.eps_hat == doctest::Approx(0.2));

  ReinforcedNetwork byz = build_partitioned(net, 1, part, FaultKind::Byz);
  CHECK(byz.eprime_count() == 21);
  CHECK(*metrics(byz).eta == doctest::Approx(4.2));

  ReinforcedNetwork om2 = build_partitioned(make_path(5), 2, path_partition(5, 4), FaultKind::Om);
  // eps = 1/4, ell = 3: eta = 0.75*3 + 0.25*9 = 4.5.
  CHECK(*metrics(om2).eta == doctest::Approx(4.5));
}

TEST_CASE("single-region partition yields disjoint copies, singletons match strong") {
  Network net = make_path(5);

  ReinforcedNetwork whole =
      build_partitioned(net, 1, Partition(5, {{0, 1, 2, 3, 4}}), FaultKind::Om);
  CHECK(whole.eprime_count() == 2 * net.arc_count());
  for (const auto& [s, d] : whole.flattened_arcs()) {
    CHECK(s % whole.ell() == d % whole.ell());  // copy planes never mix
  }

  Partition singletons(5, {{0}, {1}, {2}, {3}, {4}});
  ReinforcedNetwork split = build_partitioned(net, 1, singletons, FaultKind::Om);
  ReinforcedNetwork strong = build_strong(net, 1, FaultKind::Om);
  CHECK(split.flattened_arcs() == strong.flattened_arcs());
}

TEST_CASE("flattened arcs match the definitional enumeration") {
  GridSpec spec{4, 2, false};
  Network net = make_grid(spec);
  Partition part = hypercube_partition(spec, 2);
  for (FaultKind kind : {FaultKind::Byz, FaultKind::Om}) {
    ReinforcedNetwork rn = build_partitioned(net, 1, part, kind);
    auto expected = oracle_eprime(rn);
    auto actual = rn.flattened_arcs();
    CHECK(actual.size() == expected.size());
    CHECK(std::set(actual.begin(), actual.end()) == expected);
    CHECK(rn.eprime_count() == expected.size());
  }
}

TEST_CASE("every reinforced arc projects onto an original arc") {
  Network net = make_grid({3, 2, true});
  ReinforcedNetwork rn = build_partitioned(net, 1, hypercube_partition({3, 2, true}, 3),
                                           FaultKind::Byz);
  std::size_t per_arc_min = rn.ell();
  for (const auto& [s, d] : rn.flattened_arcs()) {
    CopyId cs = rn.from_flat(s), cd = rn.from_flat(d);
    CHECK(net.arc_index(cs.base, cd.base) != Network::npos);
  }
  // Every original arc has at least ell preimages.
  for (const Arc& a : net.arcs()) {
    std::size_t count = 0;
    for (const auto& [s, d] : rn.flattened_arcs()) {
      if (rn.from_flat(s).base == a.src && rn.from_flat(d).base == a.dst) ++count;
    }
    CHECK(count >= per_arc_min);
  }
}

TEST_CASE("projection and copies are mutually inverse") {
  Network net = make_path(4);
  ReinforcedNetwork rn = build_strong(net, 1, FaultKind::Byz);
  std::set<std::uint32_t> seen;
  for (NodeId v = 0; v < 4; ++v) {
    auto copies = rn.copies_of(v);
    CHECK(copies.size() == 3);
    for (const CopyId& c : copies) {
      CHECK(rn.project(c) == v);
      CHECK(rn.from_flat(rn.flat_id(c)) == c);
      seen.insert(rn.flat_id(c));
    }
  }
  CHECK(seen.size() == rn.vprime_count());  // copies_of partitions V'
  CHECK_THROWS_AS(rn.project(CopyId{9, 1}), InvalidArgument);
  CHECK_THROWS_AS(rn.project(CopyId{0, 4}), InvalidArgument);
}

TEST_CASE("sender groups select the wired copies") {
  Network net = make_path(6);
  Partition part = path_partition(6, 3);
  ReinforcedNetwork rn = build_partitioned(net, 1, part, FaultKind::Byz);

  // Arc (1,2) stays inside region {0,1,2}: matched copies only.
  auto matched = rn.sender_copies(CopyId{2, 2}, 1);
  CHECK(matched == std::vector<CopyId>{{1, 2}});
  // Arc (2,3) crosses: full group.
  auto cross = rn.sender_copies(CopyId{3, 1}, 2);
  CHECK(cross.size() == 3);
  CHECK_THROWS_AS(rn.sender_copies(CopyId{3, 1}, 0), InvalidArgument);
}

TEST_CASE("metrics handles the edgeless graph") {
  Network net(3, {});
  ReinforcedNetwork rn = build_strong(net, 1, FaultKind::Om);
  Metrics m = metrics(rn);
  CHECK(m.nu == 2.0);
  CHECK_FALSE(m.eta.has_value());
}

TEST_CASE("reinforced network JSON round-trips") {
  Network net = make_path(6);
  ReinforcedNetwork rn = build_partitioned(net, 1, path_partition(6, 3), FaultKind::Om);
  std::string path =
      (std::filesystem::temp_directory_path() / "reinforce_test_rn.json").string();
  save_reinforced(rn, path);
  ReinforcedNetwork loaded = load_reinforced(path);
  std::filesystem::remove(path);
  CHECK(loaded.mode() == rn.mode());
  CHECK(loaded.f() == rn.f());
  CHECK(loaded.original() == rn.original());
  CHECK(loaded.flattened_arcs() == rn.flattened_arcs());

  CHECK_THROWS_AS(parse_reinforced_json(R"({"mode":"strong_om"})"), ParseError);
}
