#include <doctest.h>

#include <filesystem>
#include <set>

#include "reinforce/graph.hpp"

using namespace reinforce;

namespace {

// Independent adjacency oracle: decode coordinates and count pairs differing
// by one in exactly one dimension.
std::size_t brute_force_undirected_edges(const GridSpec& spec) {
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < spec.d; ++i) n *= spec.q;
  std::size_t edges = 0;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId w = v + 1; w < n; ++w) {
      auto cv = grid_coords(spec, v), cw = grid_coords(spec, w);
      int diff_dims = 0;
      bool unit = true;
      for (std::uint32_t i = 0; i < spec.d; ++i) {
        if (cv[i] != cw[i]) {
          ++diff_dims;
          std::uint32_t lo = std::min(cv[i], cw[i]), hi = std::max(cv[i], cw[i]);
          bool adjacent = hi - lo == 1;
          if (spec.wraparound && spec.q > 2) adjacent = adjacent || (lo == 0 && hi == spec.q - 1);
          unit = unit && adjacent;
        }
      }
      if (diff_dims == 1 && unit) ++edges;
    }
  }
  return edges;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("make_path produces the expected arcs") {
  Network p9 = make_path(9);
  CHECK(p9.node_count() == 9);
  CHECK(p9.arc_count() == 8);

  Network p2 = make_path(2);
  CHECK(p2.arcs() == std::vector<Arc>{{0, 1}});

  Network p5 = make_path(5);
  CHECK(p5.arcs() == std::vector<Arc>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});

  CHECK_THROWS_AS(make_path(1), InvalidArgument);
}

TEST_CASE("make_grid matches the brute-force adjacency oracle") {
  GridSpec g62{6, 2, false};
  Network net = make_grid(g62);
  CHECK(net.node_count() == 36);
  CHECK(brute_force_undirected_edges(g62) == 60);
  CHECK(net.arc_count() == 120);

  // q=2, d=1 grid is the two-node path topology, one arc per direction.
  Network tiny = make_grid({2, 1, false});
  CHECK(tiny.node_count() == 2);
  CHECK(tiny.arcs() == std::vector<Arc>{{0, 1}, {1, 0}});

  // 3-cycle.
  Network cycle = make_grid({3, 1, true});
  CHECK(cycle.node_count() == 3);
  CHECK(cycle.arc_count() == 6);

  // q=2 wraparound adds no duplicate adjacency.
  CHECK(make_grid({2, 3, true}) == make_grid({2, 3, false}));
}

TEST_CASE("grid generators agree with the oracle across small specs") {
  for (std::uint32_t q = 2; q <= 5; ++q) {
    for (std::uint32_t d = 1; d <= 3; ++d) {
      for (bool wrap : {false, true}) {
        GridSpec spec{q, d, wrap};
        Network net = make_grid(spec);
        CHECK(net.arc_count() == 2 * brute_force_undirected_edges(spec));
        // Undirected count for plain grids: d*(q-1)*q^(d-1).
        if (!wrap) {
          std::size_t expected = d * (q - 1);
          for (std::uint32_t i = 0; i + 1 < d; ++i) expected *= q;
          CHECK(net.arc_count() == 2 * expected);
        }
      }
    }
  }
}

TEST_CASE("grid coordinates are mixed-radix, least significant dimension first") {
  GridSpec spec{3, 2, false};
  CHECK(grid_node_id(spec, {1, 2}) == 7);
  CHECK(grid_coords(spec, 7) == std::vector<std::uint32_t>{1, 2});
}

TEST_CASE("grid node-count overflow is rejected") {
  CHECK_THROWS_AS(make_grid({1000, 4, false}), InvalidArgument);
  CHECK_THROWS_AS(make_grid({2, 40, false}), InvalidArgument);
}

TEST_CASE("network validation rejects bad arc lists") {
  CHECK_THROWS_AS(Network(3, {{0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Network(3, {{0, 1}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Network(3, {{0, 3}}), InvalidArgument);
}

TEST_CASE("network JSON round-trips and rejects malformed input") {
  Network p9 = make_path(9);
  std::string path = temp_path("reinforce_test_graph.json");
  save_network(p9, path);
  CHECK(load_network(path) == p9);
  std::filesystem::remove(path);

  CHECK(parse_network_json(R"({"n":3,"arcs":[[0,1],[1,2]]})") == make_path(3));
  CHECK_THROWS_AS(parse_network_json(R"({"n":2,"arcs":[[0,0]]})"), ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"n":2,"arcs":[[0,5]]})"), ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"n":2)"), ParseError);

  // Saved output is byte-stable.
  CHECK(network_to_json(p9) == network_to_json(parse_network_json(network_to_json(p9))));
}
