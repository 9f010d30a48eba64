#include "doctest.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "dirac_graph/graph.hpp"

using namespace dgraph;

namespace {

const ExampleKind all_kinds[] = {ExampleKind::chain, ExampleKind::decorated_chain,
                                 ExampleKind::ladder, ExampleKind::strip,
                                 ExampleKind::square_lattice};

std::vector<int> cells_for(const PeriodicGraph& g, int n) {
  return std::vector<int>(g.dim(), n);
}

}  // namespace

TEST_CASE("example cells match their descriptions") {
  auto chain = build_example(ExampleKind::chain);
  CHECK(chain.dim() == 1);
  CHECK(chain.cell().edge_count() == 1);
  CHECK(chain.cell().edge(0).length == 1.0);
  CHECK(chain.orbit_count() == 1);
  auto q = chain.quotient();
  CHECK(q.vertex_count() == 1);
  CHECK(q.edge_count() == 1);
  CHECK(q.edge(0).tail == q.edge(0).head);

  auto sq = build_example(ExampleKind::square_lattice);
  CHECK(sq.dim() == 2);
  CHECK(sq.orbit_count() == 1);
  CHECK(sq.cell().edge_count() == 2);
  auto sqq = sq.quotient();
  CHECK(sqq.vertex_count() == 1);
  CHECK(sqq.edge_count() == 2);
  for (const auto& e : sqq.edges()) CHECK(e.tail == e.head);

  auto ladder = build_example(ExampleKind::ladder);
  CHECK(ladder.orbit_count() == 2);
  CHECK(ladder.cell().edge_count() == 3);

  auto strip = build_example(ExampleKind::strip);
  CHECK(strip.orbit_count() == 3);
  CHECK(strip.cell().edge_count() == 5);

  auto deco = build_example(ExampleKind::decorated_chain, {1.0, 2.5});
  CHECK(deco.orbit_count() == 2);
  CHECK(deco.cell().edge_count() == 2);
  CHECK(deco.quotient().total_length() == doctest::Approx(3.5));
}

TEST_CASE("degenerate lengths are rejected") {
  CHECK_THROWS_AS(build_example(ExampleKind::decorated_chain, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_example(ExampleKind::chain, {-1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MetricGraph(2, {{0, 1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MetricGraph(3, {{0, 1, 1.0}}), std::invalid_argument);
}

TEST_CASE("example names round trip") {
  for (auto k : all_kinds) CHECK(parse_example_kind(to_string(k)) == k);
  CHECK_THROWS(parse_example_kind("hexagon"));
}

TEST_CASE("closure counts") {
  auto ring = close_periodically(build_example(ExampleKind::chain), {8});
  CHECK(ring.graph().vertex_count() == 8);
  CHECK(ring.graph().edge_count() == 8);
  for (int v = 0; v < 8; ++v) CHECK(ring.graph().degree(v) == 2);
  CHECK(ring.graph().total_length() == doctest::Approx(8.0));

  auto ladder = close_periodically(build_example(ExampleKind::ladder), {4});
  CHECK(ladder.graph().vertex_count() == 8);
  CHECK(ladder.graph().edge_count() == 12);

  auto sq = close_periodically(build_example(ExampleKind::square_lattice), {3, 3});
  CHECK(sq.graph().vertex_count() == 9);
  CHECK(sq.graph().edge_count() == 18);
  for (int v = 0; v < 9; ++v) CHECK(sq.graph().degree(v) == 4);

  CHECK_THROWS_AS(close_periodically(build_example(ExampleKind::chain), {2}), std::invalid_argument);
  CHECK_THROWS_AS(close_periodically(build_example(ExampleKind::square_lattice), {3}),
                  std::invalid_argument);
}

TEST_CASE("incidence is consistent for every example and closure") {
  for (auto k : all_kinds) {
    auto g = build_example(k);
    CHECK(g.cell().incidence_consistent());
    CHECK(patch_connected(g));
    for (int n : {3, 4, 5}) {
      auto c = close_periodically(g, cells_for(g, n));
      CHECK(c.graph().incidence_consistent());
      CHECK(c.is_closure());
      CHECK(c.graph().total_length() ==
            doctest::Approx(c.cell_count() * g.cell().total_length()));
    }
  }
}

TEST_CASE("translations are length-preserving automorphisms") {
  for (auto kind : all_kinds) {
    auto g = build_example(kind, {1.0, 1.7});
    auto c = close_periodically(g, cells_for(g, 4));
    const auto& G = c.graph();
    std::vector<Shift> shifts;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < (g.dim() == 2 ? 4 : 1); ++j) shifts.push_back({i, j});
    for (const Shift& k : shifts) {
      auto vp = c.translate_vertices(k);
      auto ep = c.translate_edges(k);
      std::vector<int> vs = vp, es = ep;
      std::sort(vs.begin(), vs.end());
      std::sort(es.begin(), es.end());
      for (int i = 0; i < G.vertex_count(); ++i) CHECK(vs[i] == i);
      for (int i = 0; i < G.edge_count(); ++i) CHECK(es[i] == i);
      for (int e = 0; e < G.edge_count(); ++e) {
        const Edge& a = G.edge(e);
        const Edge& b = G.edge(ep[e]);
        CHECK(a.length == b.length);
        CHECK(vp[a.tail] == b.tail);
        CHECK(vp[a.head] == b.head);
        CHECK(c.edge_origin(e) == c.edge_origin(ep[e]));
      }
    }
  }
}

TEST_CASE("translation composition law") {
  auto g = build_example(ExampleKind::square_lattice);
  auto c = close_periodically(g, {3, 4});
  for (int a = -3; a < 4; ++a)
    for (int b = -2; b < 3; ++b) {
      Shift k{a, b}, l{b, -a};
      auto pk = c.translate_edges(k), pl = c.translate_edges(l);
      auto pkl = c.translate_edges({a + b, b - a});
      for (int e = 0; e < c.graph().edge_count(); ++e) CHECK(pl[pk[e]] == pkl[e]);
    }
}

TEST_CASE("bloch cell carries windings") {
  auto bc = bloch_cell(build_example(ExampleKind::chain));
  CHECK(bc.graph().vertex_count() == 1);
  CHECK(bc.graph().edge(0).winding[0] == 1);
  auto sq = bloch_cell(build_example(ExampleKind::square_lattice));
  CHECK(sq.graph().edge(0).winding == Shift{1, 0});
  CHECK(sq.graph().edge(1).winding == Shift{0, 1});
  auto ladder = bloch_cell(build_example(ExampleKind::ladder));
  int wound = 0;
  for (const auto& e : ladder.graph().edges()) wound += e.winding[0];
  CHECK(wound == 2);
}

TEST_CASE("inconsistent gluings are rejected") {
  MetricGraph cell(2, {{0, 1, 1.0}});
  CHECK_THROWS_AS(PeriodicGraph(cell, 1, {Gluing{{{1, 0}, {0, 1}}}}), std::invalid_argument);
}
