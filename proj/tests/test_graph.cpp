#include <doctest.h>

#include <algorithm>
#include <queue>
#include <set>

#include "heatlab/error.hpp"
#include "heatlab/graph.hpp"
#include "heatlab/rng.hpp"

using namespace heatlab;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected heatlab::Error");
  return Errc::io;
}

// Components of the edge list with one edge removed, by plain BFS.
int components_without(const WeightedGraph& g, Vertex a, Vertex b) {
  std::vector<std::vector<Vertex>> adj(g.n());
  for (const auto& e : g.edges()) {
    if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) continue;
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> seen(g.n(), 0);
  int comps = 0;
  for (Vertex s = 0; s < g.n(); ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<Vertex> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const Vertex v = q.front();
      q.pop();
      for (Vertex w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          q.push(w);
        }
    }
  }
  return comps;
}

// Gasket vertex count by the recurrence V(0) = 3, V(n+1) = 3 V(n) - 3.
std::size_t gasket_vertices(int level) {
  std::size_t v = 3;
  for (int k = 0; k < level; ++k) v = 3 * v - 3;
  return v;
}

}  // namespace

TEST_CASE("lattice generator") {
  const auto p = gen_lattice(1, 5);
  CHECK(p.n() == 5);
  CHECK(p.edges().size() == 4);
  CHECK(p.mu(2) == 2.0);
  CHECK(p.mu(0) == 1.0);

  const auto g = gen_lattice(2, 3);
  CHECK(g.n() == 9);
  CHECK(g.edges().size() == 12);

  const auto big = gen_lattice(2, 33);
  CHECK(big.mu(0) == 2.0);
  CHECK(big.mu(33 * 33 - 1) == 2.0);
  CHECK(big.mu(16 * 33 + 16) == 4.0);

  CHECK(gen_lattice(3, 4).edges().size() == 3 * 16 * 3);
  CHECK(code_of([] { gen_lattice(1, 2); }) == Errc::invalid_parameter);
  CHECK(code_of([] { gen_lattice(4, 3); }) == Errc::invalid_parameter);
}

TEST_CASE("gasket generator") {
  const auto g0 = gen_sierpinski(0);
  CHECK(g0.n() == 3);
  CHECK(g0.edges().size() == 3);
  const auto g1 = gen_sierpinski(1);
  CHECK(g1.n() == 6);
  CHECK(g1.edges().size() == 9);
  CHECK(gen_sierpinski(3).n() == 42);

  for (int level = 0; level <= 6; ++level) {
    const auto g = gen_sierpinski(level);
    CHECK(g.n() == gasket_vertices(level));
    std::size_t e = 3;
    for (int k = 0; k < level; ++k) e *= 3;
    CHECK(g.edges().size() == e);
    // Corners have degree 2, every other vertex degree 4.
    int corners = 0;
    for (Vertex v = 0; v < g.n(); ++v) {
      if (g.degree(v) == 2) ++corners;
      else CHECK(g.degree(v) == 4);
    }
    CHECK(corners == 3);
  }
  CHECK(code_of([] { gen_sierpinski(10); }) == Errc::invalid_parameter);
  CHECK(code_of([] { sierpinski_vertex(2, 3, 3); }) == Errc::domain);
  CHECK(sierpinski_vertex(2, 1, 1) < gen_sierpinski(2).n());
  CHECK(sierpinski_vertex(3, 0, 0) == 0);
}

TEST_CASE("product generator") {
  const auto grid = gen_product(gen_lattice(1, 3), gen_lattice(1, 3));
  CHECK(grid.edges() == gen_lattice(2, 3).edges());

  // K2 x K2 is the 4-cycle.
  const WeightedGraph k2(2, {{0, 1, 1.0}}, {"k2", Json::object()});
  const auto sq = gen_product(k2, k2);
  CHECK(sq.n() == 4);
  CHECK(sq.edges().size() == 4);
  for (Vertex v = 0; v < 4; ++v) CHECK(sq.degree(v) == 2);

  // path-3 x triangle: degree = path degree + 2.
  const auto pt = gen_product(gen_lattice(1, 3), gen_sierpinski(0));
  CHECK(pt.n() == 9);
  for (Vertex a = 0; a < 3; ++a)
    for (Vertex b = 0; b < 3; ++b) CHECK(pt.degree(a * 3 + b) == (a == 1 ? 4u : 3u));

  const auto pg = gen_product(gen_lattice(1, 65), gen_sierpinski(4));
  CHECK(pg.meta().family == "product");
  CHECK(pg.n() == 65 * gasket_vertices(4));
  CHECK(components_without(pg, 0, 0) == 1);
}

TEST_CASE("bottleneck generator") {
  const auto b3 = gen_bottleneck(3);
  CHECK(b3.n() == 18);
  CHECK(b3.edges().size() == 25);

  const auto b5 = gen_bottleneck(5);
  const auto bridge = b5.meta().params.at("bridge");
  const Vertex l = bridge[0].get<Vertex>(), r = bridge[1].get<Vertex>();
  CHECK(b5.mu(l) == static_cast<double>(b5.degree(l)));
  CHECK(b5.degree(l) == 4);  // middle of a box side (3) plus the bridge
  CHECK(b5.degree(r) == 4);

  const auto b9 = gen_bottleneck(9);
  const auto br = b9.meta().params.at("bridge");
  CHECK(components_without(b9, br[0].get<Vertex>(), br[1].get<Vertex>()) == 2);
  CHECK(code_of([] { gen_bottleneck(2); }) == Errc::invalid_parameter);
}

TEST_CASE("constructor validation") {
  CHECK(code_of([] { WeightedGraph(3, {{0, 0, 1.0}, {0, 1, 1}, {1, 2, 1}}, {}); }) == Errc::invalid_parameter);
  CHECK(code_of([] { WeightedGraph(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1}}, {}); }) == Errc::invalid_parameter);
  CHECK(code_of([] { WeightedGraph(3, {{0, 1, -1.0}, {1, 2, 1}}, {}); }) == Errc::invalid_parameter);
  CHECK(code_of([] { WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1}}, {}); }) == Errc::invalid_parameter);
  CHECK(code_of([] { WeightedGraph(2, {{0, 5, 1.0}}, {}); }) == Errc::invalid_parameter);

  // Canonical edge order regardless of input order.
  const WeightedGraph g(3, {{2, 1, 2.0}, {1, 0, 1.0}}, {});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0] == Edge{0, 1, 1.0});
  CHECK(g.edges()[1] == Edge{1, 2, 2.0});
  CHECK(g.mu(1) == 3.0);
}

TEST_CASE("balls") {
  const auto p = gen_lattice(1, 9);
  const auto b1 = ball(p, 4, 1);
  CHECK(b1.interior == std::vector<Vertex>{4});
  CHECK(b1.sphere == std::vector<Vertex>{3, 5});
  CHECK(ball(p, 4, 4).interior.size() == 7);
  const auto b3 = ball(p, 4, 3);
  CHECK(std::is_sorted(b3.sphere.begin(), b3.sphere.end()));

  const auto g3 = gen_sierpinski(3);
  const Vertex corner = sierpinski_vertex(3, 0, 0);
  const auto b = ball(g3, corner, 2);
  CHECK(b.interior == std::vector<Vertex>{corner, sierpinski_vertex(3, 1, 0), sierpinski_vertex(3, 0, 1)});

  CHECK(code_of([&] { proper_ball(p, 4, 5); }) == Errc::ball_escapes_graph);
  CHECK(code_of([&] { proper_ball(p, 4, 0); }) == Errc::invalid_parameter);
  CHECK(proper_ball(p, 4, 4).proper());
}

TEST_CASE("distances and chains") {
  const auto p = gen_lattice(1, 9);
  CHECK(distance(p, 3, 3) == 0);
  CHECK(distance(p, 0, 8) == 8);
  const auto g1 = gen_sierpinski(1);
  CHECK(distance(g1, sierpinski_vertex(1, 0, 0), sierpinski_vertex(1, 2, 0)) == 2);
  CHECK(distance(g1, sierpinski_vertex(1, 0, 0), sierpinski_vertex(1, 0, 2)) == 2);

  const auto line = gen_lattice(1, 20);
  CHECK(geodesic_chain(line, 2, 8, 2) == std::vector<Vertex>{2, 5, 8});
  const auto c7 = geodesic_chain(line, 2, 9, 2);
  REQUIRE(c7.size() == 3);
  CHECK(c7[1] - c7[0] == 4);  // longer link first
  CHECK(c7[2] - c7[1] == 3);
  const auto g3 = gen_sierpinski(3);
  const Vertex a = sierpinski_vertex(3, 0, 0), b = sierpinski_vertex(3, 8, 0);
  CHECK(geodesic_chain(g3, a, b, 1) == std::vector<Vertex>{a, b});
  CHECK(code_of([&] { geodesic_chain(line, 2, 5, 4); }) == Errc::degenerate_chain);
}

TEST_CASE("metric properties on sampled triples") {
  const WeightedGraph graphs[] = {gen_lattice(2, 9), gen_sierpinski(4), gen_bottleneck(5)};
  RngStream rng(11, 0);
  for (const auto& g : graphs) {
    for (int s = 0; s < 40; ++s) {
      const Vertex x = rng() % g.n(), y = rng() % g.n(), z = rng() % g.n();
      const int dxy = distance(g, x, y);
      CHECK((dxy == 0) == (x == y));
      CHECK(dxy == distance(g, y, x));
      CHECK(distance(g, x, z) <= dxy + distance(g, y, z));

      // Geodesic property, by construction on the shortest path.
      const auto path = shortest_path(g, x, y);
      REQUIRE(path.size() == static_cast<std::size_t>(dxy) + 1);
      for (int k = 0; k <= dxy; ++k) {
        CHECK(distance(g, x, path[k]) == k);
        CHECK(distance(g, path[k], y) == dxy - k);
      }
      for (int R = 1; R < 6; ++R) {
        const auto inner = ball(g, x, R).interior, outer = ball(g, x, R + 1).interior;
        CHECK(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
      }
    }
  }
}

TEST_CASE("serialization") {
  const auto g = gen_sierpinski(3);
  CHECK(serialize(g) == serialize(gen_sierpinski(3)));
  CHECK(graph_hash(g) == graph_hash(gen_sierpinski(3)));
  CHECK(graph_hash(g) != graph_hash(gen_sierpinski(4)));

  const auto back = graph_from_json(Json::parse(serialize(g)));
  CHECK(serialize(back) == serialize(g));
  CHECK(back.meta().family == "sierpinski");

  const auto j = to_json(gen_lattice(1, 3));
  CHECK(j.at("n") == 3);
  CHECK(j.at("edges") == Json::parse("[[0,1,1.0],[1,2,1.0]]"));
  CHECK(code_of([] { graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 1]]})")); }) == Errc::invalid_parameter);
}
