#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace heatlab {

using Vertex = std::size_t;
using Json = nlohmann::json;

struct Edge {
  Vertex u;
  Vertex v;
  double w;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  Vertex v;
  double w;
};

struct GraphMeta {
  std::string family;
  Json params = Json::object();
};

/// Finite connected undirected graph with positive edge weights.
///
/// Vertex ids are 0..n-1. The edge list is stored canonically (u < v, sorted
/// lexicographically) and the vertex measure is mu(x) = sum of incident
/// weights. Immutable after construction.
class WeightedGraph {
 public:
  /// Validates and canonicalizes. Throws Error(invalid_parameter) on
  /// self-loops, non-positive weights, out-of-range ids, duplicate edges or a
  /// disconnected vertex set.
  WeightedGraph(std::size_t n, std::vector<Edge> edges, GraphMeta meta);

  std::size_t n() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  double mu(Vertex x) const { return mu_[x]; }
  const GraphMeta& meta() const noexcept { return meta_; }

  std::span<const Neighbor> neighbors(Vertex x) const {
    return {adj_.data() + offsets_[x], adj_.data() + offsets_[x + 1]};
  }
  std::size_t degree(Vertex x) const { return offsets_[x + 1] - offsets_[x]; }

  /// Returns the weight of edge {x,y}, or 0 if absent.
  double weight(Vertex x, Vertex y) const;

  void check_vertex(Vertex x) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<double> mu_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adj_;
  GraphMeta meta_;
};

// Generators. All are deterministic and produce unit weights.

/// Box lattice {0..side-1}^dim, row-major ids (last coordinate fastest).
WeightedGraph gen_lattice(int dim, int side);

/// Level-n Sierpinski gasket graph: 3(3^n+1)/2 vertices, 3^(n+1) edges.
/// Vertices are sorted by (row, column) in triangular coordinates; vertex 0
/// is the corner (0,0).
WeightedGraph gen_sierpinski(int level);

/// Id of the gasket vertex at triangular coordinates (i, j), or throws
/// Error(domain) if (i, j) is not a vertex of the level-n gasket.
Vertex sierpinski_vertex(int level, int i, int j);

/// Cartesian product. Vertex (a, b) gets id a * g2.n() + b.
WeightedGraph gen_product(const WeightedGraph& g1, const WeightedGraph& g2);

/// Two side x side boxes joined by one unit edge between the middle of the
/// right column of the first box and the middle of the left column of the
/// second. meta.params["bridge"] holds the endpoints.
WeightedGraph gen_bottleneck(int side);

// Metric vocabulary. Distances are hop counts.

/// Breadth-first hop distances from x; unreachable vertices get -1.
std::vector<int> bfs_distances(const WeightedGraph& g, Vertex x);

/// Multi-source hop distances d(A, .) = min over a in A.
std::vector<int> bfs_distances(const WeightedGraph& g, std::span<const Vertex> sources);

/// Hop distances from x, explored only up to max_radius; farther vertices
/// get -1.
std::vector<int> bfs_distances_within(const WeightedGraph& g, Vertex x, int max_radius);

int distance(const WeightedGraph& g, Vertex x, Vertex y);

/// d(A,B) = min over pairs.
int set_distance(const WeightedGraph& g, std::span<const Vertex> a, std::span<const Vertex> b);

/// Open ball B(x,R) = {d < R} and sphere S(x,R) = {d = R}, both sorted.
struct Ball {
  Vertex center = 0;
  int radius = 0;
  std::vector<Vertex> interior;
  std::vector<Vertex> sphere;
  std::size_t graph_size = 0;

  bool proper() const noexcept { return !interior.empty() && interior.size() < graph_size; }
  bool contains(Vertex y) const;
};

Ball ball(const WeightedGraph& g, Vertex x, int radius);

/// Same as ball() but throws Error(ball_escapes_graph) unless the interior is
/// a nonempty proper subset of the vertex set.
Ball proper_ball(const WeightedGraph& g, Vertex x, int radius);

/// Closed ball {d <= R}, sorted.
std::vector<Vertex> closed_ball(const WeightedGraph& g, Vertex x, int radius);

/// One fixed shortest path x -> y (each step keeps the smallest-id vertex one
/// hop closer to x).
std::vector<Vertex> shortest_path(const WeightedGraph& g, Vertex x, Vertex y);

/// x = x_0, ..., x_l = y on shortest_path(x, y), hop counts split as evenly
/// as possible with the longer links first.
std::vector<Vertex> geodesic_chain(const WeightedGraph& g, Vertex x, Vertex y, int links);

/// Boolean membership mask of size g.n().
std::vector<char> indicator(std::size_t n, std::span<const Vertex> set);

// Serialization: {"meta": {"family", "params"}, "n", "edges": [[u,v,w],...]}.

Json to_json(const WeightedGraph& g);
WeightedGraph graph_from_json(const Json& j);
std::string serialize(const WeightedGraph& g);
WeightedGraph load_graph(const std::string& path);
void save_graph(const WeightedGraph& g, const std::string& path);

/// FNV-1a 64 of serialize(g), as 16 hex digits.
std::string graph_hash(const WeightedGraph& g);

}  // namespace heatlab
