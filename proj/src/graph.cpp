#include "heatlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <utility>

#include "heatlab/error.hpp"
#include "heatlab/io.hpp"

namespace heatlab {

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges, GraphMeta meta)
    : n_(n), edges_(std::move(edges)), meta_(std::move(meta)) {
  if (n_ < 2) throw Error(Errc::invalid_parameter, "graph needs at least 2 vertices");
  for (auto& e : edges_) {
    if (e.u >= n_ || e.v >= n_) throw Error(Errc::invalid_parameter, "edge endpoint out of range");
    if (e.u == e.v) throw Error(Errc::invalid_parameter, "self-loop at vertex " + std::to_string(e.u));
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw Error(Errc::invalid_parameter, "edge weight must be positive and finite");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
      throw Error(Errc::invalid_parameter, "duplicate edge {" + std::to_string(edges_[i].u) + "," +
                                               std::to_string(edges_[i].v) + "}");
  }

  mu_.assign(n_, 0.0);
  offsets_.assign(n_ + 1, 0);
  for (const auto& e : edges_) {
    mu_[e.u] += e.w;
    mu_[e.v] += e.w;
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  adj_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) adj_[fill[e.u]++] = {e.v, e.w};
  for (const auto& e : edges_) adj_[fill[e.v]++] = {e.u, e.w};
  for (std::size_t x = 0; x < n_; ++x) {
    std::sort(adj_.begin() + offsets_[x], adj_.begin() + offsets_[x + 1],
              [](const Neighbor& a, const Neighbor& b) { return a.v < b.v; });
  }

  const auto dist = bfs_distances(*this, Vertex{0});
  if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; }))
    throw Error(Errc::invalid_parameter, "graph is not connected");
}

double WeightedGraph::weight(Vertex x, Vertex y) const {
  check_vertex(x);
  check_vertex(y);
  auto row = neighbors(x);
  auto it = std::lower_bound(row.begin(), row.end(), y,
                             [](const Neighbor& nb, Vertex v) { return nb.v < v; });
  return (it != row.end() && it->v == y) ? it->w : 0.0;
}

void WeightedGraph::check_vertex(Vertex x) const {
  if (x >= n_)
    throw Error(Errc::domain, "vertex " + std::to_string(x) + " out of range (n=" + std::to_string(n_) + ")");
}

// ---------------------------------------------------------------------------
// Generators

WeightedGraph gen_lattice(int dim, int side) {
  if (dim < 1 || dim > 3) throw Error(Errc::invalid_parameter, "lattice dim must be 1, 2 or 3");
  if (side < 3) throw Error(Errc::invalid_parameter, "lattice side must be >= 3");
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(side);
  std::vector<Edge> edges;
  edges.reserve(n * dim);
  // stride of axis k is side^(dim-1-k)
  for (std::size_t id = 0; id < n; ++id) {
    std::size_t stride = 1;
    for (int k = dim - 1; k >= 0; --k) {
      const std::size_t coord = (id / stride) % side;
      if (coord + 1 < static_cast<std::size_t>(side)) edges.push_back({id, id + stride, 1.0});
      stride *= side;
    }
  }
  return WeightedGraph(n, std::move(edges), {"lattice", Json{{"dim", dim}, {"side", side}}});
}

namespace {

using Coord = std::pair<int, int>;  // (i, j) triangular coordinates

std::vector<Coord> gasket_triangles(int level) {
  std::vector<Coord> tri{{0, 0}};
  for (int k = 1; k <= level; ++k) {
    const int shift = 1 << (k - 1);
    const std::size_t m = tri.size();
    tri.reserve(3 * m);
    for (std::size_t t = 0; t < m; ++t) tri.push_back({tri[t].first + shift, tri[t].second});
    for (std::size_t t = 0; t < m; ++t) tri.push_back({tri[t].first, tri[t].second + shift});
  }
  return tri;
}

// Sorted by (row j, column i).
std::vector<Coord> gasket_vertices(const std::vector<Coord>& tri) {
  std::vector<Coord> verts;
  verts.reserve(tri.size() * 3);
  for (auto [a, b] : tri) {
    verts.push_back({b, a});
    verts.push_back({b, a + 1});
    verts.push_back({b + 1, a});
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  return verts;  // stored as (j, i)
}

void check_gasket_level(int level) {
  if (level < 0 || level > 9) throw Error(Errc::invalid_parameter, "gasket level must be in [0, 9]");
}

}  // namespace

WeightedGraph gen_sierpinski(int level) {
  check_gasket_level(level);
  const auto tri = gasket_triangles(level);
  const auto verts = gasket_vertices(tri);
  auto id = [&](int i, int j) {
    auto it = std::lower_bound(verts.begin(), verts.end(), Coord{j, i});
    return static_cast<Vertex>(it - verts.begin());
  };
  std::vector<Edge> edges;
  edges.reserve(tri.size() * 3);
  for (auto [a, b] : tri) {
    const Vertex p = id(a, b), q = id(a + 1, b), r = id(a, b + 1);
    edges.push_back({p, q, 1.0});
    edges.push_back({p, r, 1.0});
    edges.push_back({q, r, 1.0});
  }
  return WeightedGraph(verts.size(), std::move(edges), {"sierpinski", Json{{"level", level}}});
}

Vertex sierpinski_vertex(int level, int i, int j) {
  check_gasket_level(level);
  const auto verts = gasket_vertices(gasket_triangles(level));
  auto it = std::lower_bound(verts.begin(), verts.end(), Coord{j, i});
  if (it == verts.end() || *it != Coord{j, i})
    throw Error(Errc::domain, "(" + std::to_string(i) + "," + std::to_string(j) + ") is not a gasket vertex");
  return static_cast<Vertex>(it - verts.begin());
}

WeightedGraph gen_product(const WeightedGraph& g1, const WeightedGraph& g2) {
  const std::size_t n1 = g1.n(), n2 = g2.n();
  std::vector<Edge> edges;
  edges.reserve(g1.edges().size() * n2 + g2.edges().size() * n1);
  for (const auto& e : g1.edges())
    for (std::size_t b = 0; b < n2; ++b) edges.push_back({e.u * n2 + b, e.v * n2 + b, e.w});
  for (std::size_t a = 0; a < n1; ++a)
    for (const auto& e : g2.edges()) edges.push_back({a * n2 + e.u, a * n2 + e.v, e.w});
  Json params{{"factors", Json::array({Json{{"family", g1.meta().family}, {"params", g1.meta().params}},
                                       Json{{"family", g2.meta().family}, {"params", g2.meta().params}}})}};
  return WeightedGraph(n1 * n2, std::move(edges), {"product", std::move(params)});
}

WeightedGraph gen_bottleneck(int side) {
  if (side < 3) throw Error(Errc::invalid_parameter, "bottleneck side must be >= 3");
  const std::size_t s = side, block = s * s;
  std::vector<Edge> edges;
  for (std::size_t off : {std::size_t{0}, block}) {
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        const std::size_t id = off + r * s + c;
        if (c + 1 < s) edges.push_back({id, id + 1, 1.0});
        if (r + 1 < s) edges.push_back({id, id + s, 1.0});
      }
    }
  }
  const std::size_t mid = s / 2;
  const Vertex left = mid * s + (s - 1);
  const Vertex right = block + mid * s;
  edges.push_back({left, right, 1.0});
  return WeightedGraph(2 * block, std::move(edges),
                       {"bottleneck", Json{{"side", side}, {"bridge", Json::array({left, right})}}});
}

// ---------------------------------------------------------------------------
// Metric

std::vector<int> bfs_distances(const WeightedGraph& g, std::span<const Vertex> sources) {
  std::vector<int> dist(g.n(), -1);
  std::vector<Vertex> frontier;
  for (Vertex s : sources) {
    g.check_vertex(s);
    if (dist[s] < 0) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  std::vector<Vertex> next;
  for (int level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (Vertex x : frontier) {
      for (const auto& nb : g.neighbors(x)) {
        if (dist[nb.v] < 0) {
          dist[nb.v] = level;
          next.push_back(nb.v);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

std::vector<int> bfs_distances(const WeightedGraph& g, Vertex x) {
  const Vertex src[] = {x};
  return bfs_distances(g, std::span<const Vertex>(src));
}

std::vector<int> bfs_distances_within(const WeightedGraph& g, Vertex x, int max_radius) {
  g.check_vertex(x);
  std::vector<int> dist(g.n(), -1);
  dist[x] = 0;
  std::vector<Vertex> frontier{x}, next;
  for (int level = 1; level <= max_radius && !frontier.empty(); ++level) {
    next.clear();
    for (Vertex u : frontier) {
      for (const auto& nb : g.neighbors(u)) {
        if (dist[nb.v] < 0) {
          dist[nb.v] = level;
          next.push_back(nb.v);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

int distance(const WeightedGraph& g, Vertex x, Vertex y) {
  g.check_vertex(y);
  const int d = bfs_distances(g, x)[y];
  if (d < 0) throw Error(Errc::unreachable, "no path between " + std::to_string(x) + " and " + std::to_string(y));
  return d;
}

int set_distance(const WeightedGraph& g, std::span<const Vertex> a, std::span<const Vertex> b) {
  if (a.empty() || b.empty()) throw Error(Errc::domain, "set distance of an empty set");
  const auto dist = bfs_distances(g, a);
  int best = -1;
  for (Vertex y : b) {
    g.check_vertex(y);
    if (dist[y] >= 0 && (best < 0 || dist[y] < best)) best = dist[y];
  }
  if (best < 0) throw Error(Errc::unreachable, "sets are not connected");
  return best;
}

bool Ball::contains(Vertex y) const { return std::binary_search(interior.begin(), interior.end(), y); }

Ball ball(const WeightedGraph& g, Vertex x, int radius) {
  g.check_vertex(x);
  if (radius < 0) throw Error(Errc::invalid_parameter, "ball radius must be >= 0");
  const auto dist = bfs_distances_within(g, x, radius);
  Ball b;
  b.center = x;
  b.radius = radius;
  b.graph_size = g.n();
  for (Vertex y = 0; y < g.n(); ++y) {
    if (dist[y] < 0) continue;
    if (dist[y] < radius) b.interior.push_back(y);
    else if (dist[y] == radius) b.sphere.push_back(y);
  }
  return b;
}

Ball proper_ball(const WeightedGraph& g, Vertex x, int radius) {
  Ball b = ball(g, x, radius);
  if (b.interior.empty())
    throw Error(Errc::invalid_parameter, "ball B(" + std::to_string(x) + "," + std::to_string(radius) + ") is empty");
  if (b.interior.size() == g.n())
    throw Error(Errc::ball_escapes_graph,
                "ball B(" + std::to_string(x) + "," + std::to_string(radius) + ") covers the whole graph");
  return b;
}

std::vector<Vertex> closed_ball(const WeightedGraph& g, Vertex x, int radius) {
  const auto dist = bfs_distances_within(g, x, radius);
  std::vector<Vertex> out;
  for (Vertex y = 0; y < g.n(); ++y)
    if (dist[y] >= 0 && dist[y] <= radius) out.push_back(y);
  return out;
}

std::vector<Vertex> shortest_path(const WeightedGraph& g, Vertex x, Vertex y) {
  g.check_vertex(y);
  const auto dist = bfs_distances(g, x);
  if (dist[y] < 0) throw Error(Errc::unreachable, "no path");
  std::vector<Vertex> path{y};
  Vertex cur = y;
  while (cur != x) {
    for (const auto& nb : g.neighbors(cur)) {  // neighbors are sorted: first hit is the smallest id
      if (dist[nb.v] == dist[cur] - 1) {
        cur = nb.v;
        break;
      }
    }
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Vertex> geodesic_chain(const WeightedGraph& g, Vertex x, Vertex y, int links) {
  if (links < 1) throw Error(Errc::invalid_parameter, "chain needs l >= 1");
  if (x == y) throw Error(Errc::invalid_parameter, "chain endpoints must differ");
  const auto path = shortest_path(g, x, y);
  const int d = static_cast<int>(path.size()) - 1;
  if (links > d)
    throw Error(Errc::degenerate_chain,
                "l=" + std::to_string(links) + " exceeds d(x,y)=" + std::to_string(d));
  const int base = d / links, extra = d % links;
  std::vector<Vertex> chain{x};
  int pos = 0;
  for (int i = 0; i < links; ++i) {
    pos += base + (i < extra ? 1 : 0);
    chain.push_back(path[pos]);
  }
  return chain;
}

std::vector<char> indicator(std::size_t n, std::span<const Vertex> set) {
  std::vector<char> mask(n, 0);
  for (Vertex v : set) {
    if (v >= n) throw Error(Errc::domain, "vertex " + std::to_string(v) + " out of range");
    mask[v] = 1;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Serialization

Json to_json(const WeightedGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back(Json::array({e.u, e.v, e.w}));
  return Json{{"meta", Json{{"family", g.meta().family}, {"params", g.meta().params}}},
              {"n", g.n()},
              {"edges", std::move(edges)}};
}

WeightedGraph graph_from_json(const Json& j) {
  try {
    GraphMeta meta;
    if (j.contains("meta")) {
      meta.family = j.at("meta").value("family", std::string("unknown"));
      if (j.at("meta").contains("params")) meta.params = j.at("meta").at("params");
    }
    const std::size_t n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& rec : j.at("edges")) {
      if (!rec.is_array() || rec.size() != 3) throw Error(Errc::invalid_parameter, "edge record must be [u,v,w]");
      edges.push_back({rec[0].get<Vertex>(), rec[1].get<Vertex>(), rec[2].get<double>()});
    }
    return WeightedGraph(n, std::move(edges), std::move(meta));
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_parameter, std::string("malformed graph JSON: ") + e.what());
  }
}

std::string serialize(const WeightedGraph& g) { return to_json(g).dump() + "\n"; }

WeightedGraph load_graph(const std::string& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_parameter, path + ": " + e.what());
  }
  return graph_from_json(j);
}

void save_graph(const WeightedGraph& g, const std::string& path) { write_file_atomic(path, serialize(g)); }

std::string graph_hash(const WeightedGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(g)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace heatlab
