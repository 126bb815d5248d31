#include "heatlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heatlab/error.hpp"

namespace heatlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Vertex> sorted_unique(std::span<const Vertex> s) {
  std::vector<Vertex> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double energy_of(const WeightedGraph& g, const std::vector<double>& u) {
  double e = 0.0;
  for (const auto& edge : g.edges()) {
    if (std::isnan(u[edge.u]) || std::isnan(u[edge.v])) continue;
    const double diff = u[edge.u] - u[edge.v];
    e += edge.w * diff * diff;
  }
  return e;
}

}  // namespace

std::vector<Vertex> outer_boundary(const WeightedGraph& g, std::span<const Vertex> domain) {
  const auto in_d = indicator(g.n(), domain);
  std::vector<char> seen(g.n(), 0);
  std::vector<Vertex> out;
  for (Vertex x : domain) {
    for (const auto& nb : g.neighbors(x)) {
      if (!in_d[nb.v] && !seen[nb.v]) {
        seen[nb.v] = 1;
        out.push_back(nb.v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PotentialSolve harmonic_extend(const TransitionOperator& op, std::span<const Vertex> domain,
                               const std::map<Vertex, double>& boundary_values) {
  const auto& g = op.graph();
  PotentialSolve s;
  s.domain = sorted_unique(domain);
  s.boundary = outer_boundary(g, s.domain);
  s.u.assign(g.n(), kNaN);
  const auto in_d = indicator(g.n(), s.domain);
  for (const auto& [v, value] : boundary_values) {
    g.check_vertex(v);
    if (!in_d[v]) s.u[v] = value;
  }
  for (Vertex z : s.boundary)
    if (std::isnan(s.u[z]))
      throw Error(Errc::underdetermined, "no boundary value for vertex " + std::to_string(z));

  if (!s.domain.empty()) {
    DomainSolver solver(g, s.domain);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.domain.size()));
    for (std::size_t i = 0; i < s.domain.size(); ++i)
      for (const auto& nb : g.neighbors(s.domain[i]))
        if (!in_d[nb.v]) rhs[i] += nb.w * s.u[nb.v];
    const Eigen::VectorXd sol = solver.solve(rhs);
    for (std::size_t i = 0; i < s.domain.size(); ++i) s.u[s.domain[i]] = sol[i];
  }
  s.energy = energy_of(g, s.u);
  return s;
}

double harmonic_residual(const TransitionOperator& op, const PotentialSolve& s) {
  const auto& g = op.graph();
  double worst = 0.0;
  for (Vertex x : s.domain) {
    double avg = op.lazy() * s.u[x];
    const auto p = op.step_probs(x);
    const auto nbs = g.neighbors(x);
    for (std::size_t k = 0; k < nbs.size(); ++k) avg += p[k] * s.u[nbs[k].v];
    worst = std::max(worst, std::abs(s.u[x] - avg));
  }
  return worst;
}

// ---------------------------------------------------------------------------

HarnackReport harnack_constant(const TransitionOperator& op, Vertex x, int R) {
  if (R < 1) throw Error(Errc::invalid_parameter, "Harnack radius must be >= 1");
  const auto& g = op.graph();
  const Ball outer = proper_ball(g, x, 2 * R);
  const Ball inner = ball(g, x, R);
  const auto exits = outer_boundary(g, outer.interior);

  DomainSolver solver(g, outer.interior);
  const auto m = static_cast<Eigen::Index>(outer.interior.size());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(exits.size()));
  for (std::size_t k = 0; k < exits.size(); ++k)
    for (const auto& nb : g.neighbors(exits[k])) {
      const std::size_t i = solver.local(nb.v);
      if (i != DomainSolver::npos) rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += nb.w;
    }
  const Eigen::MatrixXd h = solver.solve(rhs);

  HarnackReport rep;
  rep.center = x;
  rep.radius = R;
  rep.H = 1.0;
  rep.argmax = exits.empty() ? x : exits.front();
  for (std::size_t k = 0; k < exits.size(); ++k) {
    HarnackRow row{exits[k], -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 1.0};
    for (Vertex w : inner.interior) {
      const double v = h(static_cast<Eigen::Index>(solver.local(w)), static_cast<Eigen::Index>(k));
      row.sup = std::max(row.sup, v);
      row.inf = std::min(row.inf, v);
    }
    row.ratio = row.sup / row.inf;
    if (row.ratio > rep.H) {
      rep.H = row.ratio;
      rep.argmax = exits[k];
    }
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

GreenKernel::GreenKernel(const TransitionOperator& op, const Ball& b)
    : ball_(b),
      n_(op.n()),
      scale_(1.0 / (1.0 - op.lazy())),
      solver_(std::make_shared<DomainSolver>(op.graph(), b.interior)) {
  if (b.interior.size() <= kDenseLimit) {
    const auto m = static_cast<Eigen::Index>(b.interior.size());
    dense_ = solver_->solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m)));
    *dense_ *= scale_;
  }
}

double GreenKernel::operator()(Vertex x, Vertex y) const {
  if (x >= n_ || y >= n_) throw Error(Errc::domain, "Green kernel argument out of range");
  const std::size_t i = solver_->local(x), j = solver_->local(y);
  if (i == DomainSolver::npos || j == DomainSolver::npos) return 0.0;
  if (dense_) return (*dense_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return column(y)[x];
}

std::vector<double> GreenKernel::column(Vertex y) const {
  if (y >= n_) throw Error(Errc::domain, "Green kernel argument out of range");
  std::vector<double> out(n_, 0.0);
  const std::size_t j = solver_->local(y);
  if (j == DomainSolver::npos) return out;
  const auto& dom = solver_->domain();
  if (dense_) {
    for (std::size_t i = 0; i < dom.size(); ++i)
      out[dom[i]] = (*dense_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dom.size()));
  e[static_cast<Eigen::Index>(j)] = 1.0;
  const Eigen::VectorXd col = solver_->solve(e);
  for (std::size_t i = 0; i < dom.size(); ++i) out[dom[i]] = col[static_cast<Eigen::Index>(i)] * scale_;
  return out;
}

GreenKernel green_kernel(const TransitionOperator& op, const Ball& b) {
  if (b.interior.empty()) throw Error(Errc::invalid_parameter, "Green kernel of an empty ball");
  if (b.interior.size() == op.n()) throw Error(Errc::ball_escapes_graph, "ball covers the whole graph");
  return GreenKernel(op, b);
}

// ---------------------------------------------------------------------------

CapacityResult capacity(const TransitionOperator& op, std::span<const Vertex> a, std::span<const Vertex> b) {
  const auto& g = op.graph();
  if (a.empty() || b.empty()) throw Error(Errc::domain, "capacity needs nonempty sets");
  const auto in_a = indicator(g.n(), a);
  const auto in_b = indicator(g.n(), b);
  std::map<Vertex, double> data;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (in_a[v] && in_b[v]) throw Error(Errc::domain, "capacity sets intersect at vertex " + std::to_string(v));
    if (in_a[v]) data[v] = 1.0;
    if (in_b[v]) data[v] = 0.0;
  }
  std::vector<Vertex> free;
  for (Vertex v = 0; v < g.n(); ++v)
    if (!in_a[v] && !in_b[v]) free.push_back(v);
  CapacityResult res;
  res.potential = harmonic_extend(op, free, data);
  res.cap = res.potential.energy;
  res.rho = 1.0 / res.cap;
  return res;
}

double resistance(const TransitionOperator& op, Vertex x, int r, int R) {
  if (r < 1 || r >= R) throw Error(Errc::domain, "resistance needs 1 <= r < R");
  const auto& g = op.graph();
  const Ball inner = ball(g, x, r);
  const Ball outer = proper_ball(g, x, R);
  const auto in_outer = indicator(g.n(), outer.interior);
  std::vector<Vertex> far;
  for (Vertex v = 0; v < g.n(); ++v)
    if (!in_outer[v]) far.push_back(v);
  return capacity(op, inner.interior, far).rho;
}

LhgRow lhg_row(const TransitionOperator& op, Vertex x, int r, int R) {
  if (r < 1 || r >= R) throw Error(Errc::domain, "Green/resistance comparison needs 1 <= r < R");
  const auto& g = op.graph();
  const Ball outer = proper_ball(g, x, R);
  const auto gx = green_kernel(op, outer).column(x);
  const auto dist = bfs_distances_within(g, x, R);
  LhgRow row{x, r, R, resistance(op, x, r, R), std::numeric_limits<double>::infinity(), 0.0};
  for (Vertex w : outer.interior) {
    if (dist[w] <= r) row.inf_g = std::min(row.inf_g, gx[w]);
    if (dist[w] >= r) row.sup_g = std::max(row.sup_g, gx[w]);
  }
  return row;
}

LhgCheck check_lhg(const TransitionOperator& op, std::span<const LhgPoint> grid) {
  if (grid.empty()) throw Error(Errc::insufficient_data, "empty Green/resistance grid");
  LhgCheck out;
  out.inf_ratio_min = out.sup_ratio_min = std::numeric_limits<double>::infinity();
  for (const auto& p : grid) {
    const auto row = lhg_row(op, p.x, p.r, p.R);
    out.inf_ratio_min = std::min(out.inf_ratio_min, row.inf_g / row.rho);
    out.inf_ratio_max = std::max(out.inf_ratio_max, row.inf_g / row.rho);
    out.sup_ratio_min = std::min(out.sup_ratio_min, row.sup_g / row.rho);
    out.sup_ratio_max = std::max(out.sup_ratio_max, row.sup_g / row.rho);
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> hit_before_exit(const TransitionOperator& op, Vertex x, int r) {
  if (r < 1) throw Error(Errc::invalid_parameter, "hit-before-exit needs r >= 1");
  const auto& g = op.graph();
  const Ball outer = proper_ball(g, x, 5 * r);
  const auto dist = bfs_distances_within(g, x, 5 * r);
  std::map<Vertex, double> data;
  std::vector<Vertex> annulus;
  for (Vertex v : outer.interior) {
    if (dist[v] < r) data[v] = 1.0;
    else annulus.push_back(v);
  }
  for (Vertex v : outer.sphere) data[v] = 0.0;
  const auto sol = harmonic_extend(op, annulus, data);
  std::vector<double> out(g.n(), kNaN);
  for (Vertex v : outer.interior) out[v] = sol.u[v];
  return out;
}

LpttCheck check_lptt(const TransitionOperator& op, std::span<const LpttPoint> grid) {
  if (grid.empty()) throw Error(Errc::insufficient_data, "empty hit-before-exit grid");
  const auto& g = op.graph();
  LpttCheck out;
  for (const auto& p : grid) {
    if (!ball(g, p.x, 5 * p.r).proper()) {
      ++out.skipped;
      continue;
    }
    const auto u = hit_before_exit(op, p.x, p.r);
    const auto dist = bfs_distances_within(g, p.x, 4 * p.r);
    for (Vertex w = 0; w < g.n(); ++w) {
      if (dist[w] < p.r || dist[w] > 4 * p.r) continue;
      out.rows.push_back({p.x, p.r, w, dist[w], u[w]});
      out.c1 = std::min(out.c1, u[w]);
    }
  }
  if (out.rows.empty()) out.c1 = 0.0;
  return out;
}

}  // namespace heatlab
