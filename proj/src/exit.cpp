#include "heatlab/exit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "heatlab/error.hpp"
#include "heatlab/linalg.hpp"
#include "heatlab/stats.hpp"

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E_y(T_{B(y,radius)}) with work proportional to the ball, not the graph;
// +inf when the ball is the whole vertex set. Same equations and residual
// check as mean_exit_times.
double local_center_exit(const TransitionOperator& op, Vertex y, int radius) {
  const auto& g = op.graph();
  // Per-thread vertex -> local index table, cleared entry by entry after use.
  thread_local std::vector<std::size_t> idx;
  if (idx.size() != g.n()) idx.assign(g.n(), DomainSolver::npos);
  std::vector<Vertex> verts{y};
  idx[y] = 0;
  std::size_t begin = 0;
  for (int level = 1; level < radius && begin < verts.size(); ++level) {
    const std::size_t end = verts.size();
    for (std::size_t i = begin; i < end; ++i)
      for (const auto& nb : g.neighbors(verts[i]))
        if (idx[nb.v] == DomainSolver::npos) {
          idx[nb.v] = verts.size();
          verts.push_back(nb.v);
        }
    begin = end;
  }
  struct Reset {
    std::vector<Vertex>& v;
    ~Reset() {
      for (Vertex x : v) idx[x] = DomainSolver::npos;
    }
  } reset{verts};
  if (verts.size() == g.n()) return kInf;

  const std::size_t m = verts.size();
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) rhs[i] = g.mu(verts[i]) / (1.0 - op.lazy());
  Eigen::VectorXd u;
  if (m <= 96) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      M(i, i) = g.mu(verts[i]);
      for (const auto& nb : g.neighbors(verts[i]))
        if (idx[nb.v] != DomainSolver::npos) M(i, idx[nb.v]) -= nb.w;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw Error(Errc::domain, "Dirichlet Laplacian factorization failed");
    u = llt.solve(rhs);
    u += llt.solve(Eigen::VectorXd(rhs - M * u));
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m * 5);
    for (std::size_t i = 0; i < m; ++i) {
      trip.emplace_back(i, i, g.mu(verts[i]));
      for (const auto& nb : g.neighbors(verts[i]))
        if (idx[nb.v] != DomainSolver::npos) trip.emplace_back(i, idx[nb.v], -nb.w);
    }
    Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
    if (ldlt.info() != Eigen::Success) throw Error(Errc::domain, "Dirichlet Laplacian factorization failed");
    u = ldlt.solve(rhs);
    u += ldlt.solve(Eigen::VectorXd(rhs - M * u));
  }

  // Residual of (I - P_D) u = 1 through the walk.
  double res = 0.0;
  const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex v = verts[i];
    double pu = op.lazy() * u[i];
    const auto p = op.step_probs(v);
    const auto nbs = g.neighbors(v);
    for (std::size_t k = 0; k < nbs.size(); ++k)
      if (idx[nbs[k].v] != DomainSolver::npos) pu += p[k] * u[idx[nbs[k].v]];
    res = std::max(res, std::abs(u[i] - pu - 1.0));
  }
  if (res > 1e-10 * scale)
    throw Error(Errc::domain, "mean exit solve residual " + std::to_string(res) + " exceeds tolerance");
  return u[0];
}

}  // namespace

std::vector<double> mean_exit_times(const TransitionOperator& op, std::span<const Vertex> domain) {
  const auto& g = op.graph();
  DomainSolver solver(g, domain);
  const auto& dom = solver.domain();
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(dom.size()));
  for (std::size_t i = 0; i < dom.size(); ++i) rhs[i] = g.mu(dom[i]) / (1.0 - op.lazy());
  const Eigen::VectorXd u = solver.solve(rhs);

  std::vector<double> out(g.n(), 0.0);
  for (std::size_t i = 0; i < dom.size(); ++i) out[dom[i]] = u[i];

  // Residual of (I - P_D) u = 1 through the walk itself, not the matrix.
  KilledOperator killed(op, dom);
  std::vector<double> pu(g.n());
  killed.apply(out, pu);
  double res = 0.0, scale = 1.0;
  for (Vertex v : dom) {
    res = std::max(res, std::abs(out[v] - pu[v] - 1.0));
    scale = std::max(scale, std::abs(out[v]));
  }
  if (res > 1e-10 * scale)
    throw Error(Errc::domain, "mean exit solve residual " + std::to_string(res) + " exceeds tolerance");
  return out;
}

ExitProfile exit_profile(const TransitionOperator& op, Vertex x, int radius) {
  const Ball b = proper_ball(op.graph(), x, radius);
  const auto u = mean_exit_times(op, b.interior);
  ExitProfile p;
  p.center = x;
  p.radius = radius;
  p.interior = b.interior;
  p.values.reserve(b.interior.size());
  p.E = u[x];
  p.Ebar = -kInf;
  for (Vertex y : b.interior) {
    p.values.push_back(u[y]);
    if (u[y] > p.Ebar) {
      p.Ebar = u[y];
      p.argmax = y;
    }
  }
  return p;
}

double mean_exit(const TransitionOperator& op, Vertex x, int radius) { return exit_profile(op, x, radius).E; }

double mean_exit_sup(const TransitionOperator& op, Vertex x, int radius) {
  return exit_profile(op, x, radius).Ebar;
}

EbarCheck check_ebar(const TransitionOperator& op, std::span<const Vertex> centers, std::span<const int> radii) {
  if (radii.empty() || centers.empty()) throw Error(Errc::insufficient_data, "Ebar check needs centers and radii");
  std::vector<int> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  EbarCheck out;
  double lower = 0.0, upper = 0.0;
  const std::size_t half = sorted.size() / 2;
  for (Vertex x : centers) {
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto p = exit_profile(op, x, sorted[i]);
      const double ratio = p.Ebar / p.E;
      out.rows.push_back({x, sorted[i], p.E, p.Ebar, ratio});
      out.max_ratio = std::max(out.max_ratio, ratio);
      (i < half ? lower : upper) = std::max(i < half ? lower : upper, ratio);
    }
  }
  if (half == 0) lower = upper;
  out.trend = upper / lower;
  out.bounded = out.trend <= 1.25;
  return out;
}

// ---------------------------------------------------------------------------

double GraphExitOracle::at_radius(Vertex y, int radius) const {
  if (radius <= 1) return floor_value();
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find({y, radius});
    if (it != cache_.end()) return it->second;
  }
  const double value = local_center_exit(*op_, y, radius);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::pair{y, radius}, value);
  return value;
}

double GraphExitOracle::operator()(Vertex y, double radius) const {
  if (radius <= 1.0) return floor_value();
  if (rule_ == RadiusRule::ceil) return at_radius(y, static_cast<int>(std::ceil(radius)));
  const double lo_r = std::floor(radius);
  const double hi_r = std::ceil(radius);
  const double lo = at_radius(y, static_cast<int>(lo_r));
  if (hi_r == lo_r) return lo;
  const double hi = at_radius(y, static_cast<int>(hi_r));
  if (std::isinf(hi)) return kInf;
  return lo + (radius - lo_r) * (hi - lo);
}

std::size_t GraphExitOracle::solves() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

namespace {

void check_counts_args(double t, int R, double q, std::span<const Vertex> A) {
  if (!(t > 0.0)) throw Error(Errc::invalid_parameter, "iteration counts need t > 0");
  if (R < 1) throw Error(Errc::invalid_parameter, "iteration counts need R >= 1");
  if (!(q > 0.0)) throw Error(Errc::invalid_parameter, "iteration counts need q > 0");
  if (A.empty()) throw Error(Errc::invalid_parameter, "iteration counts need a nonempty set A");
}

}  // namespace

int kappa(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap) {
  check_counts_args(t, R, q, A);
  if (cap <= 0) cap = R;
  int best = 0;
  std::size_t hint = 0;  // last violator is tried first
  for (int k = 1; k <= cap; ++k) {
    const double lhs = t / k;
    const double rho = static_cast<double>(R) / k;
    auto ok = [&](Vertex y) { return lhs <= q * E(y, rho) * (1.0 + kTieTolerance); };
    bool holds = ok(A[hint]);
    for (std::size_t i = 0; holds && i < A.size(); ++i) {
      if (i != hint && !ok(A[i])) {
        holds = false;
        hint = i;
      }
    }
    if (holds) best = k;
  }
  return best;
}

NuValue nu(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap) {
  check_counts_args(t, R, q, A);
  if (cap <= 0) cap = R;
  std::size_t hint = 0;
  for (int k = 1; k <= cap; ++k) {
    const double lhs = t / k;
    const double rho = static_cast<double>(R) / k;
    auto ok = [&](Vertex y) { return lhs >= q * E(y, rho) * (1.0 - kTieTolerance); };
    bool holds = ok(A[hint]);
    for (std::size_t i = 0; holds && i < A.size(); ++i) {
      if (i != hint && !ok(A[i])) {
        holds = false;
        hint = i;
      }
    }
    if (holds) return {k, false};
  }
  return {0, true};
}

IterCounts iter_counts(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap) {
  return {kappa(E, t, R, q, A, cap), nu(E, t, R, q, A, cap), q};
}

// ---------------------------------------------------------------------------

ScalingFit scaling_fit(std::span<const int> radii, std::span<const double> E) {
  if (radii.size() < 4) throw Error(Errc::insufficient_data, "scaling fit needs at least 4 radii");
  if (radii.size() != E.size()) throw Error(Errc::invalid_parameter, "radii and E differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 1 || !(E[i] > 0.0)) throw Error(Errc::invalid_parameter, "scaling fit needs R >= 1 and E > 0");
    lx.push_back(std::log(static_cast<double>(radii[i])));
    ly.push_back(std::log(E[i]));
  }
  const auto fit = least_squares(lx, ly);
  ScalingFit out;
  out.radii.assign(radii.begin(), radii.end());
  out.E.assign(E.begin(), E.end());
  out.beta = fit.slope;
  out.log_prefactor = fit.intercept;
  out.r2 = fit.r2;
  out.r_min = *std::min_element(radii.begin(), radii.end());
  out.r_max = *std::max_element(radii.begin(), radii.end());
  return out;
}

ScalingFit scaling_fit(const TransitionOperator& op, Vertex x, std::span<const int> radii) {
  if (radii.size() < 4) throw Error(Errc::insufficient_data, "scaling fit needs at least 4 radii");
  std::vector<double> E;
  for (int R : radii) E.push_back(mean_exit(op, x, R));
  auto fit = scaling_fit(radii, E);
  fit.family = op.graph().meta().family;
  fit.center = x;
  return fit;
}

P1Check check_p1(const TransitionOperator& op, std::span<const Vertex> centers, std::span<const int> radii,
                 std::span<const double> fractions) {
  if (centers.empty() || radii.empty() || fractions.empty())
    throw Error(Errc::insufficient_data, "P1 check needs centers, radii and fractions");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw Error(Errc::invalid_parameter, "P1 fractions must lie in (0, 1]");
  std::vector<int> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  P1Check out;
  for (int r : sorted) {
    double rmin = 1.0;
    for (Vertex x : centers) {
      const Ball b = proper_ball(op.graph(), x, r);
      const double E = mean_exit_times(op, b.interior)[x];
      int t_max = 0;
      for (double f : fractions) t_max = std::max(t_max, static_cast<int>(std::floor(f * E / 2.0)));
      const auto cdf = exit_distribution(op, b, x, t_max);
      for (double f : fractions) {
        const int t = static_cast<int>(std::floor(f * E / 2.0));
        const double surv = 1.0 - cdf[t];
        out.rows.push_back({x, r, t, E, surv});
        rmin = std::min(rmin, surv);
      }
    }
    out.per_radius_min.emplace_back(r, rmin);
    out.min_survival = std::min(out.min_survival, rmin);
  }
  const std::size_t half = out.per_radius_min.size() / 2;
  double lower = 1.0, upper = 1.0;
  for (std::size_t i = 0; i < out.per_radius_min.size(); ++i)
    (i < half ? lower : upper) = std::min(i < half ? lower : upper, out.per_radius_min[i].second);
  if (half == 0) lower = upper;
  out.pass = out.min_survival >= 0.05 && upper >= 0.75 * lower;
  return out;
}

}  // namespace heatlab
