#include "heatlab/verify.hpp"

#include <algorithm>
#include <cmath>

#include "heatlab/error.hpp"
#include "heatlab/exit.hpp"

namespace heatlab {

double exit_tail_sum(const TransitionOperator& op, const Ball& b, Vertex x) {
  int horizon = 64;
  while (true) {
    const auto cdf = exit_distribution(op, b, x, horizon);
    // Large domains settle a few ulps short of 1; stop summing once the CDF
    // no longer moves.
    const double tail = 1.0 - cdf.back();
    if (tail < 1e-14 || cdf.back() - cdf[cdf.size() / 2] <= 1e-15) {
      double s = 0.0;
      for (double c : cdf) {
        if (1.0 - c <= tail && tail >= 1e-14) break;
        s += 1.0 - c;
      }
      return s;
    }
    if (horizon > (1 << 26)) throw Error(Errc::runaway, "exit CDF does not settle");
    horizon *= 2;
  }
}

double ks_distance(std::span<const long long> sorted_samples, std::span<const double> cdf) {
  if (sorted_samples.empty() || cdf.empty()) throw Error(Errc::insufficient_data, "empty sample or cdf");
  const double n = static_cast<double>(sorted_samples.size());
  auto F = [&](long long k) { return cdf[std::min<std::size_t>(static_cast<std::size_t>(k), cdf.size() - 1)]; };
  double worst = 0.0;
  std::size_t i = 0;
  // The empirical CDF only jumps at sample values; check both sides of each jump.
  while (i < sorted_samples.size()) {
    const long long k = sorted_samples[i];
    std::size_t j = i;
    while (j < sorted_samples.size() && sorted_samples[j] == k) ++j;
    const double below = static_cast<double>(i) / n, at = static_cast<double>(j) / n;
    worst = std::max({worst, std::abs(at - F(k)), std::abs(below - (k > 0 ? F(k - 1) : 0.0))});
    i = j;
  }
  return worst;
}

double dkw_epsilon(std::size_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

namespace {

void add(VerifyResult& r, std::string name, double value, double tol) {
  r.checks.push_back({std::move(name), value, tol, value <= tol});
}

// Largest radius, at most cap, whose ball around x is proper.
int proper_radius(const WeightedGraph& g, Vertex x, int cap) {
  for (int R = cap; R >= 1; --R)
    if (ball(g, x, R).proper()) return R;
  return 0;
}

}  // namespace

VerifyResult run_verify(const TransitionOperator& op, const VerifyOptions& opt) {
  const auto& g = op.graph();
  const std::size_t n = g.n();
  VerifyResult res;
  RngStream rng(opt.seed, 0x7665726966ULL);
  auto pick = [&] { return static_cast<Vertex>(rng() % n); };

  // Transition rows and reversibility.
  double row_err = 0.0, rev_err = 0.0;
  for (Vertex x = 0; x < n; ++x) {
    double s = op.lazy();
    const auto nbs = g.neighbors(x);
    const auto p = op.step_probs(x);
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      s += p[k];
      const double a = g.mu(x) * p[k], b = g.mu(nbs[k].v) * op.prob(nbs[k].v, x);
      rev_err = std::max(rev_err, std::abs(a - b) / std::max(a, b));
    }
    row_err = std::max(row_err, std::abs(s - 1.0));
  }
  add(res, "row_sums", row_err, 1e-12);
  add(res, "reversibility", rev_err, 1e-12);

  // Kernel properties at sampled pairs and times.
  const int times[] = {0, 1, 2, 3, 5, 8, 13};
  const int t_top = 13;
  double neg = 0.0, norm = 0.0, sym = 0.0, ck = 0.0;
  for (std::size_t i = 0; i < opt.pairs; ++i) {
    const Vertex x = pick(), y = pick();
    // rows[t] = p_t(x, .) and p_t(y, .)
    std::vector<std::vector<double>> rx, ry;
    std::vector<double> mx(n, 0.0), my(n, 0.0), next(n);
    mx[x] = 1.0;
    my[y] = 1.0;
    for (int t = 0; t <= t_top; ++t) {
      std::vector<double> px(n), py(n);
      for (Vertex v = 0; v < n; ++v) {
        px[v] = mx[v] / g.mu(v);
        py[v] = my[v] / g.mu(v);
      }
      rx.push_back(std::move(px));
      ry.push_back(std::move(py));
      op.evolve(mx, next);
      mx.swap(next);
      op.evolve(my, next);
      my.swap(next);
    }
    for (int t : times) {
      double s = 0.0;
      for (Vertex v = 0; v < n; ++v) {
        neg = std::max(neg, -rx[t][v]);
        s += rx[t][v] * g.mu(v);
      }
      norm = std::max(norm, std::abs(s - 1.0));
      sym = std::max(sym, std::abs(rx[t][y] - ry[t][x]));
    }
    for (int s : {1, 2, 5}) {
      for (int t : {1, 3, 8}) {
        if (s + t > t_top) continue;
        double acc = 0.0;
        for (Vertex z = 0; z < n; ++z) acc += rx[s][z] * ry[t][z] * g.mu(z);
        ck = std::max(ck, std::abs(rx[s + t][y] - acc));
      }
    }
  }
  add(res, "kernel_nonnegativity", neg, 0.0);
  add(res, "kernel_normalization", norm, 1e-10);
  add(res, "kernel_symmetry", sym, 1e-12);
  add(res, "chapman_kolmogorov", ck, 1e-10);

  // Exit CDFs and the tail-sum identity.
  double cdf_bad = 0.0, tail = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < opt.exit_instances; ++i) {
    const Vertex x = pick();
    const int cap = proper_radius(g, x, 8);
    if (cap < 1) continue;
    const int R = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cap));
    const Ball b = proper_ball(g, x, R);
    const double E = mean_exit(op, x, R);
    const auto cdf = exit_distribution(op, b, x, static_cast<int>(std::ceil(4 * E)) + 1);
    cdf_bad = std::max(cdf_bad, std::abs(cdf[0]));
    for (std::size_t k = 1; k < cdf.size(); ++k) {
      cdf_bad = std::max(cdf_bad, cdf[k - 1] - cdf[k]);
      cdf_bad = std::max({cdf_bad, -cdf[k], cdf[k] - 1.0});
    }
    tail = std::max(tail, std::abs(exit_tail_sum(op, b, x) - E));
    ++used;
  }
  add(res, "exit_cdf_valid", cdf_bad, 0.0);
  add(res, "exit_tail_sum_identity", tail, 1e-8);

  // Monte Carlo against the exact CDF.
  {
    const Vertex x = pick();
    const int R = std::max(1, proper_radius(g, x, 4));
    const Ball b = proper_ball(g, x, R);
    const auto samples = mc_exit_samples(op, b, x, opt.trajectories, RngStream(opt.seed, 1), opt.jobs);
    const auto cdf = exit_distribution(op, b, x, static_cast<int>(samples.back()));
    add(res, "monte_carlo_dkw", ks_distance(samples, cdf), dkw_epsilon(opt.trajectories, 1e-6));
  }

  auto& rep = res.report;
  rep.experiment = "verify";
  rep.family = g.meta().family;
  rep.pass = true;
  for (const auto& c : res.checks) {
    rep.grid.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    rep.pass = rep.pass && c.pass;
  }
  rep.excluded = opt.exit_instances - used;
  rep.constants = {{"lazy", op.lazy()}};
  return res;
}

}  // namespace heatlab
