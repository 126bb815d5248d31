#include "heatlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatlab/error.hpp"
#include "heatlab/parallel.hpp"

namespace heatlab {

TransitionOperator::TransitionOperator(const WeightedGraph& g, double lazy) : g_(&g), lazy_(lazy) {
  if (!(lazy >= 0.0 && lazy < 1.0)) throw Error(Errc::invalid_parameter, "lazy must be in [0, 1)");
  offsets_.assign(g.n() + 1, 0);
  for (Vertex x = 0; x < g.n(); ++x) offsets_[x + 1] = offsets_[x] + g.degree(x);
  probs_.resize(offsets_.back());
  for (Vertex x = 0; x < g.n(); ++x) {
    const double scale = (1.0 - lazy_) / g.mu(x);
    std::size_t k = offsets_[x];
    for (const auto& nb : g.neighbors(x)) probs_[k++] = nb.w * scale;
  }
}

double TransitionOperator::prob(Vertex x, Vertex y) const {
  if (x == y) {
    g_->check_vertex(x);
    return lazy_;
  }
  return (1.0 - lazy_) * g_->weight(x, y) / g_->mu(x);
}

void TransitionOperator::apply(std::span<const double> f, std::span<double> out) const {
  const std::size_t n = g_->n();
  for (Vertex x = 0; x < n; ++x) {
    const auto nbs = g_->neighbors(x);
    const double* p = probs_.data() + offsets_[x];
    double acc = lazy_ * f[x];
    for (std::size_t k = 0; k < nbs.size(); ++k) acc += p[k] * f[nbs[k].v];
    out[x] = acc;
  }
}

void TransitionOperator::evolve(std::span<const double> m, std::span<double> out) const {
  const std::size_t n = g_->n();
  for (Vertex y = 0; y < n; ++y) out[y] = lazy_ * m[y];
  for (Vertex x = 0; x < n; ++x) {
    if (m[x] == 0.0) continue;
    const auto nbs = g_->neighbors(x);
    const double* p = probs_.data() + offsets_[x];
    for (std::size_t k = 0; k < nbs.size(); ++k) out[nbs[k].v] += m[x] * p[k];
  }
}

KilledOperator::KilledOperator(const TransitionOperator& op, std::span<const Vertex> domain)
    : op_(&op), domain_(domain.begin(), domain.end()), mask_(indicator(op.n(), domain)) {
  std::sort(domain_.begin(), domain_.end());
  domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
}

void KilledOperator::apply(std::span<const double> f, std::span<double> out) const {
  const auto& g = op_->graph();
  const double lazy = op_->lazy();
  std::fill(out.begin(), out.end(), 0.0);
  for (Vertex x : domain_) {
    const auto nbs = g.neighbors(x);
    const auto p = op_->step_probs(x);
    double acc = lazy * f[x];
    for (std::size_t k = 0; k < nbs.size(); ++k)
      if (mask_[nbs[k].v]) acc += p[k] * f[nbs[k].v];
    out[x] = acc;
  }
}

std::vector<double> KilledOperator::row_sums() const {
  std::vector<double> ones(op_->n(), 1.0), out(op_->n());
  apply(ones, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_time(int t) {
  if (t < 0) throw Error(Errc::invalid_parameter, "time must be >= 0, got " + std::to_string(t));
}

// One-step exit probabilities e(x) = sum_{y not in D} P(x,y) on D, summed
// term by term rather than as 1 - row sum.
std::vector<double> exit_step(const KilledOperator& killed) {
  const auto& op = killed.base();
  const auto& g = op.graph();
  std::vector<double> e(op.n(), 0.0);
  for (Vertex x : killed.domain()) {
    const auto nbs = g.neighbors(x);
    const auto p = op.step_probs(x);
    for (std::size_t k = 0; k < nbs.size(); ++k)
      if (!killed.contains(nbs[k].v)) e[x] += p[k];
  }
  return e;
}

// f <- P_D f + e, so that f_k(x) = P_x(T_D <= k). Every term is nonnegative,
// which keeps full relative precision for tiny probabilities.
void exit_cdf_step(const KilledOperator& killed, const std::vector<double>& e, std::vector<double>& f,
                   std::vector<double>& next) {
  killed.apply(f, next);
  for (Vertex v : killed.domain()) next[v] = std::min(1.0, next[v] + e[v]);
  f.swap(next);
}

std::vector<double> exit_cdf(const KilledOperator& killed, Vertex x, int t_max) {
  const std::size_t n = killed.base().n();
  const auto e = exit_step(killed);
  std::vector<double> f(n, 0.0), next(n, 0.0);
  std::vector<double> cdf(static_cast<std::size_t>(t_max) + 1, 0.0);
  for (int k = 1; k <= t_max; ++k) {
    exit_cdf_step(killed, e, f, next);
    cdf[k] = f[x];
  }
  return cdf;
}

}  // namespace

std::vector<double> heat_kernel_row(const TransitionOperator& op, int t, Vertex x) {
  check_time(t);
  op.graph().check_vertex(x);
  const std::size_t n = op.n();
  std::vector<double> m(n, 0.0), next(n, 0.0);
  m[x] = 1.0;
  for (int k = 0; k < t; ++k) {
    op.evolve(m, next);
    m.swap(next);
  }
  for (Vertex y = 0; y < n; ++y) m[y] /= op.graph().mu(y);
  return m;
}

double heat_kernel(const TransitionOperator& op, int t, Vertex x, Vertex y) {
  op.graph().check_vertex(y);
  return heat_kernel_row(op, t, x)[y];
}

std::vector<double> exit_distribution(const TransitionOperator& op, std::span<const Vertex> domain, Vertex x,
                                      int t_max) {
  check_time(t_max);
  KilledOperator killed(op, domain);
  op.graph().check_vertex(x);
  if (!killed.contains(x))
    throw Error(Errc::domain, "start vertex " + std::to_string(x) + " is outside the domain");
  if (killed.domain().size() == op.n())
    throw Error(Errc::ball_escapes_graph, "domain is the whole vertex set; exit time is infinite");
  return exit_cdf(killed, x, t_max);
}

std::vector<double> exit_distribution(const TransitionOperator& op, const Ball& ball, Vertex x, int t_max) {
  if (ball.interior.size() == op.n())
    throw Error(Errc::ball_escapes_graph, "ball covers the whole graph");
  return exit_distribution(op, ball.interior, x, t_max);
}

std::vector<double> hitting_distribution(const TransitionOperator& op, std::span<const Vertex> target, Vertex x,
                                         int t_max) {
  check_time(t_max);
  if (target.empty()) throw Error(Errc::domain, "hitting target set is empty");
  op.graph().check_vertex(x);
  const auto in_target = indicator(op.n(), target);
  if (in_target[x]) return std::vector<double>(static_cast<std::size_t>(t_max) + 1, 1.0);
  std::vector<Vertex> complement;
  for (Vertex v = 0; v < op.n(); ++v)
    if (!in_target[v]) complement.push_back(v);
  return exit_cdf(KilledOperator(op, complement), x, t_max);
}

std::vector<std::vector<double>> hitting_cdf_all(const TransitionOperator& op, std::span<const Vertex> target,
                                                 std::span<const int> steps) {
  if (target.empty()) throw Error(Errc::domain, "hitting target set is empty");
  if (!std::is_sorted(steps.begin(), steps.end()))
    throw Error(Errc::invalid_parameter, "hitting_cdf_all needs ascending steps");
  const std::size_t n = op.n();
  const auto in_target = indicator(n, target);
  std::vector<Vertex> complement;
  for (Vertex v = 0; v < n; ++v)
    if (!in_target[v]) complement.push_back(v);
  KilledOperator killed(op, complement);
  const auto e = exit_step(killed);

  std::vector<double> f(n, 0.0), next(n, 0.0);
  std::vector<std::vector<double>> out;
  out.reserve(steps.size());
  int k = 0;
  for (int want : steps) {
    check_time(want);
    for (; k < want; ++k) exit_cdf_step(killed, e, f, next);
    std::vector<double> cdf(n);
    for (Vertex z = 0; z < n; ++z) cdf[z] = in_target[z] ? 1.0 : f[z];
    out.push_back(std::move(cdf));
  }
  return out;
}

double set_kernel(const TransitionOperator& op, int t, std::span<const Vertex> a, std::span<const Vertex> b) {
  check_time(t);
  if (a.empty() || b.empty()) throw Error(Errc::domain, "set kernel needs nonempty sets");
  const std::size_t n = op.n();
  const auto& g = op.graph();
  // sum_y p_t(x,y) mu(y) 1_B(y) = (P^t 1_B)(x): one function sweep serves every x in A.
  std::vector<double> f(n, 0.0), next(n);
  for (Vertex y : b) {
    g.check_vertex(y);
    f[y] = 1.0;
  }
  for (int k = 0; k < t; ++k) {
    op.apply(f, next);
    f.swap(next);
  }
  const auto in_a = indicator(n, a);
  double total = 0.0;
  for (Vertex x = 0; x < n; ++x)
    if (in_a[x]) total += g.mu(x) * f[x];
  return total;
}

std::vector<long long> mc_exit_samples(const TransitionOperator& op, const Ball& ball, Vertex x, std::size_t n,
                                       const RngStream& rng, int jobs) {
  if (n < 1) throw Error(Errc::invalid_parameter, "need at least one trajectory");
  const auto& g = op.graph();
  g.check_vertex(x);
  if (!ball.contains(x)) throw Error(Errc::domain, "start vertex is outside the ball interior");
  if (ball.interior.size() == g.n()) throw Error(Errc::ball_escapes_graph, "ball covers the whole graph");

  const auto inside = indicator(g.n(), ball.interior);
  // Cumulative neighbor weights per vertex for inverse-CDF neighbor choice.
  std::vector<std::size_t> offsets(g.n() + 1, 0);
  for (Vertex v = 0; v < g.n(); ++v) offsets[v + 1] = offsets[v] + g.degree(v);
  std::vector<double> cumw(offsets.back());
  for (Vertex v = 0; v < g.n(); ++v) {
    double acc = 0.0;
    std::size_t k = offsets[v];
    for (const auto& nb : g.neighbors(v)) cumw[k++] = (acc += nb.w);
  }
  const double lazy = op.lazy();

  std::vector<long long> samples(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    Vertex cur = x;
    long long steps = 0;
    while (true) {
      if (++steps > kMaxTrajectorySteps)
        throw Error(Errc::runaway, "trajectory exceeded " + std::to_string(kMaxTrajectorySteps) + " steps");
      if (lazy > 0.0 && stream.uniform() < lazy) {
        // hold
      } else {
        const double* begin = cumw.data() + offsets[cur];
        const double* end = cumw.data() + offsets[cur + 1];
        const double u = stream.uniform() * g.mu(cur);
        const double* it = std::upper_bound(begin, end, u);
        if (it == end) --it;
        cur = g.neighbors(cur)[static_cast<std::size_t>(it - begin)].v;
      }
      if (!inside[cur]) break;
    }
    samples[i] = steps;
  });
  std::sort(samples.begin(), samples.end());
  return samples;
}

double prob_before(std::span<const double> cdf, double t) {
  if (cdf.empty()) throw Error(Errc::invalid_parameter, "empty cdf");
  const double k = std::ceil(t) - 1.0;
  if (k < 0.0) return 0.0;
  if (k >= static_cast<double>(cdf.size() - 1)) return cdf.back();
  return cdf[static_cast<std::size_t>(k)];
}

}  // namespace heatlab
