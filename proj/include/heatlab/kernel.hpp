#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "heatlab/graph.hpp"
#include "heatlab/rng.hpp"

namespace heatlab {

/// Lazy reversible random walk on a WeightedGraph:
/// P(x,x) = lazy, P(x,y) = (1 - lazy) w(x,y) / mu(x) for y ~ x.
///
/// Holds a reference to the graph, which must outlive the operator.
class TransitionOperator {
 public:
  explicit TransitionOperator(const WeightedGraph& g, double lazy = 0.5);

  const WeightedGraph& graph() const noexcept { return *g_; }
  double lazy() const noexcept { return lazy_; }
  std::size_t n() const noexcept { return g_->n(); }

  double prob(Vertex x, Vertex y) const;

  /// out = P f, i.e. out(x) = sum_y P(x,y) f(y).
  void apply(std::span<const double> f, std::span<double> out) const;

  /// out = m P, i.e. out(y) = sum_x m(x) P(x,y). Evolves a mass vector.
  void evolve(std::span<const double> m, std::span<double> out) const;

  /// Transition probabilities aligned with graph().neighbors(x).
  std::span<const double> step_probs(Vertex x) const {
    return {probs_.data() + offsets_[x], probs_.data() + offsets_[x + 1]};
  }

 private:
  const WeightedGraph* g_;
  double lazy_;
  std::vector<std::size_t> offsets_;
  std::vector<double> probs_;
};

/// The walk killed on leaving a vertex set D: the sub-Markov kernel P
/// restricted to D x D.
class KilledOperator {
 public:
  KilledOperator(const TransitionOperator& op, std::span<const Vertex> domain);

  const TransitionOperator& base() const noexcept { return *op_; }
  const std::vector<char>& mask() const noexcept { return mask_; }
  const std::vector<Vertex>& domain() const noexcept { return domain_; }
  bool contains(Vertex x) const { return mask_[x] != 0; }

  /// out = P_D f on D, zero elsewhere; f is read only on D.
  void apply(std::span<const double> f, std::span<double> out) const;

  /// (P_D 1)(x) for every vertex (zero off D).
  std::vector<double> row_sums() const;

 private:
  const TransitionOperator* op_;
  std::vector<Vertex> domain_;
  std::vector<char> mask_;
};

/// p_t(x,y) = P^t(x,y) / mu(y), by t mass-vector steps from the indicator of x.
double heat_kernel(const TransitionOperator& op, int t, Vertex x, Vertex y);

/// p_t(x, .) for every y.
std::vector<double> heat_kernel_row(const TransitionOperator& op, int t, Vertex x);

/// P_x(T_D <= t) for t = 0..t_max, where T_D = inf{t > 0 : X_t not in D}.
/// Entry 0 is always 0.
std::vector<double> exit_distribution(const TransitionOperator& op, std::span<const Vertex> domain,
                                      Vertex x, int t_max);

/// Exit distribution from the interior of a proper ball.
std::vector<double> exit_distribution(const TransitionOperator& op, const Ball& ball, Vertex x, int t_max);

/// P_x(tau_A <= t) for t = 0..t_max, with tau_A = 0 when x is in A.
std::vector<double> hitting_distribution(const TransitionOperator& op, std::span<const Vertex> target,
                                         Vertex x, int t_max);

/// P_z(tau_A <= k) for every start z, at each k in `steps` (ascending, >= 0).
/// Result is indexed [position in steps][z].
std::vector<std::vector<double>> hitting_cdf_all(const TransitionOperator& op, std::span<const Vertex> target,
                                                 std::span<const int> steps);

/// P_t(A,B) = sum_{x in A} sum_{y in B} p_t(x,y) mu(x) mu(y).
double set_kernel(const TransitionOperator& op, int t, std::span<const Vertex> a, std::span<const Vertex> b);

/// Hard per-trajectory step cap for Monte Carlo exits.
inline constexpr long long kMaxTrajectorySteps = 10'000'000;

/// n simulated exit times from the ball interior starting at x, sorted.
/// Trajectory i draws from rng.substream(i), so the sample depends only on
/// (rng, n) and not on `jobs`.
std::vector<long long> mc_exit_samples(const TransitionOperator& op, const Ball& ball, Vertex x, std::size_t n,
                                       const RngStream& rng, int jobs = 1);

/// Probability P(T < t) for a real time t from a cdf vector cdf[k] = P(T <= k).
/// Values of t past the end of the vector read the last entry.
double prob_before(std::span<const double> cdf, double t);

}  // namespace heatlab
