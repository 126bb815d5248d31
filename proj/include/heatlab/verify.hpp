#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatlab/bounds.hpp"
#include "heatlab/kernel.hpp"

namespace heatlab {

/// sum_{k >= 0} P_x(T > k) from an exit CDF of the ball, extending the
/// horizon until the remaining survival mass is below 1e-14.
double exit_tail_sum(const TransitionOperator& op, const Ball& b, Vertex x);

/// sup_k |F_n(k) - F(k)| between the empirical CDF of sorted integer samples
/// and an exact CDF; entries past the end of `cdf` read its last value.
double ks_distance(std::span<const long long> sorted_samples, std::span<const double> cdf);

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(log(2/delta) / (2n)).
double dkw_epsilon(std::size_t n, double delta);

struct VerifyOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::size_t pairs = 8;          ///< sampled (x, y) pairs for kernel properties
  std::size_t exit_instances = 6; ///< sampled (x, R) for the CDF checks
  std::size_t trajectories = 20000;
};

struct VerifyCheck {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  BoundReport report;
};

/// Invariant suite on one graph: transition rows and reversibility; kernel
/// nonnegativity, normalization, symmetry and Chapman-Kolmogorov at sampled
/// points; exit CDF validity and the tail-sum identity against mean_exit;
/// Monte Carlo inside the DKW band. Sampling draws from `seed` only, so the
/// report does not depend on `jobs`.
VerifyResult run_verify(const TransitionOperator& op, const VerifyOptions& opt);

}  // namespace heatlab
