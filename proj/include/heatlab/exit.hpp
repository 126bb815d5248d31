#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/graph.hpp"
#include "heatlab/kernel.hpp"

namespace heatlab {

/// E_y(T_D) for every y in D (zero elsewhere): solves (I - P_D) u = 1.
/// Throws Error(domain) if the relative residual exceeds 1e-10.
std::vector<double> mean_exit_times(const TransitionOperator& op, std::span<const Vertex> domain);

struct ExitProfile {
  Vertex center = 0;
  int radius = 0;
  double E = 0.0;     ///< E(x,R), started at the center
  double Ebar = 0.0;  ///< sup over starting points in the ball
  Vertex argmax = 0;
  std::vector<Vertex> interior;
  std::vector<double> values;  ///< E_y(x,R) aligned with interior
};

ExitProfile exit_profile(const TransitionOperator& op, Vertex x, int radius);
double mean_exit(const TransitionOperator& op, Vertex x, int radius);
double mean_exit_sup(const TransitionOperator& op, Vertex x, int radius);

struct EbarRow {
  Vertex x;
  int R;
  double E;
  double Ebar;
  double ratio;
};

/// Table of Ebar/E ratios. `bounded` means the largest ratio over the upper
/// half of the radius window is at most 1.25 times the largest ratio over the
/// lower half (no upward trend).
struct EbarCheck {
  std::vector<EbarRow> rows;
  double max_ratio = 0.0;
  double trend = 1.0;
  bool bounded = false;
};

EbarCheck check_ebar(const TransitionOperator& op, std::span<const Vertex> centers, std::span<const int> radii);

// ---------------------------------------------------------------------------
// Iteration counts

/// E(y, rho) at real radius rho; +inf when B(y, rho) is the whole vertex set.
using ExitOracle = std::function<double(Vertex, double)>;

enum class RadiusRule {
  ceil,         ///< E(y, ceil(rho))
  interpolate,  ///< linear in rho between neighbouring integer radii
};

/// Mean exit times of the graph walk as an oracle, memoized by (y, radius).
/// Radii <= 1 give the singleton floor 1 / (1 - lazy). Thread-safe.
class GraphExitOracle {
 public:
  explicit GraphExitOracle(const TransitionOperator& op, RadiusRule rule = RadiusRule::ceil)
      : op_(&op), rule_(rule) {}

  double at_radius(Vertex y, int radius) const;
  double operator()(Vertex y, double radius) const;
  double floor_value() const noexcept { return 1.0 / (1.0 - op_->lazy()); }
  RadiusRule rule() const noexcept { return rule_; }
  ExitOracle as_function() const {
    return [this](Vertex y, double r) { return (*this)(y, r); };
  }
  std::size_t solves() const;

 private:
  const TransitionOperator* op_;
  RadiusRule rule_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<Vertex, int>, double> cache_;
};

/// Relative slack granted to both iteration-count inequalities so that exact
/// ties survive the rounding of t / k and E.
inline constexpr double kTieTolerance = 1e-12;

/// Largest k in [1, cap] with t/k <= q inf_{y in A} E(y, R/k); 0 if none.
/// cap <= 0 means cap = R.
int kappa(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap = 0);

struct NuValue {
  int value = 0;
  bool infinite = true;

  friend bool operator==(const NuValue&, const NuValue&) = default;
};

/// Smallest k in [1, cap] with t/k >= q sup_{y in A} E(y, R/k); infinite if
/// none. cap <= 0 means cap = R: past k = R the radius is a singleton, the
/// right side stays at its floor and t/k only shrinks, so no larger k can
/// succeed where k = R failed.
NuValue nu(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap = 0);

struct IterCounts {
  int kappa = 0;
  NuValue nu;
  double q = 1.0;
};

IterCounts iter_counts(const ExitOracle& E, double t, int R, double q, std::span<const Vertex> A, int cap = 0);

// ---------------------------------------------------------------------------

struct ScalingFit {
  std::string family;
  Vertex center = 0;
  std::vector<int> radii;
  std::vector<double> E;
  double beta = 0.0;
  double log_prefactor = 0.0;
  double r2 = 0.0;
  int r_min = 0;
  int r_max = 0;
};

/// Least-squares fit of log E(x,R) against log R. Needs >= 4 radii.
ScalingFit scaling_fit(const TransitionOperator& op, Vertex x, std::span<const int> radii);

/// Fit from precomputed values.
ScalingFit scaling_fit(std::span<const int> radii, std::span<const double> E);

struct P1Row {
  Vertex x;
  int r;
  int t;
  double E;
  double survival;  ///< P_x(T_{x,r} > t)
};

/// Survival probabilities at t = floor(fraction * E(x,r) / 2) for each
/// fraction in (0, 1]. pass: overall minimum >= 0.05 and the minimum over
/// the upper half of radii is at least 0.75 times that over the lower half.
struct P1Check {
  std::vector<P1Row> rows;
  double min_survival = 1.0;
  std::vector<std::pair<int, double>> per_radius_min;
  bool pass = false;
};

P1Check check_p1(const TransitionOperator& op, std::span<const Vertex> centers, std::span<const int> radii,
                 std::span<const double> fractions);

}  // namespace heatlab
