#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "heatlab/exit.hpp"
#include "heatlab/graph.hpp"
#include "heatlab/kernel.hpp"

namespace heatlab {

/// Common report shape of every theorem-level experiment. `grid` holds one
/// JSON object per grid point; `excluded` counts points dropped by the
/// experiment's own exclusion rule, `flagged` points kept but marked.
struct BoundReport {
  std::string experiment;
  std::string family;
  Json grid = Json::array();
  std::map<std::string, double> constants;
  bool pass = false;
  std::size_t excluded = 0;
  std::size_t flagged = 0;
};

Json to_json(const BoundReport& r);

// ---------------------------------------------------------------------------
// Chaining

/// Hard cap on the number of (z, w) link probabilities per chain instance.
inline constexpr std::size_t kMaxLinkPairs = 2'000'000;

struct ChainBound {
  Vertex x = 0;
  Vertex y = 0;
  double t = 0.0;
  int l = 1;
  int d = 0;              ///< d(x, y)
  double r = 0.0;         ///< d / (3l)
  double s = 0.0;         ///< t / l
  int link_radius = 0;    ///< ceil(r), radius of the target balls
  int pair_distance = 0;  ///< ceil(4r), admissible d(z, w)
  std::size_t pairs = 0;
  Vertex arg_z = 0;  ///< pair attaining the infimum
  Vertex arg_w = 0;
  double link_inf = 1.0;  ///< inf P_z(tau_{B(w, ceil r)} < s)
  double bound = 1.0;     ///< link_inf^l
  double exact = 0.0;     ///< P_x(tau_{B(y, ceil r)} < t)
  bool in_hypothesis_range = true;  ///< d/4 <= r < d
  bool holds() const noexcept { return bound <= exact + 1e-12; }
};

/// Lower bound for one time t.
ChainBound chain_lower_bound(const TransitionOperator& op, Vertex x, Vertex y, double t, int l, int jobs = 1);

/// The same geometry at several times; the link probabilities for every t
/// come out of one sweep per target ball. Results follow the order of `times`.
std::vector<ChainBound> chain_lower_bounds(const TransitionOperator& op, Vertex x, Vertex y,
                                           std::span<const double> times, int l, int jobs = 1);

struct Prop3Result {
  NuValue nu_3d;       ///< nu(x, t, 3d) over A = B(x, 3d), used as l
  NuValue nu_d;        ///< same count with A = B(x, d)
  bool flagged = false;  ///< nu infinite or larger than d: bound reported as 0
  ChainBound chain;
  double bound = 0.0;
  double C_emp = 0.0;  ///< -log(bound) / nu
};

/// Chain bound with l = nu(x, t, 3d).
Prop3Result prop3_lower(const TransitionOperator& op, const GraphExitOracle& E, Vertex x, Vertex y, double t,
                        double q, int jobs = 1);

// ---------------------------------------------------------------------------
// Exit-time envelopes

struct EnvelopeOptions {
  double q = 1.0;
  int b = 6;
  std::vector<double> thetas;   ///< t = theta * E(x, R)
  std::vector<double> lambdas;  ///< t = lambda * q * R, the scale where nu reaches its cap
  int jobs = 1;
};

struct EnvelopePoint {
  Vertex x;
  int R;
  double theta;   ///< t / E(x, R)
  double t;
  double prob;  ///< P_x(T_{x,R} < t)
  int kappa;
  NuValue nu;
};

struct EnvelopeScale {
  int R;
  double c_hat;  ///< min over points with kappa > 0 of -log P / kappa
  double C_hat;  ///< max over points with nu finite of -log P / nu
};

struct EnvelopeResult {
  std::vector<EnvelopePoint> points;
  std::vector<EnvelopeScale> scales;  ///< ascending R
  double c_hat = 0.0;
  double C_hat = 0.0;
  double c_spread = 0.0;  ///< relative spread of c_hat over the top three scales
  double C_spread = 0.0;
  std::size_t kappa_excluded = 0;
  std::size_t nu_excluded = 0;
  BoundReport report;
};

/// Exact P_x(T_{x,R} < t) against kappa(x,t,R) and nu(x,t,bR). pass: c_hat > 0,
/// C_hat finite, both spreads <= 0.30.
EnvelopeResult theorem1_envelope(const TransitionOperator& op, std::span<const Vertex> centers,
                                 std::span<const int> radii, const EnvelopeOptions& opt);

struct ProfileResult {
  std::vector<double> X;  ///< (R^beta / t)^{1/(beta-1)}
  std::vector<double> Y;  ///< -log P
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  BoundReport report;
};

/// Regression of -log P_x(T_{x,R} < t) on (R^beta/t)^{1/(beta-1)}, with
/// t = R^beta / X^{beta-1} at each requested X, rounded to the nearest
/// integer. Points with t < min_ratio * R are excluded (ballistic regime).
/// pass: slope > 0 and r2 >= min_r2.
ProfileResult corollary2_profile(const TransitionOperator& op, double beta, std::span<const Vertex> centers,
                                 std::span<const int> radii, std::span<const double> X, double min_r2,
                                 double min_ratio = 3.0);

struct HeatPair {
  Vertex x;
  Vertex y;
};

/// Regression of -log[p_t(x,y) V(x, t^{1/beta})] on (d^beta/t)^{1/(beta-1)};
/// V(x, rho) = mu(B(x, ceil rho)). Diagnostic, pass: slope > 0.
ProfileResult heat_profile(const TransitionOperator& op, double beta, std::span<const HeatPair> pairs,
                           std::span<const int> times);

// ---------------------------------------------------------------------------
// Scaling window

struct ShortTimeOptions {
  Vertex a = 0;       ///< center of every A_k
  Vertex toward = 0;  ///< B_k centers sit on the shortest path a -> toward
  int d0 = 1;
  std::vector<int> levels;
  std::vector<double> thetas;
};

struct ShortTimeLevel {
  int k;
  int d;        ///< d(A_k, B_k)
  int radius;   ///< of A_k and B_k
  Vertex b;     ///< center of B_k
  double t;
  double mu_a;
  double P;     ///< P_t(A_k, B_k)
  double Q;
};

struct ShortTimeSeries {
  double theta;
  std::vector<ShortTimeLevel> levels;
  double spread = 0.0;  ///< over the top three levels
  double value = 0.0;   ///< mean Q over the top three levels
};

struct ShortTimeResult {
  double beta = 0.0;
  std::vector<ShortTimeSeries> series;
  std::size_t excluded = 0;
  BoundReport report;
};

/// For each level k: nominal distance 2^k d0, balls A_k = B(a, rho),
/// B_k = B(b, rho) with rho = ceil(d/2), t = round(theta d^beta) with d the
/// realized d(A_k, B_k), and
///   Q_k = t^{1/(beta-1)} log(P_t(A_k,B_k) / mu(A_k)) / d^{beta/(beta-1)}.
/// Levels whose geometry does not fit the graph are excluded. pass: every
/// series has spread <= 0.25 and a negative value.
ShortTimeResult short_time_experiment(const TransitionOperator& op, double beta, const ShortTimeOptions& opt);

}  // namespace heatlab
