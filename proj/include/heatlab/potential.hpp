#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/graph.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/linalg.hpp"

namespace heatlab {

/// Solution of a discrete Dirichlet problem on D with data on its outer
/// boundary. `u` is indexed by vertex: defined on D and on every vertex that
/// was given a value, NaN elsewhere.
struct PotentialSolve {
  std::vector<Vertex> domain;
  std::vector<Vertex> boundary;
  std::vector<double> u;
  double energy = 0.0;  ///< sum over edges with both ends defined of w (u(x) - u(y))^2
};

/// Vertices outside D adjacent to D, sorted.
std::vector<Vertex> outer_boundary(const WeightedGraph& g, std::span<const Vertex> domain);

/// Harmonic extension into D of boundary values. Every vertex of the outer
/// boundary must have a value (else Error(underdetermined)); values given
/// elsewhere outside D are carried into `u` and the energy.
PotentialSolve harmonic_extend(const TransitionOperator& op, std::span<const Vertex> domain,
                               const std::map<Vertex, double>& boundary_values);

/// max_{D u boundary} |u(x) - sum_y P(x,y) u(y)| over x in D.
double harmonic_residual(const TransitionOperator& op, const PotentialSolve& s);

struct HarnackRow {
  Vertex z;        ///< exit vertex of B(x, 2R)
  double sup = 0;  ///< of h_z over B(x, R)
  double inf = 0;
  double ratio = 1;
};

struct HarnackReport {
  Vertex center = 0;
  int radius = 0;
  double H = 1.0;
  Vertex argmax = 0;
  std::vector<HarnackRow> rows;
};

/// Optimal Harnack constant for the pair (B(x,R), B(x,2R)).
///
/// Nonnegative functions harmonic in B(x,2R) are the nonnegative
/// combinations of the harmonic measures h_z of the exit vertices z, and
/// sup/inf is a quasi-convex ratio, so the worst case sits on one h_z.
HarnackReport harnack_constant(const TransitionOperator& op, Vertex x, int R);

/// g^B(x,y) = G_B(x,y) / mu(y), G_B the expected number of visits to y
/// before leaving B started from x. Dense for up to kDenseLimit interior
/// vertices, per-column on-demand beyond.
class GreenKernel {
 public:
  static constexpr std::size_t kDenseLimit = 5000;

  GreenKernel(const TransitionOperator& op, const Ball& b);

  const Ball& ball() const noexcept { return ball_; }
  bool dense() const noexcept { return dense_.has_value(); }

  /// Zero when either argument lies outside the interior.
  double operator()(Vertex x, Vertex y) const;

  /// g^B(., y) indexed by vertex.
  std::vector<double> column(Vertex y) const;

 private:
  Ball ball_;
  std::size_t n_;
  double scale_;  // 1 / (1 - lazy)
  std::shared_ptr<DomainSolver> solver_;
  std::optional<Eigen::MatrixXd> dense_;
};

GreenKernel green_kernel(const TransitionOperator& op, const Ball& b);

struct CapacityResult {
  double cap = 0.0;
  double rho = 0.0;
  PotentialSolve potential;
};

/// cap(A,B) = min energy of f with f|A = 1, f|B = 0, attained by the harmonic
/// extension; rho = 1 / cap.
CapacityResult capacity(const TransitionOperator& op, std::span<const Vertex> a, std::span<const Vertex> b);

/// rho(x,r,R) = rho(B(x,r), complement of B(x,R)).
double resistance(const TransitionOperator& op, Vertex x, int r, int R);

struct LhgRow {
  Vertex x;
  int r;
  int R;
  double rho;
  double inf_g;  ///< inf over closed B(x,r) of g^{B(x,R)}(w, x)
  double sup_g;  ///< sup over B(x,R) \ B(x,r)
};

struct LhgCheck {
  std::vector<LhgRow> rows;
  double inf_ratio_min = 0, inf_ratio_max = 0;  ///< range of inf_g / rho
  double sup_ratio_min = 0, sup_ratio_max = 0;  ///< range of sup_g / rho
};

LhgRow lhg_row(const TransitionOperator& op, Vertex x, int r, int R);

struct LhgPoint {
  Vertex x;
  int r;
  int R;
};
LhgCheck check_lhg(const TransitionOperator& op, std::span<const LhgPoint> grid);

struct LpttRow {
  Vertex x;
  int r;
  Vertex w;
  int dist;    ///< d(w, x)
  double prob; ///< P_w(tau_{x,r} < T_{x,5r})
};

struct LpttCheck {
  std::vector<LpttRow> rows;
  double c1 = 1.0;  ///< minimum over rows with d(w,x) in [r, 4r]
  std::size_t skipped = 0;
};

/// P_w(hit B(x,r) before leaving B(x,5r)) for every w in B(x,5r), by one
/// two-class absorbing solve; indexed by vertex, NaN outside B(x,5r).
std::vector<double> hit_before_exit(const TransitionOperator& op, Vertex x, int r);

struct LpttPoint {
  Vertex x;
  int r;
};

/// Rows for every w with r <= d(w,x) <= 4r. Points whose 5r ball covers the
/// graph are skipped and counted.
LpttCheck check_lptt(const TransitionOperator& op, std::span<const LpttPoint> grid);

}  // namespace heatlab
