#include "heatlab/linalg.hpp"

#include <algorithm>

#include "heatlab/error.hpp"

namespace heatlab {

DomainSolver::DomainSolver(const WeightedGraph& g, std::span<const Vertex> domain)
    : g_(&g), domain_(domain.begin(), domain.end()), local_(g.n(), npos) {
  std::sort(domain_.begin(), domain_.end());
  domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
  if (domain_.empty()) throw Error(Errc::domain, "empty solve domain");
  if (domain_.size() == g.n())
    throw Error(Errc::ball_escapes_graph, "solve domain is the whole graph; the system is singular");
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    g.check_vertex(domain_[i]);
    local_[domain_[i]] = i;
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(domain_.size() * 5);
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    const Vertex x = domain_[i];
    trip.emplace_back(i, i, g.mu(x));
    for (const auto& nb : g.neighbors(x)) {
      const std::size_t j = local_[nb.v];
      if (j != npos) trip.emplace_back(i, j, -nb.w);
    }
  }
  const auto m = static_cast<Eigen::Index>(domain_.size());
  matrix_.resize(m, m);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  ldlt_.compute(matrix_);
  if (ldlt_.info() != Eigen::Success)
    throw Error(Errc::domain, "Dirichlet Laplacian factorization failed (domain not coupled to its complement?)");
}

Eigen::VectorXd DomainSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd u = ldlt_.solve(rhs);
  const Eigen::VectorXd r = rhs - matrix_ * u;
  u += ldlt_.solve(r);
  return u;
}

Eigen::MatrixXd DomainSolver::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd u = ldlt_.solve(rhs);
  const Eigen::MatrixXd r = rhs - matrix_ * u;
  u += ldlt_.solve(r);
  return u;
}

}  // namespace heatlab
