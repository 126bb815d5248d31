#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "heatlab/graph.hpp"

namespace heatlab {

/// Sparse Cholesky factorization of the Dirichlet Laplacian (mu - W)
/// restricted to a domain D. For a nonempty D that is a proper subset of a
/// connected graph the matrix is symmetric positive definite.
///
/// The lazy walk's equations all reduce to this matrix:
///   (I - P_D) u = f   <=>   (1 - lazy) (mu - W)_D u = mu f.
class DomainSolver {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  DomainSolver(const WeightedGraph& g, std::span<const Vertex> domain);

  const std::vector<Vertex>& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return domain_.size(); }
  std::size_t local(Vertex v) const { return local_[v]; }
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }

  /// Solves (mu - W)_D u = rhs with one step of iterative refinement.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  const WeightedGraph* g_;
  std::vector<Vertex> domain_;
  std::vector<std::size_t> local_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace heatlab
