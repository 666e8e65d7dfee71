#pragma once

// Internal dense helpers shared by the measure and rate solvers.

#include <vector>

#include <Eigen/Dense>

#include "rwre/chain.hpp"

namespace rwre::detail {

/// Dense transition matrix of a kernel on shift edges.
inline Eigen::MatrixXd dense_kernel(const WordSpace& space,
                                    const std::vector<double>& probs) {
  const std::size_t S = space.num_states(), K = space.num_letters();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      P(s, space.successor(s, k)) += probs[s * K + k];
  return P;
}

/// Solves mu (I - P) = 0, sum mu = 1 for an irreducible stochastic P, with
/// one step of iterative refinement.
inline Eigen::VectorXd stationary_dense(const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - P.transpose();
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd mu = lu.solve(b);
  mu += lu.solve(b - A * mu);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = std::max(mu(i), 0.0);
  mu /= mu.sum();
  return mu;
}

}  // namespace rwre::detail
