#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "abspec/errors.hpp"

namespace abspec {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;  // unit M-norm
  double residual = 0.0;   // ||K u - lambda M u|| / ||K u||
  int cluster = 0;
};

struct EigenOptions {
  double tol = 1e-9;
  double shift = 0.0;  // must lie below lambda_1; 0 keeps K SPD as-is
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  int max_subspace = 0;  // 0 = auto
  int max_restarts = 8;
  double cluster_rel_gap = 1e-6;
};

// m smallest eigenpairs of K u = lambda M u, both SPD, lower triangles
// stored. Shift-invert Lanczos in the M-inner product with full
// reorthogonalization; converged pairs are locked and deflated so that
// multiple eigenvalues are recovered across restarts.
std::vector<EigenPair> smallest_eigenpairs(
    const Eigen::SparseMatrix<double>& K_lower,
    const Eigen::SparseMatrix<double>& M_lower, int m,
    const EigenOptions& opt = {});

// Dense fallback oracle for cross-checking (dimension <= 2000 intended).
std::vector<EigenPair> dense_eigenpairs(
    const Eigen::SparseMatrix<double>& K_lower,
    const Eigen::SparseMatrix<double>& M_lower, int m);

// Consecutive sorted values whose relative gap is below rel_gap share a
// cluster id; clusters mark numerically non-simple eigenvalues.
std::vector<int> cluster(const std::vector<double>& values, double rel_gap);

}  // namespace abspec
