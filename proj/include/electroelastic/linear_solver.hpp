#pragma once

#include "electroelastic/common.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace electroelastic {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Compact numbering of the free (non-Dirichlet) unknowns.
struct DofMap {
  std::vector<Index> index;  // -1 for fixed unknowns
  Index n_free = 0;

  static DofMap from_fixed(const std::vector<char>& fixed);
  bool free(std::size_t i) const { return index[i] >= 0; }
};

/// Sparse symmetric solve: supernodal Cholesky, LU fallback when the matrix
/// is not numerically positive definite.
class SymmetricSolver {
 public:
  SymmetricSolver();
  ~SymmetricSolver();
  SymmetricSolver(const SymmetricSolver&) = delete;
  SymmetricSolver& operator=(const SymmetricSolver&) = delete;

  /// Throws Assembly if both factorizations fail.
  void factorize(const SparseMatrix& A);
  VectorX solve(const VectorX& b) const;
  bool used_lu() const { return use_lu_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool use_lu_ = false;
};

}  // namespace electroelastic
