#include "electroelastic/linear_solver.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseLU>

namespace electroelastic {

DofMap DofMap::from_fixed(const std::vector<char>& fixed) {
  DofMap m;
  m.index.assign(fixed.size(), -1);
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (!fixed[i]) m.index[i] = m.n_free++;
  return m;
}

struct SymmetricSolver::Impl {
  Eigen::CholmodSupernodalLLT<SparseMatrix> llt;
  Eigen::SparseLU<SparseMatrix> lu;
};

SymmetricSolver::SymmetricSolver() : impl_(std::make_unique<Impl>()) {
  // Indefinite matrices are expected (LU fallback); keep CHOLMOD quiet.
  impl_->llt.cholmod().print = 0;
  impl_->llt.cholmod().error_handler = nullptr;
}
SymmetricSolver::~SymmetricSolver() = default;

void SymmetricSolver::factorize(const SparseMatrix& A) {
  require(A.rows() == A.cols(), ErrorKind::Assembly, "system matrix is not square");
  use_lu_ = false;
  if (A.rows() == 0) return;
  impl_->llt.compute(A);
  if (impl_->llt.info() == Eigen::Success) return;
  use_lu_ = true;
  impl_->lu.compute(A);
  if (impl_->lu.info() != Eigen::Success) fail(ErrorKind::Assembly, "singular system matrix");
}

VectorX SymmetricSolver::solve(const VectorX& b) const {
  if (b.size() == 0) return VectorX();
  VectorX x = use_lu_ ? VectorX(impl_->lu.solve(b)) : VectorX(impl_->llt.solve(b));
  if (!x.allFinite()) fail(ErrorKind::Assembly, "linear solve produced non-finite values");
  return x;
}

}  // namespace electroelastic
