#include "irwri/linsolve.hpp"

#include <Eigen/SparseLU>

namespace irwri {

SolveCounters& counters() {
  static SolveCounters c;
  return c;
}

struct Factorization::Impl {
  // Keep the matrix so solves can do one refinement pass; at penalty
  // parameters near the exact-data limit the raw LU solve alone loses
  // several digits.
  SpMat matrix;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

Factorization::Factorization(const SpMat& matrix) : impl_(new Impl) {
  if (matrix.rows() != matrix.cols())
    throw DimensionError("factorize: matrix must be square");
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  impl_->lu.analyzePattern(impl_->matrix);
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularMatrixError("factorize: " + impl_->lu.lastErrorMessage(), -1);
  }
  counters().factor_count.fetch_add(1, std::memory_order_relaxed);
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

int Factorization::size() const {
  return static_cast<int>(impl_->matrix.rows());
}

CMat Factorization::solve_multi(const CMat& rhs) const {
  if (rhs.rows() != impl_->matrix.rows())
    throw DimensionError("solve: rhs rows do not match matrix size");
  CMat x = impl_->lu.solve(rhs);
  // One step of iterative refinement.
  CMat r = rhs - impl_->matrix * x;
  x += impl_->lu.solve(r);
  counters().solve_count.fetch_add(1, std::memory_order_relaxed);
  return x;
}

CVec Factorization::solve(const CVec& rhs) const {
  return solve_multi(rhs);
}

LstsqResult dense_lstsq(const CMat& a, const CVec& b) {
  if (a.rows() != b.rows())
    throw DimensionError("dense_lstsq: rhs rows do not match matrix rows");
  LstsqResult out;
  Eigen::ColPivHouseholderQR<CMat> qr(a);
  out.rank = qr.rank();
  if (out.rank < a.cols()) {
    out.rank_deficient = true;
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(a);
    out.x = cod.solve(b);
  } else {
    out.x = qr.solve(b);
  }
  return out;
}

}  // namespace irwri
