#pragma once

#include <atomic>
#include <memory>

#include "irwri/types.hpp"

namespace irwri {

// Global tallies of sparse complex factorizations and blocked solves.
// The inversion drivers read deltas of these to report per-iteration cost;
// tests assert the per-algorithm factorization law against them.
struct SolveCounters {
  std::atomic<long> factor_count{0};
  std::atomic<long> solve_count{0};

  void reset() {
    factor_count = 0;
    solve_count = 0;
  }
};

SolveCounters& counters();

// One LU decomposition of a sparse complex matrix. Immutable after
// construction; solves are const and may run concurrently. A solve of an
// n-column block counts as one blocked solve.
class Factorization {
 public:
  explicit Factorization(const SpMat& matrix);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  CVec solve(const CVec& rhs) const;
  CMat solve_multi(const CMat& rhs) const;

  int size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline Factorization factorize(const SpMat& matrix) {
  return Factorization(matrix);
}

// Dense least-squares oracle for small test instances. Rank-deficient
// systems yield the minimum-norm solution with the flag set.
struct LstsqResult {
  CVec x;
  bool rank_deficient = false;
  Eigen::Index rank = 0;
};

LstsqResult dense_lstsq(const CMat& a, const CVec& b);

}  // namespace irwri
