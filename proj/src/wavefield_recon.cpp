#include "irwri/wavefield_recon.hpp"

#include <unordered_set>

#include "irwri/linsolve.hpp"

namespace irwri {

namespace {

void check_common(const HelmholtzOperator& a,
                  const AcquisitionGeometry& geometry, const CMat& d,
                  const DualState& duals, double lambda) {
  if (!(lambda > 0.0)) throw Error("reconstruct: lambda must be positive");
  if (d.rows() != geometry.num_receivers() ||
      d.cols() != geometry.num_sources())
    throw DimensionError("reconstruct: data block shape mismatch");
  if (duals.b_hat.rows() != a.grid().num_nodes() ||
      duals.b_hat.cols() != geometry.num_sources())
    throw DimensionError("reconstruct: b_hat shape mismatch");
  if (duals.d_hat.rows() != geometry.num_receivers() ||
      duals.d_hat.cols() != geometry.num_sources())
    throw DimensionError("reconstruct: d_hat shape mismatch");
  if (a.grid().num_nodes() != geometry.grid.num_nodes())
    throw DimensionError("reconstruct: operator and geometry grids differ");
}

// Zeroes the rows of a sparse matrix at the given nodes. Values become
// zero, the stored pattern stays; downstream factorization is unaffected.
SpMat zero_rows(SpMat m, const std::unordered_set<int>& rows) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (rows.count(static_cast<int>(it.row()))) it.valueRef() = 0.0;
  return m;
}

SpMat adjoint_of(const SpMat& m) { return SpMat(m.adjoint()); }

}  // namespace

SpMat blended_normal_operator(const HelmholtzOperator& a,
                              const AcquisitionGeometry& geometry,
                              double lambda) {
  std::unordered_set<int> src(geometry.source_nodes.begin(),
                              geometry.source_nodes.end());
  const SpMat qa = zero_rows(a.matrix(), src);
  SpMat k = geometry.ptp_diagonal() + Complex(lambda) * (adjoint_of(a.matrix()) * qa);
  k.makeCompressed();
  return k;
}

SpMat localized_normal_operator(const HelmholtzOperator& a,
                                const AcquisitionGeometry& geometry,
                                double lambda) {
  SpMat k = geometry.ptp_diagonal() +
            Complex(lambda) * (adjoint_of(a.matrix()) * a.matrix());
  k.makeCompressed();
  return k;
}

SpMat separate_normal_operator(const HelmholtzOperator& a,
                               const AcquisitionGeometry& geometry,
                               double lambda, int source) {
  std::unordered_set<int> hole{geometry.source_nodes.at(source)};
  const SpMat qa = zero_rows(a.matrix(), hole);
  SpMat k = geometry.ptp_diagonal() + Complex(lambda) * (adjoint_of(a.matrix()) * qa);
  k.makeCompressed();
  return k;
}

CMat reconstruct_blended(const HelmholtzOperator& a,
                         const AcquisitionGeometry& geometry, const CMat& d,
                         const DualState& duals, double lambda) {
  check_common(a, geometry, d, duals, lambda);
  const SpMat k = blended_normal_operator(a, geometry, lambda);
  const CMat rhs =
      geometry.apply_p_transpose(d + duals.d_hat) +
      lambda * (adjoint_of(a.matrix()) * geometry.apply_q(duals.b_hat));
  Factorization f(k);
  return f.solve_multi(rhs);
}

CMat reconstruct_localized(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           const CMat& s_diag, const DualState& duals,
                           double lambda) {
  check_common(a, geometry, d, duals, lambda);
  const int n_s = geometry.num_sources();
  if (s_diag.rows() != n_s || s_diag.cols() != n_s)
    throw DimensionError("reconstruct_localized: signature matrix shape");
  for (int j = 0; j < n_s; ++j)
    for (int i = 0; i < n_s; ++i)
      if (i != j && s_diag(i, j) != 0.0)
        throw Error("reconstruct_localized: signature matrix must be diagonal");
  const SpMat k = localized_normal_operator(a, geometry, lambda);
  const CMat rhs =
      geometry.apply_p_transpose(d + duals.d_hat) +
      lambda *
          (adjoint_of(a.matrix()) * (geometry.apply_phi(s_diag) + duals.b_hat));
  Factorization f(k);
  return f.solve_multi(rhs);
}

}  // namespace irwri
