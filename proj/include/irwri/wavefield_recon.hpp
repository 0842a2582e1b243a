#pragma once

#include "irwri/acquisition.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/types.hpp"

namespace irwri {

// Scaled Lagrange multipliers of the wave equation (b_hat, N x n_s) and the
// observation equation (d_hat, M x n_s). Dual ascent keeps them equal to
// the running sums of the respective constraint violations.
struct DualState {
  CMat b_hat;
  CMat d_hat;

  static DualState zero(const Grid2D& grid, int num_receivers, int num_sources) {
    return {CMat::Zero(grid.num_nodes(), num_sources),
            CMat::Zero(num_receivers, num_sources)};
  }
};

// P^T P + lambda A^H Q A with Q = I - Phi Phi^T. Source independent: one
// factorization serves every column of the data block.
SpMat blended_normal_operator(const HelmholtzOperator& a,
                              const AcquisitionGeometry& geometry,
                              double lambda);

// P^T P + lambda A^H A (no projector; sources enter through the rhs).
SpMat localized_normal_operator(const HelmholtzOperator& a,
                                const AcquisitionGeometry& geometry,
                                double lambda);

// P^T P + lambda A^H Q_i A for one source; this is the operator that makes
// per-source processing cost one factorization each.
SpMat separate_normal_operator(const HelmholtzOperator& a,
                               const AcquisitionGeometry& geometry,
                               double lambda, int source);

// argmin_U |PU - D - d_hat|_F^2 + lambda |Q A U - b_hat|_F^2.
// One factorization, one blocked solve.
CMat reconstruct_blended(const HelmholtzOperator& a,
                         const AcquisitionGeometry& geometry, const CMat& d,
                         const DualState& duals, double lambda);

// argmin_U |PU - D - d_hat|_F^2 + lambda |A U - Phi S - b_hat|_F^2 with
// diagonal S. One factorization, one blocked solve.
CMat reconstruct_localized(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           const CMat& s_diag, const DualState& duals,
                           double lambda);

}  // namespace irwri
