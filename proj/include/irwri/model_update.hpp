#pragma once

#include <vector>

#include "irwri/acquisition.hpp"
#include "irwri/grid.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/types.hpp"

namespace irwri {

struct RegularizerConfig {
  // Weight on |grad m|^2 over the physical window. With 0 every physical
  // node needs wavefield energy or the normal matrix turns singular.
  double gamma_tik = 0.0;
};

// One frequency's contribution to the model subproblem. Only the
// model-independent pieces of the operator are used (Laplacian, mass
// weighting), so an operator assembled in any model on the same
// grid/frequency/stencil is acceptable.
struct FrequencyTerm {
  const HelmholtzOperator* op = nullptr;
  const AcquisitionGeometry* geometry = nullptr;
  CMat u;       // N x n_s reconstructed wavefields
  CVec s_diag;  // n_s estimated signatures
  CMat b_hat;   // N x n_s, zero when duals are unused
};

// Forward-difference gradient over the physical window, scaled by 1/dx and
// 1/dz, (nx*(nz-1) + (nx-1)*nz) rows. Physical DOF (i, k) sits at column
// i*nz + k, matching pad_prolongation.
SpMatR gradient_operator(const Grid2D& grid);

// Normal system of
//   gamma |G p|^2 + lambda sum_i |L_i E p - y_i|^2,
//   L_i = mass_jacobian(u_i),  y_i = Phi s_i + b_hat_i - Lap u_i,
// over the physical DOF p; E replicates p into the pads so the padded model
// never develops structure the physical window does not have.
struct ModelQuadratic {
  SpMatR normal;  // (nx*nz) x (nx*nz), real symmetric
  RVec rhs;
  double fidelity_trace = 0.0;  // trace of the lambda-weighted block
  double gradient_trace = 0.0;  // trace of G^T G (always computed)
};

ModelQuadratic build_model_quadratic(const std::vector<FrequencyTerm>& terms,
                                     double lambda,
                                     const RegularizerConfig& reg);

// gamma_tik that gives the two normal-matrix blocks equal trace.
double suggest_gamma(const std::vector<FrequencyTerm>& terms, double lambda);

// Minimizes the quadratic exactly, replicates the physical solution into
// the pads, then projects onto the model bounds.
SquaredSlownessModel update_model(const SquaredSlownessModel& m_prev,
                                  const std::vector<FrequencyTerm>& terms,
                                  double lambda, const RegularizerConfig& reg);
SquaredSlownessModel update_model(const SquaredSlownessModel& m_prev,
                                  const HelmholtzOperator& op,
                                  const AcquisitionGeometry& geometry,
                                  const CMat& u, const CVec& s_diag,
                                  const CMat& b_hat, double lambda,
                                  const RegularizerConfig& reg);

// |A U - Phi S|_F in the operator's own model.
double pde_misfit(const HelmholtzOperator& a,
                  const AcquisitionGeometry& geometry, const CMat& u,
                  const CVec& s_diag);

// Subproblem objective and its gradient over the physical DOF, evaluated
// straight from the residuals (independent of build_model_quadratic).
double model_objective(const Grid2D& grid, const RVec& phys_m,
                       const std::vector<FrequencyTerm>& terms, double lambda,
                       const RegularizerConfig& reg);
RVec model_objective_gradient(const Grid2D& grid, const RVec& phys_m,
                              const std::vector<FrequencyTerm>& terms,
                              double lambda, const RegularizerConfig& reg);

}  // namespace irwri
