#pragma once

#include <iosfwd>

#include "irwri/grid.hpp"
#include "irwri/types.hpp"

namespace irwri {

enum class StencilKind { five_point, mixed_nine_point };

// Complex coordinate stretch xi = 1 + i*sigma/omega per axis, evaluated at
// arbitrary (possibly half-integer) padded-grid coordinates. sigma rises
// polynomially from 0 at the physical boundary to sigma_max at the outer
// PML edge; the amplitude is tuned for a 1e-3 normal-incidence theoretical
// reflection coefficient.
struct PmlProfile {
  double omega = 0.0;
  int p_pml = 2;
  double sigma_max_x = 0.0;
  double sigma_max_z = 0.0;
  double dx = 0.0, dz = 0.0;
  double len_x = 0.0, len_z = 0.0;  // PML thickness per axis (m)
  double x_lo = 0.0, x_hi = 0.0;    // physical range in padded index units
  double z_lo = 0.0, z_hi = 0.0;
  bool top_pml = false;

  static PmlProfile make(const Grid2D& grid, double omega, double c_ref);

  double sigma_x(double ix) const;
  double sigma_z(double iz) const;
  Complex stretch_x(double ix) const { return {1.0, sigma_x(ix) / omega}; }
  Complex stretch_z(double iz) const { return {1.0, sigma_z(iz) / omega}; }
};

// Discrete Helmholtz operator A(m) = Lap + Mass(m) on the padded grid,
// complex-symmetric (A^T = A, plain transpose) for both stencils. The mass
// term is exposed through a symmetric weight matrix W so that
//   mass_matrix(m)   = omega^2/2 (Diag(m) W + W Diag(m))
//   mass_jacobian(u) = omega^2/2 (W Diag(u) + Diag(W u))
// satisfy mass_matrix(m) u = mass_jacobian(u) m for all m, u. five_point
// uses W = Diag(xi_x xi_z) (plain diagonal mass, identity without PML);
// mixed_nine_point distributes the mass over the 3x3 neighborhood
// (anti-lumped) with the classic mixed-grid weights.
class HelmholtzOperator {
 public:
  HelmholtzOperator(const SquaredSlownessModel& model, double omega,
                    StencilKind kind);

  const Grid2D& grid() const { return grid_; }
  double omega() const { return omega_; }
  StencilKind stencil_kind() const { return kind_; }
  const PmlProfile& pml() const { return pml_; }

  const SpMat& matrix() const { return matrix_; }
  const SpMat& laplacian_part() const { return laplacian_; }
  const SpMat& mass_weights() const { return weights_; }

  SpMat mass_matrix(const RVec& m) const;
  SpMat mass_jacobian(const CVec& u) const;

  CVec apply(const CVec& x) const;
  CMat apply_multi(const CMat& x) const;
  CVec adjoint_apply(const CVec& x) const;

  // True when the shortest wavelength in the model spans fewer than 4 cells.
  bool dispersion_warning() const { return points_per_wavelength_ < 4.0; }
  double points_per_wavelength() const { return points_per_wavelength_; }

  // One "row col re im" line per stored entry.
  void write_coo(std::ostream& os) const;

 private:
  Grid2D grid_;
  double omega_;
  StencilKind kind_;
  PmlProfile pml_;
  double points_per_wavelength_ = 0.0;
  SpMat laplacian_;
  SpMat weights_;
  SpMat matrix_;
};

inline HelmholtzOperator assemble(const SquaredSlownessModel& model,
                                  double omega, StencilKind kind) {
  return HelmholtzOperator(model, omega, kind);
}

// Whole-space response (i/4) H0^(1)(omega r / c) of Lap u + omega^2/c^2 u = -delta
// under the e^{-i omega t} convention. Test oracle only.
Complex greens_function_oracle(double omega, double c, double r);
Complex greens_function_oracle(double omega, double c, double src_x,
                               double src_z, double rec_x, double rec_z);

}  // namespace irwri
