#include "irwri/helmholtz.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

namespace irwri {

namespace {

// Classic mixed-grid coefficients: the Laplacian blends the axis-aligned and
// 45-degree stencils, the mass term is spread over the 3x3 neighborhood.
constexpr double kMixA = 0.5461;
constexpr double kMassC = 0.6248;
constexpr double kMassD = 0.09381;
constexpr double kMassE = (1.0 - kMassC - 4.0 * kMassD) / 4.0;

constexpr double kReflectionTarget = 1e-3;

}  // namespace

PmlProfile PmlProfile::make(const Grid2D& grid, double omega, double c_ref) {
  PmlProfile p;
  p.omega = omega;
  p.dx = grid.dx;
  p.dz = grid.dz;
  p.x_lo = grid.phys_ix0();
  p.x_hi = grid.phys_ix0() + grid.nx - 1;
  p.z_lo = grid.phys_iz0();
  p.z_hi = grid.phys_iz0() + grid.nz - 1;
  p.top_pml = !grid.free_surface_top;
  p.len_x = grid.npml * grid.dx;
  p.len_z = grid.npml * grid.dz;
  if (grid.npml > 0) {
    const double ln_r = std::log(1.0 / kReflectionTarget);
    p.sigma_max_x = (p.p_pml + 1) * c_ref * ln_r / (2.0 * p.len_x);
    p.sigma_max_z = (p.p_pml + 1) * c_ref * ln_r / (2.0 * p.len_z);
  }
  return p;
}

double PmlProfile::sigma_x(double ix) const {
  if (len_x <= 0.0) return 0.0;
  double d;
  if (ix < x_lo)
    d = (x_lo - ix) * dx;
  else if (ix > x_hi)
    d = (ix - x_hi) * dx;
  else
    return 0.0;
  return sigma_max_x * std::pow(d / len_x, p_pml);
}

double PmlProfile::sigma_z(double iz) const {
  if (len_z <= 0.0) return 0.0;
  double d;
  if (iz < z_lo) {
    if (!top_pml) return 0.0;
    d = (z_lo - iz) * dz;
  } else if (iz > z_hi) {
    d = (iz - z_hi) * dz;
  } else {
    return 0.0;
  }
  return sigma_max_z * std::pow(d / len_z, p_pml);
}

HelmholtzOperator::HelmholtzOperator(const SquaredSlownessModel& model,
                                     double omega, StencilKind kind)
    : grid_(model.grid), omega_(omega), kind_(kind) {
  if (!(omega > 0.0)) throw Error("helmholtz: omega must be positive");
  const int n = grid_.num_nodes();
  if (model.values.size() != n)
    throw DimensionError("helmholtz: model length does not match grid");
  if (kind == StencilKind::mixed_nine_point && grid_.dx != grid_.dz)
    throw ConfigError("mixed_nine_point stencil requires dx == dz");

  const double c_min = 1.0 / std::sqrt(model.values.maxCoeff());
  const double c_ref = 1.0 / std::sqrt(model.values.minCoeff());
  pml_ = PmlProfile::make(grid_, omega, c_ref);
  points_per_wavelength_ = 2.0 * std::numbers::pi * c_min / omega /
                           std::max(grid_.dx, grid_.dz);

  const int tnx = grid_.total_nx();
  const int tnz = grid_.total_nz();

  // Stretch factors at nodes and at half positions; half[i] sits between
  // node i-1 and node i, so half arrays have one extra slot.
  std::vector<Complex> sx(tnx), sz(tnz), sxh(tnx + 1), szh(tnz + 1);
  for (int i = 0; i < tnx; ++i) sx[i] = pml_.stretch_x(i);
  for (int i = 0; i <= tnx; ++i) sxh[i] = pml_.stretch_x(i - 0.5);
  for (int k = 0; k < tnz; ++k) sz[k] = pml_.stretch_z(k);
  for (int k = 0; k <= tnz; ++k) szh[k] = pml_.stretch_z(k - 0.5);

  const double inv_dx2 = 1.0 / (grid_.dx * grid_.dx);
  const double inv_dz2 = 1.0 / (grid_.dz * grid_.dz);
  const bool nine = kind == StencilKind::mixed_nine_point;
  const double ax = nine ? kMixA : 1.0;

  std::vector<Triplet> lap;
  std::vector<Triplet> wgt;
  lap.reserve(static_cast<size_t>(n) * (nine ? 9 : 5));
  wgt.reserve(static_cast<size_t>(n) * (nine ? 9 : 1));

  for (int ix = 0; ix < tnx; ++ix) {
    for (int iz = 0; iz < tnz; ++iz) {
      const int row = grid_.index(ix, iz);
      const Complex xi = sx[ix] * sz[iz];
      Complex diag = 0.0;

      // Axis-aligned differences in divergence form: the shared half-node
      // coefficient and the common transverse stretch keep A^T = A exact.
      // Neighbors outside the padded grid are homogeneous Dirichlet ghosts:
      // the diagonal keeps the full contribution, the off-diagonal drops.
      for (int s : {-1, 1}) {
        const Complex c = ax * (sz[iz] / sxh[ix + (s + 1) / 2]) * inv_dx2;
        diag -= c;
        const int jx = ix + s;
        if (jx >= 0 && jx < tnx) lap.emplace_back(row, grid_.index(jx, iz), c);
      }
      for (int s : {-1, 1}) {
        const Complex c = ax * (sx[ix] / szh[iz + (s + 1) / 2]) * inv_dz2;
        diag -= c;
        const int jz = iz + s;
        if (jz >= 0 && jz < tnz) lap.emplace_back(row, grid_.index(ix, jz), c);
      }

      if (nine) {
        // Rotated operator on the diagonal neighbors, spacing sqrt(2) dx.
        // The stretch enters as 1/(xi_x xi_z) at the shared diagonal half
        // node; exact only outside the PML, a symmetric approximation
        // inside it (absorption there is validated against the analytic
        // oracle, not derived).
        const double b = (1.0 - kMixA) * 0.5 * inv_dx2;
        for (int sxn : {-1, 1}) {
          for (int szn : {-1, 1}) {
            const Complex kappa =
                1.0 / (sxh[ix + (sxn + 1) / 2] * szh[iz + (szn + 1) / 2]);
            const Complex c = b * kappa;
            diag -= c;
            const int jx = ix + sxn;
            const int jz = iz + szn;
            if (jx >= 0 && jx < tnx && jz >= 0 && jz < tnz)
              lap.emplace_back(row, grid_.index(jx, jz), c);
          }
        }
      }
      lap.emplace_back(row, row, diag);

      if (!nine) {
        wgt.emplace_back(row, row, xi);
      } else {
        // Anti-lumped mass: weights sum to 1 per row; weight aimed at a
        // ghost neighbor is folded back into the center so rows stay
        // normalized and the matrix symmetric. The per-pair stretch mean
        // (xi_j + xi_l)/2 preserves symmetry inside the PML.
        double center = kMassC;
        for (int ox = -1; ox <= 1; ++ox) {
          for (int oz = -1; oz <= 1; ++oz) {
            if (ox == 0 && oz == 0) continue;
            const double w = (ox == 0 || oz == 0) ? kMassD : kMassE;
            const int jx = ix + ox;
            const int jz = iz + oz;
            if (jx < 0 || jx >= tnx || jz < 0 || jz >= tnz) {
              center += w;
              continue;
            }
            const Complex xi_l = sx[jx] * sz[jz];
            wgt.emplace_back(row, grid_.index(jx, jz), w * 0.5 * (xi + xi_l));
          }
        }
        wgt.emplace_back(row, row, center * xi);
      }
    }
  }

  laplacian_.resize(n, n);
  laplacian_.setFromTriplets(lap.begin(), lap.end());
  weights_.resize(n, n);
  weights_.setFromTriplets(wgt.begin(), wgt.end());
  matrix_ = laplacian_ + mass_matrix(model.values);
  matrix_.makeCompressed();
}

SpMat HelmholtzOperator::mass_matrix(const RVec& m) const {
  if (m.size() != weights_.rows())
    throw DimensionError("mass_matrix: model length does not match grid");
  const double half_w2 = 0.5 * omega_ * omega_;
  SpMat out = weights_;
  for (int k = 0; k < out.outerSize(); ++k)
    for (SpMat::InnerIterator it(out, k); it; ++it)
      it.valueRef() *= half_w2 * (m[it.row()] + m[it.col()]);
  return out;
}

SpMat HelmholtzOperator::mass_jacobian(const CVec& u) const {
  const int n = static_cast<int>(weights_.rows());
  if (u.size() != n)
    throw DimensionError("mass_jacobian: wavefield length does not match grid");
  const double half_w2 = 0.5 * omega_ * omega_;
  std::vector<Triplet> t;
  t.reserve(weights_.nonZeros() + n);
  for (int k = 0; k < weights_.outerSize(); ++k)
    for (SpMat::InnerIterator it(weights_, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                     half_w2 * it.value() * u[it.col()]);
  const CVec wu = weights_ * u;
  for (int j = 0; j < n; ++j) t.emplace_back(j, j, half_w2 * wu[j]);
  SpMat out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

CVec HelmholtzOperator::apply(const CVec& x) const {
  if (x.size() != matrix_.cols())
    throw DimensionError("apply: vector length does not match operator");
  return matrix_ * x;
}

CMat HelmholtzOperator::apply_multi(const CMat& x) const {
  if (x.rows() != matrix_.cols())
    throw DimensionError("apply: block rows do not match operator");
  return matrix_ * x;
}

CVec HelmholtzOperator::adjoint_apply(const CVec& x) const {
  if (x.size() != matrix_.rows())
    throw DimensionError("adjoint_apply: vector length does not match operator");
  return matrix_.adjoint() * x;
}

void HelmholtzOperator::write_coo(std::ostream& os) const {
  os.precision(17);
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SpMat::InnerIterator it(matrix_, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' '
         << it.value().imag() << '\n';
}

Complex greens_function_oracle(double omega, double c, double r) {
  if (!(r > 0.0))
    throw Error("greens_function_oracle: receiver coincides with source");
  const double x = omega * r / c;
  const double j0 = std::cyl_bessel_j(0.0, x);
  const double y0 = std::cyl_neumann(0.0, x);
  return Complex(0.0, 0.25) * Complex(j0, y0);
}

Complex greens_function_oracle(double omega, double c, double src_x,
                               double src_z, double rec_x, double rec_z) {
  return greens_function_oracle(omega, c,
                                std::hypot(rec_x - src_x, rec_z - src_z));
}

}  // namespace irwri
