#include "irwri/source_estimation.hpp"

#include <string>

#include "irwri/linsolve.hpp"
#include "irwri/rng.hpp"

namespace irwri {

double SignatureMatrix::off_diagonal_ratio() const {
  const double diag_max = values.diagonal().cwiseAbs().maxCoeff();
  if (!(diag_max > 0.0))
    throw Error("signature matrix: zero diagonal, ratio undefined");
  double off_max = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (i != j) off_max = std::max(off_max, std::abs(values(i, j)));
  return off_max / diag_max;
}

SignatureMatrix extract_diagonal(const SignatureMatrix& full) {
  if (full.values.rows() != full.values.cols())
    throw DimensionError("extract_diagonal: matrix must be square");
  SignatureMatrix out;
  out.values = CMat(full.values.diagonal().asDiagonal());
  out.kind = SignatureKind::joint_diag;
  return out;
}

SignatureMatrix estimate_conventional(const HelmholtzOperator& a,
                                      const AcquisitionGeometry& geometry,
                                      const CMat& d) {
  const int n_s = geometry.num_sources();
  if (d.rows() != geometry.num_receivers() || d.cols() != n_s)
    throw DimensionError("estimate_conventional: data block shape mismatch");
  Factorization f(a.matrix());
  // g_i = P A^{-1} phi_i: unit-source predicted data, one blocked solve.
  const CMat unit = geometry.apply_phi(CMat::Identity(n_s, n_s));
  const CMat g = geometry.apply_p(f.solve_multi(unit));
  // Deconvolution decouples per source because S is diagonal; the matrix
  // products realize diag(G^H D) / diag(G^H G) in one pass.
  const CVec num = (g.adjoint() * d).diagonal();
  const CVec den = (g.adjoint() * g).diagonal();
  CVec s(n_s);
  for (int i = 0; i < n_s; ++i) {
    if (!(std::abs(den[i]) > 0.0))
      throw Error("estimate_conventional: zero predicted data for source " +
                  std::to_string(i));
    s[i] = num[i] / den[i];
  }
  SignatureMatrix out;
  out.values = CMat(s.asDiagonal());
  out.kind = SignatureKind::conventional;
  return out;
}

SeparateResult estimate_separate(const HelmholtzOperator& a,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, const DualState& duals,
                                 double lambda) {
  if (!(lambda > 0.0))
    throw Error("estimate_separate: lambda must be positive");
  const int n_s = geometry.num_sources();
  if (d.rows() != geometry.num_receivers() || d.cols() != n_s)
    throw DimensionError("estimate_separate: data block shape mismatch");
  const int n = a.grid().num_nodes();
  const SpMat ah = SpMat(a.matrix().adjoint());
  CMat u(n, n_s);
  CVec s(n_s);
  for (int i = 0; i < n_s; ++i) {
    const SpMat k = separate_normal_operator(a, geometry, lambda, i);
    CMat rhs = geometry.apply_p_transpose(d.col(i) + duals.d_hat.col(i));
    rhs += lambda * (ah * geometry.apply_qi(duals.b_hat.col(i), i));
    try {
      Factorization f(k);
      u.col(i) = f.solve_multi(rhs);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("estimate_separate: source " +
                                    std::to_string(i) + ": " + e.what(),
                                e.pivot_index());
    }
    // Stationarity of the signature: phi_i^H (A u_i - s phi_i - b_hat_i) = 0.
    const CVec au = a.matrix() * u.col(i);
    s[i] = au[geometry.source_nodes[i]] -
           duals.b_hat(geometry.source_nodes[i], i);
  }
  SeparateResult out;
  out.u = std::move(u);
  out.s.values = CMat(s.asDiagonal());
  out.s.kind = SignatureKind::separate;
  return out;
}

SeparateResult estimate_separate(const HelmholtzOperator& a,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, double lambda) {
  return estimate_separate(
      a, geometry, d,
      DualState::zero(a.grid(), geometry.num_receivers(),
                      geometry.num_sources()),
      lambda);
}

JointResult estimate_joint(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           const DualState& duals, double lambda,
                           bool subtract_dual) {
  JointResult out;
  out.underdetermined = geometry.num_sources() > geometry.num_receivers();
  out.u = reconstruct_blended(a, geometry, d, duals, lambda);
  CMat au = a.matrix() * out.u;
  if (subtract_dual) au -= duals.b_hat;
  out.s_full.values = geometry.apply_phi_transpose(au);
  out.s_full.kind = SignatureKind::joint_full;
  return out;
}

JointResult estimate_joint(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           double lambda) {
  return estimate_joint(a, geometry, d,
                        DualState::zero(a.grid(), geometry.num_receivers(),
                                        geometry.num_sources()),
                        lambda, false);
}

double default_lambda(const HelmholtzOperator& a,
                      const AcquisitionGeometry& geometry) {
  const int n = a.grid().num_nodes();
  Rng rng(0x51ab5eedULL);
  CVec v(n);
  for (int j = 0; j < n; ++j) v[j] = rng.complex_normal();
  v /= v.norm();
  double sigma = 0.0;
  for (int it = 0; it < 20; ++it) {
    CMat w = a.matrix() * v;
    w = geometry.apply_q(std::move(w));
    CVec w2 = a.matrix().adjoint() * w.col(0);
    sigma = w2.norm();
    if (!(sigma > 0.0))
      throw Error("default_lambda: power iteration collapsed");
    v = w2 / sigma;
  }
  return 0.1 / sigma;
}

}  // namespace irwri
