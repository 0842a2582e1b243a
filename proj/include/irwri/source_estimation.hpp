#pragma once

#include "irwri/acquisition.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/types.hpp"
#include "irwri/wavefield_recon.hpp"

namespace irwri {

enum class SignatureKind { conventional, separate, joint_full, joint_diag };

struct SignatureMatrix {
  CMat values;  // n_s x n_s; diagonal except for joint_full
  SignatureKind kind = SignatureKind::conventional;

  CVec diagonal() const { return values.diagonal(); }
  // max |off-diagonal| / max |diagonal|; 0 for diagonal matrices.
  double off_diagonal_ratio() const;
};

SignatureMatrix extract_diagonal(const SignatureMatrix& full);

struct SeparateResult {
  CMat u;  // N x n_s
  SignatureMatrix s;
};

struct JointResult {
  CMat u;  // N x n_s
  SignatureMatrix s_full;
  // Set when n_s exceeds the receiver count: the blended signature
  // subproblem is under-determined and drifts toward the least-norm
  // solution. Computation proceeds regardless.
  bool underdetermined = false;
};

// Per-source deconvolution against exact-PDE predicted data: s_i =
// <g_i, d_i> / <g_i, g_i> with g_i = P A^{-1} phi_i. One factorization of A
// for all sources.
SignatureMatrix estimate_conventional(const HelmholtzOperator& a,
                                      const AcquisitionGeometry& geometry,
                                      const CMat& d);

// Per-source extended estimation: u_i from the Q_i-projected normal system,
// s_i from the signature stationarity condition. n_s factorizations.
SeparateResult estimate_separate(const HelmholtzOperator& a,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, const DualState& duals,
                                 double lambda);
SeparateResult estimate_separate(const HelmholtzOperator& a,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, double lambda);

// Blended estimation: U from the source-independent normal system (one
// factorization regardless of n_s), S_full = Phi^T A U (optionally with the
// dual subtracted before the gather).
JointResult estimate_joint(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           const DualState& duals, double lambda,
                           bool subtract_dual = false);
JointResult estimate_joint(const HelmholtzOperator& a,
                           const AcquisitionGeometry& geometry, const CMat& d,
                           double lambda);

// Scale-balancing default: 0.1 over a 20-step power-iteration estimate of
// the spectral norm of A^H Q A. The observation term P^T P has unit scale
// for selection operators, so this weights data fit 10x the relaxed wave
// equation. Deterministic (fixed internal seed).
double default_lambda(const HelmholtzOperator& a,
                      const AcquisitionGeometry& geometry);

}  // namespace irwri
