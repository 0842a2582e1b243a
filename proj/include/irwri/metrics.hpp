#pragma once

#include "irwri/acquisition.hpp"
#include "irwri/grid.hpp"
#include "irwri/types.hpp"

namespace irwri {

struct ConvergenceRecord {
  int iteration = 0;
  double pde_misfit = 0.0;
  double data_misfit = 0.0;
  double model_re = 0.0;
};

// Relative error sqrt(sum |x_true - x_est|^2) / sqrt(sum |x_true|^2) with
// complex moduli in both sums. Matrix overload flattens; the per-source
// variant treats columns as sources and rows as frequencies.
double signature_re(const CVec& s_true, const CVec& s_est);
double signature_re(const CMat& s_true, const CMat& s_est);
RVec per_source_signature_re(const CMat& s_true, const CMat& s_est);
double average_signature_re(const CMat& s_true, const CMat& s_est);

// 20 log10(clean RMS / noise RMS), noise = noisy - clean over all entries.
// Zero noise returns +infinity.
double data_snr_db(const DataMatrix& clean, const DataMatrix& noisy);

struct ModelError {
  RMat velocity_difference;  // nz x nx, m/s, estimated minus true
  double re = 0.0;           // |v_est - v_true| / |v_true|
};

// Velocity-domain error over the physical window. Velocity units match the
// usual display convention; the squared-slowness variant is available for
// parameter-space diagnostics.
ModelError model_error_map(const SquaredSlownessModel& m_true,
                           const SquaredSlownessModel& m_est);
double model_re(const SquaredSlownessModel& m_true,
                const SquaredSlownessModel& m_est);
double model_re_squared_slowness(const SquaredSlownessModel& m_true,
                                 const SquaredSlownessModel& m_est);

}  // namespace irwri
