#include "irwri/metrics.hpp"

#include <cmath>
#include <limits>

namespace irwri {

double signature_re(const CVec& s_true, const CVec& s_est) {
  if (s_true.size() != s_est.size()) {
    throw DimensionError("signature vectors must have equal length");
  }
  const double denom = s_true.norm();
  if (denom == 0.0) {
    throw Error("true signature has zero energy");
  }
  return (s_true - s_est).norm() / denom;
}

double signature_re(const CMat& s_true, const CMat& s_est) {
  if (s_true.rows() != s_est.rows() || s_true.cols() != s_est.cols()) {
    throw DimensionError("signature matrices must have equal shape");
  }
  return signature_re(CVec(s_true.reshaped()), CVec(s_est.reshaped()));
}

RVec per_source_signature_re(const CMat& s_true, const CMat& s_est) {
  if (s_true.rows() != s_est.rows() || s_true.cols() != s_est.cols()) {
    throw DimensionError("signature matrices must have equal shape");
  }
  RVec out(s_true.cols());
  for (int j = 0; j < s_true.cols(); ++j) {
    out[j] = signature_re(CVec(s_true.col(j)), CVec(s_est.col(j)));
  }
  return out;
}

double average_signature_re(const CMat& s_true, const CMat& s_est) {
  return per_source_signature_re(s_true, s_est).mean();
}

double data_snr_db(const DataMatrix& clean, const DataMatrix& noisy) {
  if (clean.values.rows() != noisy.values.rows() ||
      clean.values.cols() != noisy.values.cols()) {
    throw DimensionError("data blocks must have equal shape");
  }
  if (clean.frequency_hz != noisy.frequency_hz) {
    throw Error("data blocks belong to different frequencies");
  }
  const double clean_rms =
      std::sqrt(clean.values.squaredNorm() / double(clean.values.size()));
  if (clean_rms == 0.0) {
    throw Error("clean data has zero energy");
  }
  const double noise_rms = std::sqrt(
      (noisy.values - clean.values).squaredNorm() / double(clean.values.size()));
  if (noise_rms == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 20.0 * std::log10(clean_rms / noise_rms);
}

ModelError model_error_map(const SquaredSlownessModel& m_true,
                           const SquaredSlownessModel& m_est) {
  if (!(m_true.grid == m_est.grid)) {
    throw DimensionError("models live on different grids");
  }
  const RMat v_true = squared_slowness_to_velocity(m_true);
  const RMat v_est = squared_slowness_to_velocity(m_est);
  ModelError out;
  out.velocity_difference = v_est - v_true;
  const double denom = v_true.norm();
  if (denom == 0.0) {
    throw Error("true model has zero velocity norm");
  }
  out.re = out.velocity_difference.norm() / denom;
  return out;
}

double model_re(const SquaredSlownessModel& m_true,
                const SquaredSlownessModel& m_est) {
  return model_error_map(m_true, m_est).re;
}

double model_re_squared_slowness(const SquaredSlownessModel& m_true,
                                 const SquaredSlownessModel& m_est) {
  if (!(m_true.grid == m_est.grid)) {
    throw DimensionError("models live on different grids");
  }
  const RMat s_true = physical_window(m_true.grid, m_true.values);
  const RMat s_est = physical_window(m_est.grid, m_est.values);
  const double denom = s_true.norm();
  if (denom == 0.0) {
    throw Error("true model has zero norm");
  }
  return (s_est - s_true).norm() / denom;
}

}  // namespace irwri
