#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include "irwri/grid.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/types.hpp"

namespace irwri {

// Source injection Phi (N x n_s unit selection columns) and receiver
// sampling P (M x N unit selection rows). Both are kept as node index
// lists; the selection structure makes every operator application a
// gather/scatter. All nodes are distinct and inside the physical region.
struct AcquisitionGeometry {
  Grid2D grid;
  std::vector<int> source_nodes;
  std::vector<int> receiver_nodes;

  int num_sources() const { return static_cast<int>(source_nodes.size()); }
  int num_receivers() const { return static_cast<int>(receiver_nodes.size()); }

  void validate() const;

  // Dense selection operators for tests and small oracles.
  SpMatR phi() const;  // N x n_s
  SpMatR p() const;    // M x N

  CMat apply_p(const CMat& u) const;              // P U
  CMat apply_p_transpose(const CMat& d) const;    // P^T D
  CMat apply_phi(const CMat& s) const;            // Phi S
  CMat apply_phi_transpose(const CMat& y) const;  // Phi^T Y

  // Q Y with Q = I - Phi Phi^T: zeroes the rows at source nodes.
  CMat apply_q(CMat y) const;
  // Q_i Y: zeroes only the row of source i.
  CMat apply_qi(CMat y, int i) const;

  // Sparse diagonals used to assemble normal operators.
  SpMat ptp_diagonal() const;  // P^T P
  SpMat q_diagonal() const;    // I - Phi Phi^T
  SpMat qi_diagonal(int i) const;
};

// Sources/receivers given as physical (ix, iz) pairs, ix in [0, nx),
// iz in [0, nz).
AcquisitionGeometry make_geometry(
    const Grid2D& grid, const std::vector<std::pair<int, int>>& sources,
    const std::vector<std::pair<int, int>>& receivers);

// Frequency-domain Ricker wavelet, peak at f_c, delayed by t0 under the
// global e^{-i omega t} convention.
Complex ricker_spectrum(double f_hz, double f_c_hz, double t0_s);

// Per-source Ricker parameters; the complex signature at any frequency
// follows from them.
struct SignatureSet {
  std::vector<double> f_c_hz;
  std::vector<double> t0_s;

  int num_sources() const { return static_cast<int>(f_c_hz.size()); }
  CVec at_frequency(double f_hz) const;

  static SignatureSet random(int n_s, double fc_lo, double fc_hi,
                             double t0_lo, double t0_hi, std::uint64_t seed);
};

struct DataMatrix {
  double frequency_hz = 0.0;
  CMat values;  // M x n_s
  // +inf marks noise-free data.
  double snr_db = std::numeric_limits<double>::infinity();
};

// D = P A(m_true)^{-1} Phi Diag(signatures): one factorization, one blocked
// solve regardless of the source count.
DataMatrix synthesize_data(const SquaredSlownessModel& m_true,
                           const AcquisitionGeometry& geometry,
                           const CVec& signatures, double frequency_hz,
                           StencilKind stencil);

// Additive circular complex Gaussian noise scaled so the measured SNR
// (20 log10 of clean-to-noise RMS ratio) equals the target exactly.
DataMatrix add_noise(const DataMatrix& clean, double target_snr_db,
                     std::uint64_t seed);

void write_data_file(const std::filesystem::path& path,
                     const std::vector<DataMatrix>& blocks);
std::vector<DataMatrix> read_data_file(const std::filesystem::path& path);

}  // namespace irwri
