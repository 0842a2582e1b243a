#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "irwri/acquisition.hpp"
#include "irwri/config.hpp"
#include "irwri/grid.hpp"
#include "irwri/irwri.hpp"
#include "irwri/types.hpp"

namespace irwri {

// Physical velocity fields (nz x nx, m/s) for the built-in desk-scale
// models. Fractions are relative to the grid extent.
//
// Two layers with linear compaction trends (v_top at the surface grading to
// v_top_interface just above the interface, v_bottom_interface grading to
// v_bottom at the deepest row) plus a Gaussian lens centered under the
// interface midpoint. The in-layer gradients keep the deeper half reachable
// by diving waves from a surface spread, which a piecewise-constant pair of
// layers would not be.
RMat velocity_two_layer_lens(int nz, int nx, double v_top,
                             double v_top_interface,
                             double v_bottom_interface, double v_bottom,
                             double interface_depth_frac,
                             double lens_amplitude, double lens_sigma_frac);
RMat velocity_salt_blob(int nz, int nx, double v_top, double v_bottom,
                        double blob_velocity, double blob_radius_frac);
RMat velocity_gradient(int nz, int nx, double v_top, double v_bottom);

StencilKind parse_stencil(const std::string& name);
std::string stencil_name(StencilKind kind);

// n distinct indices spread evenly over [lo, hi].
std::vector<int> even_line(int n, int lo, int hi);

struct ExperimentSetup {
  Grid2D grid;
  SquaredSlownessModel m_true;
  SquaredSlownessModel m_start;  // inversion start / estimation background
  AcquisitionGeometry geometry;
  SignatureSet signatures;
  StencilKind stencil = StencilKind::five_point;
  double snr_db = 0.0;  // +inf marks noise-free
  std::uint64_t noise_seed = 0;
};

Grid2D grid_from_config(const ConfigMap& cfg);
SquaredSlownessModel true_model_from_config(const ConfigMap& cfg,
                                            const Grid2D& grid);
SquaredSlownessModel start_model_from_config(const ConfigMap& cfg,
                                             const SquaredSlownessModel& m_true);
AcquisitionGeometry geometry_from_config(const ConfigMap& cfg,
                                         const Grid2D& grid);
SignatureSet signatures_from_config(const ConfigMap& cfg, int num_sources);
ExperimentSetup setup_from_config(const ConfigMap& cfg);

// Paths like "3:6" expanded with [invert] freq_step into mono-frequency
// batches or two-frequency batches with one overlap.
std::vector<std::vector<std::vector<double>>> schedule_from_config(
    const ConfigMap& cfg);
InversionConfig inversion_from_config(const ConfigMap& cfg);

// One clean (or noise-scaled) block per frequency; the noise stream for
// frequency i is seeded with noise_seed + i.
std::vector<DataMatrix> synthesize_blocks(const ExperimentSetup& setup,
                                          const std::vector<double>& freqs);

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<HistoryRow>& rows);

// Allowed sections/keys for every command config.
const std::map<std::string, std::set<std::string>>& config_schema();

// Exit codes: 0 ok, 2 config or data error, 3 numerical divergence. The
// commands throw (ConfigError and friends); main maps exceptions to codes.
int cmd_forward(const ConfigMap& cfg, const std::filesystem::path& out_dir);
int cmd_estimate_sources(const ConfigMap& cfg,
                         const std::filesystem::path& out_dir);
int cmd_invert(const ConfigMap& cfg, const std::filesystem::path& out_dir);
int cmd_sweep(const ConfigMap& cfg, const std::filesystem::path& out_dir,
              int threads);

}  // namespace irwri
