#pragma once

#include <utility>
#include <vector>

#include "irwri/types.hpp"

namespace irwri {

// Regular rectangular grid. The physical (interior) region is nx-by-nz nodes
// with spacing (dx, dz) in meters; absorbing pads of `npml` nodes are
// appended outside every physical edge except the top one when
// `free_surface_top` is set. All vectors and matrices in the library are
// sized against the padded node count N.
//
// Flattened node index: ix * total_nz() + iz, with iz (depth) fastest.
struct Grid2D {
  int nx = 0;
  int nz = 0;
  double dx = 0.0;
  double dz = 0.0;
  int npml = 0;
  bool free_surface_top = true;

  Grid2D() = default;
  Grid2D(int nx_, int nz_, double dx_, double dz_, int npml_ = 0,
         bool free_surface_top_ = true);

  int pad_x() const { return 2 * npml; }
  int pad_z() const { return npml + (free_surface_top ? 0 : npml); }
  int total_nx() const { return nx + pad_x(); }
  int total_nz() const { return nz + pad_z(); }
  int num_nodes() const { return total_nx() * total_nz(); }

  // Offsets of the physical window inside the padded grid.
  int phys_ix0() const { return npml; }
  int phys_iz0() const { return free_surface_top ? 0 : npml; }

  int index(int ix, int iz) const { return ix * total_nz() + iz; }
  int physical_index(int i, int k) const {
    return index(phys_ix0() + i, phys_iz0() + k);
  }
  bool is_physical(int ix, int iz) const {
    return ix >= phys_ix0() && ix < phys_ix0() + nx && iz >= phys_iz0() &&
           iz < phys_iz0() + nz;
  }

  bool operator==(const Grid2D& o) const = default;
};

// Squared slowness m = 1/v^2 (s^2/m^2) on the padded grid, with elementwise
// box bounds. Pad values replicate the nearest physical node.
struct SquaredSlownessModel {
  Grid2D grid;
  RVec values;  // length num_nodes()
  RVec lower;
  RVec upper;

  SquaredSlownessModel() = default;
  SquaredSlownessModel(Grid2D grid_, RVec values_, RVec lower_, RVec upper_);

  // Elementwise projection of `values` onto [lower, upper].
  SquaredSlownessModel clamped() const;
  // Same grid and bounds, new (clamped) values.
  SquaredSlownessModel with_values(RVec new_values) const;
};

// Builds a model from a physical velocity grid v (nz rows, nx columns, m/s).
// Pads replicate edge values. Bounds are uniform, derived from the velocity
// extrema widened by `bound_margin` (relative).
SquaredSlownessModel velocity_to_squared_slowness(const Grid2D& grid,
                                                  const RMat& velocity,
                                                  double bound_margin = 0.1);

// Physical-window velocity field (nz rows, nx columns, m/s).
RMat squared_slowness_to_velocity(const SquaredSlownessModel& model);

// Gaussian smoothing of the velocity field with standard deviation `radius`
// (meters), half-sample symmetric reflection at the physical edges. The pads
// are rebuilt by edge replication. radius = 0 returns the model unchanged.
SquaredSlownessModel smooth_model(const SquaredSlownessModel& model,
                                  double radius);

// Separable Gaussian blur used by smooth_model, exposed for direct use on
// physical grids. sigma_* are in node units.
RMat gaussian_blur(const RMat& field, double sigma_col, double sigma_row);

// Replicates a physical field (nz x nx) into a padded node vector.
RVec extend_to_pads(const Grid2D& grid, const RMat& phys);
// Extracts the physical window of a padded node vector as nz x nx.
RMat physical_window(const Grid2D& grid, const RVec& padded);
CMat physical_window(const Grid2D& grid, const CVec& padded);

// Sparse matrix form of extend_to_pads: num_nodes() x (nx*nz), one unit
// entry per row.  Physical degree of freedom (i, k) sits at column i*nz + k.
SpMatR pad_prolongation(const Grid2D& grid);

}  // namespace irwri
