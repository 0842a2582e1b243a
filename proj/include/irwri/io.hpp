#pragma once

#include <filesystem>
#include <string>

#include "irwri/grid.hpp"
#include "irwri/types.hpp"

namespace irwri {

// Binary grid container: little-endian, 64-bit scalars, x varying fastest.
// Header: magic "IRWGRD", u16 version, u32 kind (0 real / 1 complex),
// u32 nx, u32 nz, f64 dx, f64 dz. Complex payloads interleave re/im.
struct GridFileData {
  int nx = 0;
  int nz = 0;
  double dx = 0.0;
  double dz = 0.0;
  bool is_complex = false;
  RMat real_values;     // nz x nx when !is_complex
  CMat complex_values;  // nz x nx when is_complex
};

void write_grid_file(const std::filesystem::path& path, double dx, double dz,
                     const RMat& values);
void write_grid_file(const std::filesystem::path& path, double dx, double dz,
                     const CMat& values);
GridFileData read_grid_file(const std::filesystem::path& path);

// CSV export of a physical field (columns: x_m, z_m, value).
void write_grid_csv(const std::filesystem::path& path, const Grid2D& grid,
                    const RMat& phys_values,
                    const std::string& value_header = "value");

}  // namespace irwri
