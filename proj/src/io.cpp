#include "irwri/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace irwri {

namespace {

constexpr char kMagic[6] = {'I', 'R', 'W', 'G', 'R', 'D'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("truncated grid file");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

void write_header(std::ofstream& out, std::uint32_t kind, int nx, int nz,
                  double dx, double dz) {
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, kind);
  put(out, static_cast<std::uint32_t>(nx));
  put(out, static_cast<std::uint32_t>(nz));
  put(out, dx);
  put(out, dz);
}

}  // namespace

void write_grid_file(const std::filesystem::path& path, double dx, double dz,
                     const RMat& values) {
  auto out = open_out(path);
  const int nz = static_cast<int>(values.rows());
  const int nx = static_cast<int>(values.cols());
  write_header(out, 0, nx, nz, dx, dz);
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) put(out, values(k, i));
  if (!out) throw Error("write failed: " + path.string());
}

void write_grid_file(const std::filesystem::path& path, double dx, double dz,
                     const CMat& values) {
  auto out = open_out(path);
  const int nz = static_cast<int>(values.rows());
  const int nx = static_cast<int>(values.cols());
  write_header(out, 1, nx, nz, dx, dz);
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      put(out, values(k, i).real());
      put(out, values(k, i).imag());
    }
  if (!out) throw Error("write failed: " + path.string());
}

GridFileData read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grid file: " + path.string());
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a grid file: " + path.string());
  }
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion) {
    throw Error("unsupported grid file version " + std::to_string(version));
  }
  const auto kind = get<std::uint32_t>(in);
  if (kind > 1) throw Error("unknown grid scalar kind");

  GridFileData data;
  data.nx = static_cast<int>(get<std::uint32_t>(in));
  data.nz = static_cast<int>(get<std::uint32_t>(in));
  data.dx = get<double>(in);
  data.dz = get<double>(in);
  data.is_complex = (kind == 1);
  if (data.nx <= 0 || data.nz <= 0) throw Error("bad grid file dimensions");

  if (data.is_complex) {
    data.complex_values.resize(data.nz, data.nx);
    for (int k = 0; k < data.nz; ++k)
      for (int i = 0; i < data.nx; ++i) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        data.complex_values(k, i) = Complex(re, im);
      }
  } else {
    data.real_values.resize(data.nz, data.nx);
    for (int k = 0; k < data.nz; ++k)
      for (int i = 0; i < data.nx; ++i) data.real_values(k, i) = get<double>(in);
  }
  return data;
}

void write_grid_csv(const std::filesystem::path& path, const Grid2D& grid,
                    const RMat& phys_values, const std::string& value_header) {
  if (phys_values.rows() != grid.nz || phys_values.cols() != grid.nx) {
    throw DimensionError("CSV export expects an nz x nx physical field");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "x_m,z_m," << value_header << "\n";
  out.precision(17);
  for (int k = 0; k < grid.nz; ++k)
    for (int i = 0; i < grid.nx; ++i)
      out << i * grid.dx << ',' << k * grid.dz << ',' << phys_values(k, i)
          << "\n";
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace irwri
