#include "irwri/grid.hpp"

#include <algorithm>
#include <cmath>

namespace irwri {

namespace {

void check_finite_positive(const RVec& v, const char* what) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j]) || v[j] <= 0.0) {
      throw Error(std::string(what) + " must be finite and positive (entry " +
                  std::to_string(j) + " = " + std::to_string(v[j]) + ")");
    }
  }
}

}  // namespace

Grid2D::Grid2D(int nx_, int nz_, double dx_, double dz_, int npml_,
               bool free_surface_top_)
    : nx(nx_), nz(nz_), dx(dx_), dz(dz_), npml(npml_),
      free_surface_top(free_surface_top_) {
  if (nx < 3 || nz < 3) throw DimensionError("Grid2D requires nx >= 3 and nz >= 3");
  if (dx <= 0.0 || dz <= 0.0) throw DimensionError("Grid2D requires dx > 0 and dz > 0");
  if (npml < 0) throw DimensionError("Grid2D requires npml >= 0");
}

SquaredSlownessModel::SquaredSlownessModel(Grid2D grid_, RVec values_,
                                           RVec lower_, RVec upper_)
    : grid(std::move(grid_)), values(std::move(values_)),
      lower(std::move(lower_)), upper(std::move(upper_)) {
  const int n = grid.num_nodes();
  if (values.size() != n || lower.size() != n || upper.size() != n) {
    throw DimensionError("model vectors must have length " + std::to_string(n));
  }
  check_finite_positive(values, "squared slowness");
  for (int j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) {
      throw Error("model bounds must satisfy lower <= upper");
    }
  }
}

SquaredSlownessModel SquaredSlownessModel::clamped() const {
  RVec v = values.cwiseMax(lower).cwiseMin(upper);
  return SquaredSlownessModel(grid, std::move(v), lower, upper);
}

SquaredSlownessModel SquaredSlownessModel::with_values(RVec new_values) const {
  RVec v = new_values.cwiseMax(lower).cwiseMin(upper);
  return SquaredSlownessModel(grid, std::move(v), lower, upper);
}

RVec extend_to_pads(const Grid2D& grid, const RMat& phys) {
  if (phys.rows() != grid.nz || phys.cols() != grid.nx) {
    throw DimensionError("physical field must be nz x nx");
  }
  RVec out(grid.num_nodes());
  for (int ix = 0; ix < grid.total_nx(); ++ix) {
    const int i = std::clamp(ix - grid.phys_ix0(), 0, grid.nx - 1);
    for (int iz = 0; iz < grid.total_nz(); ++iz) {
      const int k = std::clamp(iz - grid.phys_iz0(), 0, grid.nz - 1);
      out[grid.index(ix, iz)] = phys(k, i);
    }
  }
  return out;
}

SpMatR pad_prolongation(const Grid2D& grid) {
  SpMatR e(grid.num_nodes(), grid.nx * grid.nz);
  std::vector<TripletR> trips;
  trips.reserve(static_cast<std::size_t>(grid.num_nodes()));
  for (int ix = 0; ix < grid.total_nx(); ++ix) {
    const int i = std::clamp(ix - grid.phys_ix0(), 0, grid.nx - 1);
    for (int iz = 0; iz < grid.total_nz(); ++iz) {
      const int k = std::clamp(iz - grid.phys_iz0(), 0, grid.nz - 1);
      trips.emplace_back(grid.index(ix, iz), i * grid.nz + k, 1.0);
    }
  }
  e.setFromTriplets(trips.begin(), trips.end());
  e.makeCompressed();
  return e;
}

RMat physical_window(const Grid2D& grid, const RVec& padded) {
  if (padded.size() != grid.num_nodes()) {
    throw DimensionError("padded vector must have length num_nodes()");
  }
  RMat out(grid.nz, grid.nx);
  for (int i = 0; i < grid.nx; ++i)
    for (int k = 0; k < grid.nz; ++k)
      out(k, i) = padded[grid.physical_index(i, k)];
  return out;
}

CMat physical_window(const Grid2D& grid, const CVec& padded) {
  if (padded.size() != grid.num_nodes()) {
    throw DimensionError("padded vector must have length num_nodes()");
  }
  CMat out(grid.nz, grid.nx);
  for (int i = 0; i < grid.nx; ++i)
    for (int k = 0; k < grid.nz; ++k)
      out(k, i) = padded[grid.physical_index(i, k)];
  return out;
}

SquaredSlownessModel velocity_to_squared_slowness(const Grid2D& grid,
                                                  const RMat& velocity,
                                                  double bound_margin) {
  if (velocity.rows() != grid.nz || velocity.cols() != grid.nx) {
    throw DimensionError("velocity grid must be nz x nx");
  }
  for (int i = 0; i < velocity.size(); ++i) {
    const double v = velocity.reshaped()[i];
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error("velocity must be finite and positive");
    }
  }
  RMat m_phys = velocity.array().square().inverse().matrix();
  RVec values = extend_to_pads(grid, m_phys);

  const double v_lo = velocity.minCoeff() * (1.0 - bound_margin);
  const double v_hi = velocity.maxCoeff() * (1.0 + bound_margin);
  if (v_lo <= 0.0) throw Error("bound margin leaves nonpositive velocity");
  const int n = grid.num_nodes();
  RVec lower = RVec::Constant(n, 1.0 / (v_hi * v_hi));
  RVec upper = RVec::Constant(n, 1.0 / (v_lo * v_lo));
  return SquaredSlownessModel(grid, std::move(values), std::move(lower),
                              std::move(upper));
}

RMat squared_slowness_to_velocity(const SquaredSlownessModel& model) {
  RMat m = physical_window(model.grid, model.values);
  return m.array().rsqrt().matrix();
}

namespace {

// Half-sample symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> w(2 * half + 1);
  double sum = 0.0;
  for (int t = -half; t <= half; ++t) {
    w[t + half] = std::exp(-0.5 * (t / sigma) * (t / sigma));
    sum += w[t + half];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

RMat gaussian_blur(const RMat& field, double sigma_col, double sigma_row) {
  RMat out = field;
  const int rows = static_cast<int>(field.rows());
  const int cols = static_cast<int>(field.cols());
  if (sigma_row > 0.0) {
    const auto w = gaussian_kernel(sigma_row);
    const int half = (static_cast<int>(w.size()) - 1) / 2;
    RMat tmp(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t)
          acc += w[t + half] * out(reflect(r + t, rows), c);
        tmp(r, c) = acc;
      }
    out = tmp;
  }
  if (sigma_col > 0.0) {
    const auto w = gaussian_kernel(sigma_col);
    const int half = (static_cast<int>(w.size()) - 1) / 2;
    RMat tmp(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t)
          acc += w[t + half] * out(r, reflect(c + t, cols));
        tmp(r, c) = acc;
      }
    out = tmp;
  }
  return out;
}

SquaredSlownessModel smooth_model(const SquaredSlownessModel& model,
                                  double radius) {
  if (radius < 0.0) throw Error("smoothing radius must be >= 0");
  if (radius == 0.0) return model;
  RMat v = squared_slowness_to_velocity(model);
  RMat v_smooth = gaussian_blur(v, radius / model.grid.dx, radius / model.grid.dz);
  RMat m_phys = v_smooth.array().square().inverse().matrix();
  RVec values = extend_to_pads(model.grid, m_phys);
  return SquaredSlownessModel(model.grid, std::move(values), model.lower,
                              model.upper);
}

}  // namespace irwri
