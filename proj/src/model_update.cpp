#include "irwri/model_update.hpp"

#include <Eigen/SparseCholesky>

#include <vector>

namespace irwri {

namespace {

const Grid2D& check_terms(const std::vector<FrequencyTerm>& terms,
                          double lambda) {
  if (terms.empty()) {
    throw Error("model update needs at least one frequency term");
  }
  if (!(lambda > 0.0)) {
    throw Error("model update requires lambda > 0");
  }
  for (const FrequencyTerm& t : terms) {
    if (t.op == nullptr || t.geometry == nullptr) {
      throw Error("frequency term is missing its operator or geometry");
    }
    if (!(t.op->grid() == terms.front().op->grid()) ||
        !(t.geometry->grid == t.op->grid())) {
      throw DimensionError("frequency terms must share one grid");
    }
    const int n = t.op->grid().num_nodes();
    const int n_s = t.geometry->num_sources();
    if (t.u.rows() != n || t.u.cols() != n_s) {
      throw DimensionError("wavefield block must be num_nodes x num_sources");
    }
    if (t.s_diag.size() != n_s) {
      throw DimensionError("signature vector must have one entry per source");
    }
    if (t.b_hat.rows() != n || t.b_hat.cols() != n_s) {
      throw DimensionError("dual block must be num_nodes x num_sources");
    }
  }
  return terms.front().op->grid();
}

// Phi S + b_hat - Lap U, the per-source targets y_i.
CMat term_targets(const FrequencyTerm& t) {
  CMat y = t.geometry->apply_phi(CMat(t.s_diag.asDiagonal()));
  y += t.b_hat;
  y -= t.op->laplacian_part() * t.u;
  return y;
}

}  // namespace

SpMatR gradient_operator(const Grid2D& grid) {
  const int nx = grid.nx;
  const int nz = grid.nz;
  const double wx = 1.0 / grid.dx;
  const double wz = 1.0 / grid.dz;
  SpMatR g(nx * (nz - 1) + (nx - 1) * nz, nx * nz);
  std::vector<TripletR> trips;
  trips.reserve(2 * static_cast<std::size_t>(g.rows()));
  int row = 0;
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k + 1 < nz; ++k, ++row) {
      trips.emplace_back(row, i * nz + k, -wz);
      trips.emplace_back(row, i * nz + k + 1, wz);
    }
  }
  for (int i = 0; i + 1 < nx; ++i) {
    for (int k = 0; k < nz; ++k, ++row) {
      trips.emplace_back(row, i * nz + k, -wx);
      trips.emplace_back(row, (i + 1) * nz + k, wx);
    }
  }
  g.setFromTriplets(trips.begin(), trips.end());
  g.makeCompressed();
  return g;
}

ModelQuadratic build_model_quadratic(const std::vector<FrequencyTerm>& terms,
                                     double lambda,
                                     const RegularizerConfig& reg) {
  const Grid2D& grid = check_terms(terms, lambda);
  if (reg.gamma_tik < 0.0) {
    throw ConfigError("gamma_tik must be non-negative");
  }
  const int n_phys = grid.nx * grid.nz;
  const SpMat e = pad_prolongation(grid).cast<Complex>();

  ModelQuadratic q;
  q.normal = SpMatR(n_phys, n_phys);
  q.rhs = RVec::Zero(n_phys);
  for (const FrequencyTerm& t : terms) {
    const CMat y = term_targets(t);
    for (int j = 0; j < t.u.cols(); ++j) {
      const SpMat lje = SpMat(t.op->mass_jacobian(t.u.col(j)) * e);
      const SpMat lhl = SpMat(lje.adjoint()) * lje;
      q.normal += lambda * SpMatR(lhl.real());
      const CVec ly = SpMat(lje.adjoint()) * CVec(y.col(j));
      q.rhs += lambda * RVec(ly.real());
    }
  }
  q.fidelity_trace = q.normal.diagonal().sum();

  const SpMatR g = gradient_operator(grid);
  const SpMatR gtg = SpMatR(g.transpose()) * g;
  q.gradient_trace = gtg.diagonal().sum();
  if (reg.gamma_tik > 0.0) {
    q.normal += reg.gamma_tik * gtg;
  }
  q.normal.makeCompressed();
  return q;
}

double suggest_gamma(const std::vector<FrequencyTerm>& terms, double lambda) {
  const ModelQuadratic q = build_model_quadratic(terms, lambda, {});
  if (!(q.gradient_trace > 0.0)) {
    throw Error("degenerate gradient operator");
  }
  return q.fidelity_trace / q.gradient_trace;
}

SquaredSlownessModel update_model(const SquaredSlownessModel& m_prev,
                                  const std::vector<FrequencyTerm>& terms,
                                  double lambda, const RegularizerConfig& reg) {
  const Grid2D& grid = check_terms(terms, lambda);
  if (!(m_prev.grid == grid)) {
    throw DimensionError("previous model lives on a different grid");
  }
  const ModelQuadratic q = build_model_quadratic(terms, lambda, reg);
  if (reg.gamma_tik == 0.0 && q.normal.diagonal().minCoeff() <= 0.0) {
    throw Error(
        "some model node receives no wavefield energy, so the update "
        "normal matrix is singular; set gamma_tik > 0");
  }
  Eigen::SimplicialLDLT<SpMatR> ldlt(q.normal);
  if (ldlt.info() != Eigen::Success) {
    throw SingularMatrixError("model update normal system is not SPD", -1);
  }
  const RVec p = ldlt.solve(q.rhs);
  const RMat phys = Eigen::Map<const RMat>(p.data(), grid.nz, grid.nx);
  return m_prev.with_values(extend_to_pads(grid, phys));
}

SquaredSlownessModel update_model(const SquaredSlownessModel& m_prev,
                                  const HelmholtzOperator& op,
                                  const AcquisitionGeometry& geometry,
                                  const CMat& u, const CVec& s_diag,
                                  const CMat& b_hat, double lambda,
                                  const RegularizerConfig& reg) {
  std::vector<FrequencyTerm> terms(1);
  terms[0] = FrequencyTerm{&op, &geometry, u, s_diag, b_hat};
  return update_model(m_prev, terms, lambda, reg);
}

double pde_misfit(const HelmholtzOperator& a,
                  const AcquisitionGeometry& geometry, const CMat& u,
                  const CVec& s_diag) {
  const int n_s = geometry.num_sources();
  if (u.rows() != a.grid().num_nodes() || u.cols() != n_s ||
      s_diag.size() != n_s) {
    throw DimensionError("pde_misfit: inconsistent block shapes");
  }
  CMat r = a.apply_multi(u);
  r -= geometry.apply_phi(CMat(s_diag.asDiagonal()));
  return r.norm();
}

double model_objective(const Grid2D& grid, const RVec& phys_m,
                       const std::vector<FrequencyTerm>& terms, double lambda,
                       const RegularizerConfig& reg) {
  check_terms(terms, lambda);
  if (phys_m.size() != grid.nx * grid.nz) {
    throw DimensionError("physical model vector must have nx*nz entries");
  }
  const RVec full =
      extend_to_pads(grid, Eigen::Map<const RMat>(phys_m.data(), grid.nz, grid.nx));
  double obj = 0.0;
  for (const FrequencyTerm& t : terms) {
    CMat r = t.op->laplacian_part() * t.u;
    r += t.op->mass_matrix(full) * t.u;
    r -= t.geometry->apply_phi(CMat(t.s_diag.asDiagonal()));
    r -= t.b_hat;
    obj += lambda * r.squaredNorm();
  }
  if (reg.gamma_tik > 0.0) {
    obj += reg.gamma_tik * (gradient_operator(grid) * phys_m).squaredNorm();
  }
  return obj;
}

RVec model_objective_gradient(const Grid2D& grid, const RVec& phys_m,
                              const std::vector<FrequencyTerm>& terms,
                              double lambda, const RegularizerConfig& reg) {
  check_terms(terms, lambda);
  if (phys_m.size() != grid.nx * grid.nz) {
    throw DimensionError("physical model vector must have nx*nz entries");
  }
  const RVec full =
      extend_to_pads(grid, Eigen::Map<const RMat>(phys_m.data(), grid.nz, grid.nx));
  const SpMatR et = SpMatR(pad_prolongation(grid).transpose());
  RVec grad = RVec::Zero(phys_m.size());
  for (const FrequencyTerm& t : terms) {
    CMat r = t.op->laplacian_part() * t.u;
    r += t.op->mass_matrix(full) * t.u;
    r -= t.geometry->apply_phi(CMat(t.s_diag.asDiagonal()));
    r -= t.b_hat;
    for (int j = 0; j < t.u.cols(); ++j) {
      const SpMat lj = t.op->mass_jacobian(t.u.col(j));
      const CVec lr = SpMat(lj.adjoint()) * CVec(r.col(j));
      grad += 2.0 * lambda * (et * RVec(lr.real()));
    }
  }
  if (reg.gamma_tik > 0.0) {
    const SpMatR g = gradient_operator(grid);
    grad += 2.0 * reg.gamma_tik * (SpMatR(g.transpose()) * RVec(g * phys_m));
  }
  return grad;
}

}  // namespace irwri
