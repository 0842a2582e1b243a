#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "irwri/acquisition.hpp"
#include "irwri/grid.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/metrics.hpp"
#include "irwri/model_update.hpp"
#include "irwri/source_estimation.hpp"
#include "irwri/types.hpp"
#include "irwri/wavefield_recon.hpp"

namespace irwri {

enum class AlgorithmKind { known_source, separate, alg1, alg2 };

std::string algorithm_name(AlgorithmKind kind);
AlgorithmKind parse_algorithm(const std::string& name);

struct StoppingConfig {
  int max_outer = 15;
  // Batch ends early once the relative data-misfit drop between consecutive
  // iterations falls below this.
  double data_drop_tol = 1e-3;
  // Optional: batch ends once pde_misfit < pde_tol * |Phi S|_F. 0 disables.
  double pde_tol = 0.0;
  // Batch aborts once data misfit exceeds this multiple of its first value.
  double divergence_factor = 1e3;
};

// Frequency schedule: an ordered list of paths, each an ordered list of
// batches, each one or more Hz values inverted jointly. Duals reset at
// batch boundaries unless carry_duals is set; lambda and gamma are frozen
// within a batch and re-derived at the next one.
struct InversionConfig {
  AlgorithmKind algorithm = AlgorithmKind::alg1;
  StencilKind stencil = StencilKind::five_point;
  std::vector<std::vector<std::vector<double>>> paths;
  StoppingConfig stopping;
  // > 0 overrides the per-batch spectral heuristic.
  double lambda_override = 0.0;
  // >= 0 overrides the per-batch equal-trace heuristic.
  double gamma_tik = -1.0;
  // Multiplies the heuristic gamma when gamma_tik < 0.
  double gamma_scale = 1.0;
  bool carry_duals = false;

  void validate() const;
};

// One frequency's constraint-violation multipliers plus its data block.
struct IrwriState {
  SquaredSlownessModel m;
  std::map<double, DualState> duals;  // keyed by frequency (Hz)
  int total_iterations = 0;
  std::vector<ConvergenceRecord> records;
};

// Everything one outer iteration produces at one frequency.
struct IterationResult {
  SquaredSlownessModel m;
  HelmholtzOperator a_new;  // assembled in m, already used for dual ascent
  CMat u;
  CVec s_diag;
  DualState duals;
  double pde_misfit = 0.0;   // |Phi S - A(m_new) U|_F, the dual increment
  double data_misfit = 0.0;  // |P U - D|_F
};

// Single-frequency outer iterations. Each consumes exactly the advertised
// number of factorizations: alg1 = 1, alg2 = 2, known_source = 1,
// separate = n_s. The operator a_k must be assembled in m.
IterationResult iterate_alg1(const SquaredSlownessModel& m,
                             const HelmholtzOperator& a_k,
                             const AcquisitionGeometry& geometry, const CMat& d,
                             const DualState& duals, double lambda,
                             const RegularizerConfig& reg);
IterationResult iterate_alg2(const SquaredSlownessModel& m,
                             const HelmholtzOperator& a_k,
                             const AcquisitionGeometry& geometry, const CMat& d,
                             const DualState& duals, double lambda,
                             const RegularizerConfig& reg);
IterationResult iterate_separate(const SquaredSlownessModel& m,
                                 const HelmholtzOperator& a_k,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, const DualState& duals,
                                 double lambda, const RegularizerConfig& reg);
IterationResult iterate_known_source(const SquaredSlownessModel& m,
                                     const HelmholtzOperator& a_k,
                                     const AcquisitionGeometry& geometry,
                                     const CMat& d, const CVec& s_true,
                                     const DualState& duals, double lambda,
                                     const RegularizerConfig& reg);

struct HistoryRow {
  int path = 0;
  int batch = 0;
  std::string frequencies;  // semicolon-joined Hz
  int iteration = 0;
  double pde_misfit = 0.0;
  double data_misfit = 0.0;
  double model_re = 0.0;  // NaN without a reference model
  long factor_count = 0;  // cumulative counters after the iteration
  long solve_count = 0;
  double wall_ms = 0.0;
};

struct InversionResult {
  SquaredSlownessModel model;
  std::vector<HistoryRow> history;
  // Model after each completed batch, labeled path<p>_batch<b>.
  std::vector<std::pair<std::string, SquaredSlownessModel>> snapshots;
  bool diverged = false;
  std::string divergence_message;
};

// Full continuation driver. Every scheduled frequency must have a matching
// data block (checked before any compute). m_true (optional) only feeds the
// model_RE history column; signatures are required for known_source.
InversionResult run_inversion(const InversionConfig& config,
                              const std::vector<DataMatrix>& data,
                              const AcquisitionGeometry& geometry,
                              const SquaredSlownessModel& m0,
                              const SignatureSet* signatures = nullptr,
                              const SquaredSlownessModel* m_true = nullptr);

}  // namespace irwri
