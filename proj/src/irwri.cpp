#include "irwri/irwri.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "irwri/linsolve.hpp"

namespace irwri {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string format_hz(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", f);
  return buf;
}

struct Subproblem {
  CMat u;
  CVec s_diag;
};

Subproblem solve_subproblem(AlgorithmKind alg, const HelmholtzOperator& a,
                            const AcquisitionGeometry& geom, const CMat& d,
                            const CVec* s_true, const DualState& duals,
                            double lambda) {
  switch (alg) {
    case AlgorithmKind::known_source: {
      if (s_true == nullptr) {
        throw ConfigError("known_source needs the true signatures");
      }
      if (s_true->size() != geom.num_sources()) {
        throw DimensionError("signature vector must have one entry per source");
      }
      CMat u = reconstruct_localized(a, geom, d, CMat(s_true->asDiagonal()),
                                     duals, lambda);
      return {std::move(u), *s_true};
    }
    case AlgorithmKind::separate: {
      SeparateResult r = estimate_separate(a, geom, d, duals, lambda);
      return {std::move(r.u), r.s.diagonal()};
    }
    case AlgorithmKind::alg1: {
      JointResult r = estimate_joint(a, geom, d, duals, lambda);
      return {std::move(r.u), r.s_full.diagonal()};
    }
    case AlgorithmKind::alg2: {
      // Half step estimates S from the blended reconstruction, then the
      // wavefields are re-solved against the now-diagonal source term.
      JointResult half = estimate_joint(a, geom, d, duals, lambda);
      CVec s = half.s_full.diagonal();
      CMat u =
          reconstruct_localized(a, geom, d, CMat(s.asDiagonal()), duals, lambda);
      return {std::move(u), std::move(s)};
    }
  }
  throw Error("unknown algorithm");
}

struct FreqInput {
  const HelmholtzOperator* a = nullptr;
  const CMat* d = nullptr;
  const CVec* s_true = nullptr;
  const DualState* duals = nullptr;
};

struct BatchIteration {
  SquaredSlownessModel m_new;
  std::vector<Subproblem> subs;
  std::vector<HelmholtzOperator> a_new;
  std::vector<CMat> b_inc;  // Phi S - A(m_new) U per frequency
  std::vector<CMat> d_inc;  // D - P U per frequency
  double pde = 0.0;
  double data = 0.0;
  double pde_scale = 0.0;  // |Phi S|_F over the batch
};

// One outer iteration over a frequency batch: per-frequency U/S subproblems,
// one m-update summing their normal contributions, then the dual increments
// evaluated against the new model. Does not mutate the caller's duals.
// Resolves reg.gamma_tik in place when negative (equal-trace heuristic).
BatchIteration run_batch_iteration(AlgorithmKind alg,
                                   const SquaredSlownessModel& m,
                                   const AcquisitionGeometry& geom,
                                   const std::vector<FreqInput>& inputs,
                                   double lambda, RegularizerConfig& reg,
                                   double gamma_scale) {
  BatchIteration out;
  out.subs.reserve(inputs.size());
  for (const FreqInput& in : inputs) {
    out.subs.push_back(
        solve_subproblem(alg, *in.a, geom, *in.d, in.s_true, *in.duals, lambda));
  }

  std::vector<FrequencyTerm> terms;
  terms.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    terms.push_back(FrequencyTerm{inputs[i].a, &geom, out.subs[i].u,
                                  out.subs[i].s_diag, inputs[i].duals->b_hat});
  }
  if (reg.gamma_tik < 0.0) {
    reg.gamma_tik = suggest_gamma(terms, lambda) * gamma_scale;
  }
  out.m_new = update_model(m, terms, lambda, reg);

  double pde2 = 0.0, data2 = 0.0, scale2 = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out.a_new.emplace_back(out.m_new, inputs[i].a->omega(),
                           inputs[i].a->stencil_kind());
    const CMat phis =
        geom.apply_phi(CMat(out.subs[i].s_diag.asDiagonal()));
    CMat b_inc = phis - out.a_new.back().apply_multi(out.subs[i].u);
    CMat d_inc = *inputs[i].d - geom.apply_p(out.subs[i].u);
    pde2 += b_inc.squaredNorm();
    data2 += d_inc.squaredNorm();
    scale2 += phis.squaredNorm();
    out.b_inc.push_back(std::move(b_inc));
    out.d_inc.push_back(std::move(d_inc));
  }
  out.pde = std::sqrt(pde2);
  out.data = std::sqrt(data2);
  out.pde_scale = std::sqrt(scale2);
  return out;
}

IterationResult single_iteration(AlgorithmKind alg,
                                 const SquaredSlownessModel& m,
                                 const HelmholtzOperator& a_k,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, const CVec* s_true,
                                 const DualState& duals, double lambda,
                                 const RegularizerConfig& reg) {
  if (!(a_k.grid() == m.grid) || !(geometry.grid == m.grid)) {
    throw DimensionError("operator, geometry, and model must share one grid");
  }
  std::vector<FreqInput> inputs(1);
  inputs[0] = FreqInput{&a_k, &d, s_true, &duals};
  RegularizerConfig local = reg;
  BatchIteration out =
      run_batch_iteration(alg, m, geometry, inputs, lambda, local, 1.0);
  DualState nd = duals;
  nd.b_hat += out.b_inc[0];
  nd.d_hat += out.d_inc[0];
  return IterationResult{std::move(out.m_new),
                         std::move(out.a_new[0]),
                         std::move(out.subs[0].u),
                         std::move(out.subs[0].s_diag),
                         std::move(nd),
                         out.pde,
                         out.data};
}

}  // namespace

std::string algorithm_name(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::known_source:
      return "known_source";
    case AlgorithmKind::separate:
      return "separate";
    case AlgorithmKind::alg1:
      return "alg1";
    case AlgorithmKind::alg2:
      return "alg2";
  }
  return "unknown";
}

AlgorithmKind parse_algorithm(const std::string& name) {
  if (name == "known_source") return AlgorithmKind::known_source;
  if (name == "separate") return AlgorithmKind::separate;
  if (name == "alg1") return AlgorithmKind::alg1;
  if (name == "alg2") return AlgorithmKind::alg2;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected known_source, separate, alg1, alg2)");
}

void InversionConfig::validate() const {
  if (paths.empty()) {
    throw ConfigError("schedule needs at least one path");
  }
  for (const auto& path : paths) {
    if (path.empty()) {
      throw ConfigError("every path needs at least one batch");
    }
    double prev = 0.0;
    for (const auto& batch : path) {
      if (batch.empty()) {
        throw ConfigError("every batch needs at least one frequency");
      }
      for (double f : batch) {
        if (!(f > 0.0)) {
          throw ConfigError("frequencies must be strictly positive");
        }
        if (f < prev) {
          throw ConfigError("frequencies must be non-decreasing within a path");
        }
        prev = f;
      }
    }
  }
  if (stopping.max_outer < 0) {
    throw ConfigError("max outer iterations must be non-negative");
  }
  if (stopping.data_drop_tol < 0.0 || stopping.pde_tol < 0.0) {
    throw ConfigError("stopping tolerances must be non-negative");
  }
  if (!(stopping.divergence_factor > 1.0)) {
    throw ConfigError("divergence factor must exceed 1");
  }
  if (lambda_override < 0.0) {
    throw ConfigError("lambda override must be positive (or 0 for automatic)");
  }
  if (!(gamma_scale > 0.0)) {
    throw ConfigError("gamma scale must be positive");
  }
}

IterationResult iterate_alg1(const SquaredSlownessModel& m,
                             const HelmholtzOperator& a_k,
                             const AcquisitionGeometry& geometry, const CMat& d,
                             const DualState& duals, double lambda,
                             const RegularizerConfig& reg) {
  return single_iteration(AlgorithmKind::alg1, m, a_k, geometry, d, nullptr,
                          duals, lambda, reg);
}

IterationResult iterate_alg2(const SquaredSlownessModel& m,
                             const HelmholtzOperator& a_k,
                             const AcquisitionGeometry& geometry, const CMat& d,
                             const DualState& duals, double lambda,
                             const RegularizerConfig& reg) {
  return single_iteration(AlgorithmKind::alg2, m, a_k, geometry, d, nullptr,
                          duals, lambda, reg);
}

IterationResult iterate_separate(const SquaredSlownessModel& m,
                                 const HelmholtzOperator& a_k,
                                 const AcquisitionGeometry& geometry,
                                 const CMat& d, const DualState& duals,
                                 double lambda, const RegularizerConfig& reg) {
  return single_iteration(AlgorithmKind::separate, m, a_k, geometry, d, nullptr,
                          duals, lambda, reg);
}

IterationResult iterate_known_source(const SquaredSlownessModel& m,
                                     const HelmholtzOperator& a_k,
                                     const AcquisitionGeometry& geometry,
                                     const CMat& d, const CVec& s_true,
                                     const DualState& duals, double lambda,
                                     const RegularizerConfig& reg) {
  return single_iteration(AlgorithmKind::known_source, m, a_k, geometry, d,
                          &s_true, duals, lambda, reg);
}

InversionResult run_inversion(const InversionConfig& config,
                              const std::vector<DataMatrix>& data,
                              const AcquisitionGeometry& geometry,
                              const SquaredSlownessModel& m0,
                              const SignatureSet* signatures,
                              const SquaredSlownessModel* m_true) {
  config.validate();
  geometry.validate();
  if (!(geometry.grid == m0.grid)) {
    throw DimensionError("geometry and starting model must share one grid");
  }
  if (config.algorithm == AlgorithmKind::known_source && signatures == nullptr) {
    throw ConfigError("known_source inversion requires the true signatures");
  }
  if (signatures != nullptr &&
      signatures->num_sources() != geometry.num_sources()) {
    throw DimensionError("signature set does not match the source count");
  }
  if (m_true != nullptr && !(m_true->grid == m0.grid)) {
    throw DimensionError("reference model lives on a different grid");
  }

  // Every scheduled frequency must resolve to exactly one data block before
  // any factorization happens.
  auto find_block = [&](double f) -> const DataMatrix* {
    const DataMatrix* hit = nullptr;
    for (const DataMatrix& blk : data) {
      if (std::abs(blk.frequency_hz - f) <= 1e-9 * std::max(1.0, f)) {
        if (hit != nullptr) {
          throw ConfigError("multiple data blocks match frequency " +
                            format_hz(f) + " Hz");
        }
        hit = &blk;
      }
    }
    return hit;
  };
  for (const auto& path : config.paths) {
    for (const auto& batch : path) {
      for (double f : batch) {
        const DataMatrix* blk = find_block(f);
        if (blk == nullptr) {
          throw ConfigError("no data block for scheduled frequency " +
                            format_hz(f) + " Hz");
        }
        if (blk->values.rows() != geometry.num_receivers() ||
            blk->values.cols() != geometry.num_sources()) {
          throw DimensionError("data block at " + format_hz(f) +
                               " Hz does not match the acquisition geometry");
        }
      }
    }
  }

  const long factor0 = counters().factor_count.load();
  const long solve0 = counters().solve_count.load();
  const auto nan = std::numeric_limits<double>::quiet_NaN();

  InversionResult res;
  IrwriState state{m0, {}, 0, {}};

  for (std::size_t pi = 0; pi < config.paths.size(); ++pi) {
    for (std::size_t bi = 0; bi < config.paths[pi].size(); ++bi) {
      const std::vector<double>& batch = config.paths[pi][bi];

      std::string label;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (i) label += ';';
        label += format_hz(batch[i]);
      }

      if (!config.carry_duals) {
        state.duals.clear();
      }
      std::vector<HelmholtzOperator> ops;
      std::vector<const DataMatrix*> blocks;
      std::vector<CVec> s_true_cols;
      ops.reserve(batch.size());
      for (double f : batch) {
        ops.emplace_back(state.m, kTwoPi * f, config.stencil);
        blocks.push_back(find_block(f));
        if (state.duals.find(f) == state.duals.end()) {
          state.duals.emplace(f, DualState::zero(m0.grid,
                                                 geometry.num_receivers(),
                                                 geometry.num_sources()));
        }
        if (signatures != nullptr) {
          s_true_cols.push_back(signatures->at_frequency(f));
        }
      }

      double lambda = config.lambda_override;
      if (lambda <= 0.0) {
        for (std::size_t i = 0; i < ops.size(); ++i) {
          const double cand = default_lambda(ops[i], geometry);
          lambda = (i == 0) ? cand : std::min(lambda, cand);
        }
      }
      RegularizerConfig reg{config.gamma_tik};

      double initial_data = -1.0;
      double prev_data = -1.0;
      for (int it = 1; it <= config.stopping.max_outer; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<FreqInput> inputs(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
          inputs[i] = FreqInput{
              &ops[i], &blocks[i]->values,
              config.algorithm == AlgorithmKind::known_source ? &s_true_cols[i]
                                                              : nullptr,
              &state.duals.at(batch[i])};
        }
        BatchIteration out =
            run_batch_iteration(config.algorithm, state.m, geometry, inputs,
                                lambda, reg, config.gamma_scale);

        if (it > 1 && initial_data > 0.0 &&
            out.data > config.stopping.divergence_factor * initial_data) {
          res.diverged = true;
          res.divergence_message =
              "data misfit " + std::to_string(out.data) + " exceeded " +
              std::to_string(config.stopping.divergence_factor) +
              "x the batch-initial " + std::to_string(initial_data) +
              " (path " + std::to_string(pi + 1) + ", batch " +
              std::to_string(bi + 1) + ", iteration " + std::to_string(it) +
              "); keeping the previous model";
          res.model = state.m;
          res.snapshots.emplace_back("diverged_path" + std::to_string(pi + 1) +
                                         "_batch" + std::to_string(bi + 1),
                                     state.m);
          return res;
        }

        for (std::size_t i = 0; i < batch.size(); ++i) {
          DualState& ds = state.duals.at(batch[i]);
          ds.b_hat += out.b_inc[i];
          ds.d_hat += out.d_inc[i];
          ops[i] = std::move(out.a_new[i]);
        }
        state.m = std::move(out.m_new);
        state.total_iterations += 1;

        const double re =
            m_true != nullptr ? model_re(*m_true, state.m) : nan;
        state.records.push_back(
            ConvergenceRecord{state.total_iterations, out.pde, out.data,
                              m_true != nullptr ? re : 0.0});
        const double wall_ms =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0)
                .count();
        res.history.push_back(HistoryRow{
            static_cast<int>(pi + 1), static_cast<int>(bi + 1), label, it,
            out.pde, out.data, re, counters().factor_count.load() - factor0,
            counters().solve_count.load() - solve0, wall_ms});

        if (it == 1) {
          initial_data = out.data;
        } else if (prev_data > 0.0 &&
                   std::abs(prev_data - out.data) / prev_data <
                       config.stopping.data_drop_tol) {
          break;
        }
        if (config.stopping.pde_tol > 0.0 &&
            out.pde <= config.stopping.pde_tol * out.pde_scale) {
          break;
        }
        prev_data = out.data;
      }

      res.snapshots.emplace_back("path" + std::to_string(pi + 1) + "_batch" +
                                     std::to_string(bi + 1),
                                 state.m);
    }
  }

  res.model = state.m;
  return res;
}

}  // namespace irwri
