// Python bindings over the high-level operations: forward modeling,
// signature estimation, metrics, and the config-driven inversion runner.
// Velocity fields cross the boundary as (nz, nx) float arrays in m/s;
// acquisition nodes as (ix, iz) index pairs into the physical window.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irwri/acquisition.hpp"
#include "irwri/config.hpp"
#include "irwri/experiment.hpp"
#include "irwri/grid.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/irwri.hpp"
#include "irwri/linsolve.hpp"
#include "irwri/metrics.hpp"
#include "irwri/source_estimation.hpp"
#include "irwri/types.hpp"

namespace py = pybind11;
using namespace irwri;

namespace {

constexpr double kTwoPi = 6.283185307179586;

Grid2D grid_for(const RMat& velocity, double dx, double dz, int npml,
                bool free_surface_top) {
  return Grid2D(static_cast<int>(velocity.cols()),
                static_cast<int>(velocity.rows()), dx, dz, npml,
                free_surface_top);
}

AcquisitionGeometry geometry_for(
    const Grid2D& grid, const std::vector<std::pair<int, int>>& sources,
    const std::vector<std::pair<int, int>>& receivers) {
  return make_geometry(grid, sources, receivers);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-domain waveform inversion with on-the-fly source "
            "signature estimation";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError",
                                         PyExc_ValueError);

  m.def(
      "ricker_spectrum",
      [](double f_hz, double f_c_hz, double t0_s) {
        return ricker_spectrum(f_hz, f_c_hz, t0_s);
      },
      py::arg("f_hz"), py::arg("f_c_hz"), py::arg("t0_s"),
      "Complex Ricker wavelet amplitude at one frequency.");

  m.def(
      "signature_re",
      [](const CVec& s_true, const CVec& s_est) {
        return signature_re(s_true, s_est);
      },
      py::arg("s_true"), py::arg("s_est"),
      "Relative error |s_est - s_true| / |s_true| over stacked signatures.");

  m.def(
      "model_re",
      [](const RMat& v_true, const RMat& v_est, double dx, double dz) {
        Grid2D g = grid_for(v_true, dx, dz, 0, true);
        return model_re(velocity_to_squared_slowness(g, v_true, 0.5),
                        velocity_to_squared_slowness(g, v_est, 0.5));
      },
      py::arg("v_true"), py::arg("v_est"), py::arg("dx"), py::arg("dz"),
      "Relative squared-slowness error between two velocity fields.");

  m.def(
      "solve_field",
      [](const RMat& velocity, double dx, double dz, int npml,
         bool free_surface_top, double f_hz, std::pair<int, int> source,
         const std::string& stencil) {
        Grid2D g = grid_for(velocity, dx, dz, npml, free_surface_top);
        SquaredSlownessModel model =
            velocity_to_squared_slowness(g, velocity, 0.5);
        AcquisitionGeometry geom = geometry_for(g, {source}, {});
        HelmholtzOperator a(model, kTwoPi * f_hz, parse_stencil(stencil));
        CMat u = Factorization(a.matrix())
                     .solve_multi(geom.apply_phi(CMat::Identity(1, 1)));
        return physical_window(g, CVec(u.col(0)));
      },
      py::arg("velocity"), py::arg("dx"), py::arg("dz"), py::arg("npml") = 10,
      py::arg("free_surface_top") = true, py::arg("f_hz") = 5.0,
      py::arg("source") = std::pair<int, int>{0, 0},
      py::arg("stencil") = "five_point",
      "Unit point-source wavefield over the physical window, (nz, nx) "
      "complex.");

  m.def(
      "synthesize_data",
      [](const RMat& velocity, double dx, double dz, int npml,
         bool free_surface_top, double f_hz,
         const std::vector<std::pair<int, int>>& sources,
         const std::vector<std::pair<int, int>>& receivers,
         const CVec& signatures, const std::string& stencil, double snr_db,
         std::uint64_t noise_seed) {
        Grid2D g = grid_for(velocity, dx, dz, npml, free_surface_top);
        SquaredSlownessModel model =
            velocity_to_squared_slowness(g, velocity, 0.5);
        AcquisitionGeometry geom = geometry_for(g, sources, receivers);
        DataMatrix d = synthesize_data(model, geom, signatures, f_hz,
                                       parse_stencil(stencil));
        if (std::isfinite(snr_db)) d = add_noise(d, snr_db, noise_seed);
        return d.values;
      },
      py::arg("velocity"), py::arg("dx"), py::arg("dz"), py::arg("npml"),
      py::arg("free_surface_top"), py::arg("f_hz"), py::arg("sources"),
      py::arg("receivers"), py::arg("signatures"),
      py::arg("stencil") = "five_point",
      py::arg("snr_db") = std::numeric_limits<double>::infinity(),
      py::arg("noise_seed") = 20240,
      "Receiver data (M, n_s) for point sources with the given complex "
      "signatures.");

  m.def(
      "estimate_signatures",
      [](const RMat& velocity, double dx, double dz, int npml,
         bool free_surface_top, double f_hz,
         const std::vector<std::pair<int, int>>& sources,
         const std::vector<std::pair<int, int>>& receivers, const CMat& data,
         const std::string& method, double lam, const std::string& stencil) {
        Grid2D g = grid_for(velocity, dx, dz, npml, free_surface_top);
        SquaredSlownessModel model =
            velocity_to_squared_slowness(g, velocity, 0.5);
        AcquisitionGeometry geom = geometry_for(g, sources, receivers);
        HelmholtzOperator a(model, kTwoPi * f_hz, parse_stencil(stencil));
        if (lam <= 0.0) lam = default_lambda(a, geom);
        py::dict out;
        out["lambda"] = lam;
        if (method == "conventional") {
          SignatureMatrix s = estimate_conventional(a, geom, data);
          out["values"] = CMat(s.values);
          out["underdetermined"] = false;
          out["off_diagonal_ratio"] = s.off_diagonal_ratio();
        } else if (method == "separate") {
          SeparateResult r = estimate_separate(a, geom, data, lam);
          out["values"] = CMat(r.s.values);
          out["underdetermined"] = false;
          out["off_diagonal_ratio"] = r.s.off_diagonal_ratio();
        } else if (method == "joint") {
          JointResult r = estimate_joint(a, geom, data, lam);
          out["values"] = CMat(r.s_full.values);
          out["underdetermined"] = r.underdetermined;
          out["off_diagonal_ratio"] = r.s_full.off_diagonal_ratio();
        } else {
          throw ConfigError("unknown estimation method '" + method +
                            "' (want conventional, separate, or joint)");
        }
        return out;
      },
      py::arg("velocity"), py::arg("dx"), py::arg("dz"), py::arg("npml"),
      py::arg("free_surface_top"), py::arg("f_hz"), py::arg("sources"),
      py::arg("receivers"), py::arg("data"), py::arg("method") = "joint",
      py::arg("lam") = 0.0, py::arg("stencil") = "five_point",
      "Signature matrix estimated in the given background model. The "
      "diagonal holds the per-source signatures; lam <= 0 picks the "
      "spectral default.");

  m.def(
      "invert",
      [](const std::string& config_text) {
        ConfigMap cfg = ConfigMap::parse_string(config_text);
        ExperimentSetup setup = setup_from_config(cfg);
        InversionConfig inv = inversion_from_config(cfg);
        std::vector<double> freqs;
        for (const auto& path : inv.paths)
          for (const auto& batch : path)
            for (double f : batch) freqs.push_back(f);
        std::sort(freqs.begin(), freqs.end());
        freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
        std::vector<DataMatrix> data = synthesize_blocks(setup, freqs);
        InversionResult res =
            run_inversion(inv, data, setup.geometry, setup.m_start,
                          &setup.signatures, &setup.m_true);
        py::dict out;
        out["velocity"] = squared_slowness_to_velocity(res.model);
        out["start_velocity"] = squared_slowness_to_velocity(setup.m_start);
        out["true_velocity"] = squared_slowness_to_velocity(setup.m_true);
        out["model_re"] = model_re(setup.m_true, res.model);
        out["start_model_re"] = model_re(setup.m_true, setup.m_start);
        out["diverged"] = res.diverged;
        out["iterations"] = res.history.size();
        return out;
      },
      py::arg("config_text"),
      "Runs a synthetic inversion described by the same INI text the CLI "
      "accepts ([grid]/[model]/[start]/[acquisition]/[invert] sections) and "
      "returns the final velocity with error metrics.");
}
