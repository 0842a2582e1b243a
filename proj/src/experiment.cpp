#include "irwri/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "irwri/io.hpp"
#include "irwri/linsolve.hpp"
#include "irwri/metrics.hpp"
#include "irwri/source_estimation.hpp"

namespace irwri {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  return out;
}

const DataMatrix& block_at(const std::vector<DataMatrix>& blocks, double f) {
  const DataMatrix* hit = nullptr;
  for (const DataMatrix& b : blocks) {
    if (std::abs(b.frequency_hz - f) <= 1e-9 * std::max(1.0, f)) {
      if (hit != nullptr) {
        throw ConfigError("multiple data blocks match frequency " + fmt(f) +
                          " Hz");
      }
      hit = &b;
    }
  }
  if (hit == nullptr) {
    throw ConfigError("no data block for frequency " + fmt(f) + " Hz");
  }
  return *hit;
}

std::vector<double> unique_frequencies(
    const std::vector<std::vector<std::vector<double>>>& paths) {
  std::vector<double> out;
  for (const auto& path : paths) {
    for (const auto& batch : path) {
      for (double f : batch) {
        bool seen = false;
        for (double g : out) {
          if (std::abs(g - f) <= 1e-9 * std::max(1.0, f)) {
            seen = true;
            break;
          }
        }
        if (!seen) out.push_back(f);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CVec method_signatures(const std::string& method, const HelmholtzOperator& a,
                       const AcquisitionGeometry& geom, const CMat& d,
                       double lambda) {
  if (method == "conventional") {
    return estimate_conventional(a, geom, d).diagonal();
  }
  if (method == "separate") {
    return estimate_separate(a, geom, d, lambda).s.diagonal();
  }
  if (method == "joint") {
    return estimate_joint(a, geom, d, lambda).s_full.diagonal();
  }
  throw ConfigError("unknown estimation method '" + method +
                    "' (expected conventional, separate, joint)");
}

std::vector<double> estimate_frequencies(const ConfigMap& cfg) {
  if (cfg.has("estimate", "frequencies")) {
    return cfg.get_double_list("estimate", "frequencies");
  }
  if (cfg.has("forward", "frequencies")) {
    return cfg.get_double_list("forward", "frequencies");
  }
  throw ConfigError(
      "no frequencies given ([estimate] frequencies or [forward] "
      "frequencies)");
}

void check_frequencies(const std::vector<double>& freqs) {
  if (freqs.empty()) {
    throw ConfigError("frequency list is empty");
  }
  for (double f : freqs) {
    if (!(f > 0.0)) {
      throw ConfigError("frequencies must be strictly positive");
    }
  }
}

}  // namespace

RMat velocity_gradient(int nz, int nx, double v_top, double v_bottom) {
  RMat v(nz, nx);
  for (int k = 0; k < nz; ++k) {
    const double t = nz > 1 ? double(k) / double(nz - 1) : 0.0;
    v.row(k).setConstant(v_top + t * (v_bottom - v_top));
  }
  return v;
}

RMat velocity_two_layer_lens(int nz, int nx, double v_top,
                             double v_top_interface,
                             double v_bottom_interface, double v_bottom,
                             double interface_depth_frac,
                             double lens_amplitude, double lens_sigma_frac) {
  if (!(v_top > 0.0) || !(v_top_interface > 0.0) ||
      !(v_bottom_interface > 0.0) || !(v_bottom > 0.0)) {
    throw ConfigError("layer velocities must be positive");
  }
  if (!(interface_depth_frac > 0.0) || !(interface_depth_frac < 1.0)) {
    throw ConfigError("interface depth fraction must lie in (0, 1)");
  }
  RMat v(nz, nx);
  const double k_if = interface_depth_frac * (nz - 1);
  const double cx = 0.5 * (nx - 1);
  const double cz = std::min(0.95, interface_depth_frac + 0.25) * (nz - 1);
  const double sigma = lens_sigma_frac * std::min(nx, nz);
  for (int k = 0; k < nz; ++k) {
    for (int i = 0; i < nx; ++i) {
      double val;
      if (k < k_if) {
        const double t = k_if > 0.0 ? k / k_if : 0.0;
        val = v_top + t * (v_top_interface - v_top);
      } else {
        const double span = (nz - 1) - k_if;
        const double t = span > 0.0 ? (k - k_if) / span : 0.0;
        val = v_bottom_interface + t * (v_bottom - v_bottom_interface);
      }
      if (sigma > 0.0 && lens_amplitude != 0.0) {
        const double r2 = (i - cx) * (i - cx) + (k - cz) * (k - cz);
        val += lens_amplitude * std::exp(-0.5 * r2 / (sigma * sigma));
      }
      v(k, i) = val;
    }
  }
  return v;
}

RMat velocity_salt_blob(int nz, int nx, double v_top, double v_bottom,
                        double blob_velocity, double blob_radius_frac) {
  RMat v = velocity_gradient(nz, nx, v_top, v_bottom);
  const double cx = 0.5 * (nx - 1);
  const double cz = 0.5 * (nz - 1);
  const double r = blob_radius_frac * std::min(nx, nz);
  for (int k = 0; k < nz; ++k) {
    for (int i = 0; i < nx; ++i) {
      const double d2 = (i - cx) * (i - cx) + (k - cz) * (k - cz);
      if (d2 <= r * r) v(k, i) = blob_velocity;
    }
  }
  return v;
}

StencilKind parse_stencil(const std::string& name) {
  if (name == "five_point") return StencilKind::five_point;
  if (name == "mixed_nine_point") return StencilKind::mixed_nine_point;
  throw ConfigError("unknown stencil '" + name +
                    "' (expected five_point or mixed_nine_point)");
}

std::string stencil_name(StencilKind kind) {
  return kind == StencilKind::five_point ? "five_point" : "mixed_nine_point";
}

std::vector<int> even_line(int n, int lo, int hi) {
  if (n < 1) throw ConfigError("line needs at least one node");
  if (hi < lo) throw ConfigError("line range is empty");
  if (n > hi - lo + 1) {
    throw ConfigError("cannot place " + std::to_string(n) +
                      " distinct nodes on " + std::to_string(hi - lo + 1) +
                      " positions");
  }
  std::vector<int> out(n);
  if (n == 1) {
    out[0] = (lo + hi) / 2;
    return out;
  }
  const double span = hi - lo;
  for (int j = 0; j < n; ++j) {
    out[j] = lo + static_cast<int>(std::llround(span * j / double(n - 1)));
  }
  return out;
}

Grid2D grid_from_config(const ConfigMap& cfg) {
  const int nx = cfg.get_int("grid", "nx");
  const int nz = cfg.get_int("grid", "nz");
  const double dx = cfg.get_double("grid", "dx");
  const double dz = cfg.get_double("grid", "dz", dx);
  const int npml = cfg.get_int("grid", "npml", 10);
  const bool fst = cfg.get_bool("grid", "free_surface_top", false);
  return Grid2D(nx, nz, dx, dz, npml, fst);
}

SquaredSlownessModel true_model_from_config(const ConfigMap& cfg,
                                            const Grid2D& grid) {
  const std::string kind = cfg.get_string("model", "kind");
  const double margin = cfg.get_double("model", "bound_margin", 0.1);
  RMat v;
  if (kind == "two_layer_lens") {
    v = velocity_two_layer_lens(
        grid.nz, grid.nx, cfg.get_double("model", "v_top", 1500.0),
        cfg.get_double("model", "v_top_interface", 2100.0),
        cfg.get_double("model", "v_bottom_interface", 2500.0),
        cfg.get_double("model", "v_bottom", 3000.0),
        cfg.get_double("model", "interface_depth_frac", 0.45),
        cfg.get_double("model", "lens_amplitude", 400.0),
        cfg.get_double("model", "lens_sigma_frac", 0.12));
  } else if (kind == "salt_blob") {
    v = velocity_salt_blob(grid.nz, grid.nx,
                           cfg.get_double("model", "v_top", 1500.0),
                           cfg.get_double("model", "v_bottom", 3000.0),
                           cfg.get_double("model", "blob_velocity", 4500.0),
                           cfg.get_double("model", "blob_radius_frac", 0.18));
  } else if (kind == "gradient") {
    v = velocity_gradient(grid.nz, grid.nx,
                          cfg.get_double("model", "v_top", 1500.0),
                          cfg.get_double("model", "v_bottom", 3000.0));
  } else if (kind == "homogeneous") {
    v = RMat::Constant(grid.nz, grid.nx, cfg.get_double("model", "v", 1500.0));
  } else if (kind == "file") {
    const GridFileData gf =
        read_grid_file(cfg.get_string("model", "file"));
    if (gf.is_complex || gf.nz != grid.nz || gf.nx != grid.nx) {
      throw ConfigError("model file does not match the configured grid");
    }
    v = gf.real_values;
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  return velocity_to_squared_slowness(grid, v, margin);
}

SquaredSlownessModel start_model_from_config(
    const ConfigMap& cfg, const SquaredSlownessModel& m_true) {
  const std::string kind = cfg.get_string("start", "kind", "smooth");
  if (kind == "true") {
    return m_true;
  }
  if (kind == "smooth") {
    return smooth_model(m_true,
                        cfg.get_double("start", "smoothing_radius_m", 0.0));
  }
  // The remaining kinds inherit the true model's bounds so the target stays
  // reachable.
  if (kind == "homogeneous") {
    const double v = cfg.get_double("start", "v");
    if (!(v > 0.0)) throw ConfigError("[start] v must be positive");
    const RMat field = RMat::Constant(m_true.grid.nz, m_true.grid.nx,
                                      1.0 / (v * v));
    return m_true.with_values(extend_to_pads(m_true.grid, field));
  }
  if (kind == "file") {
    const GridFileData gf = read_grid_file(cfg.get_string("start", "file"));
    if (gf.is_complex || gf.nz != m_true.grid.nz || gf.nx != m_true.grid.nx) {
      throw ConfigError("start model file does not match the configured grid");
    }
    RMat m2 = gf.real_values.array().square().inverse().matrix();
    return m_true.with_values(extend_to_pads(m_true.grid, m2));
  }
  throw ConfigError("unknown start model kind '" + kind + "'");
}

AcquisitionGeometry geometry_from_config(const ConfigMap& cfg,
                                         const Grid2D& grid) {
  const int margin = cfg.get_int("acquisition", "margin_nodes", 2);
  auto line = [&](const char* ix_key, const char* n_key, const char* iz_key,
                  int default_iz) {
    std::vector<std::pair<int, int>> nodes;
    const int iz = cfg.get_int("acquisition", iz_key, default_iz);
    if (cfg.has("acquisition", ix_key)) {
      for (double x : cfg.get_double_list("acquisition", ix_key)) {
        const int ix = static_cast<int>(x);
        if (double(ix) != x) {
          throw ConfigError(std::string("[acquisition] ") + ix_key +
                            " must contain integers");
        }
        nodes.emplace_back(ix, iz);
      }
    } else {
      const int n = cfg.get_int("acquisition", n_key);
      for (int ix : even_line(n, margin, grid.nx - 1 - margin)) {
        nodes.emplace_back(ix, iz);
      }
    }
    return nodes;
  };
  const auto sources =
      line("source_ix", "num_sources", "source_iz", 2);
  const auto receivers =
      line("receiver_ix", "num_receivers", "receiver_iz", grid.nz - 3);
  return make_geometry(grid, sources, receivers);
}

SignatureSet signatures_from_config(const ConfigMap& cfg, int num_sources) {
  return SignatureSet::random(num_sources,
                              cfg.get_double("signatures", "fc_lo", 4.0),
                              cfg.get_double("signatures", "fc_hi", 10.0),
                              cfg.get_double("signatures", "t0_lo", 0.1),
                              cfg.get_double("signatures", "t0_hi", 0.4),
                              cfg.get_u64("signatures", "seed", 1234));
}

ExperimentSetup setup_from_config(const ConfigMap& cfg) {
  ExperimentSetup s;
  s.grid = grid_from_config(cfg);
  s.m_true = true_model_from_config(cfg, s.grid);
  s.m_start = start_model_from_config(cfg, s.m_true);
  s.geometry = geometry_from_config(cfg, s.grid);
  s.signatures = signatures_from_config(cfg, s.geometry.num_sources());
  s.stencil = parse_stencil(
      cfg.get_string("forward", "stencil", "five_point"));
  s.snr_db = cfg.get_double("noise", "snr_db",
                            std::numeric_limits<double>::infinity());
  s.noise_seed = cfg.get_u64("noise", "seed", 20240);
  return s;
}

std::vector<std::vector<std::vector<double>>> schedule_from_config(
    const ConfigMap& cfg) {
  const double step = cfg.get_double("invert", "freq_step", 0.5);
  if (!(step > 0.0)) throw ConfigError("[invert] freq_step must be positive");
  const std::string mode = cfg.get_string("invert", "batch_mode", "mono");
  if (mode != "mono" && mode != "overlap2") {
    throw ConfigError("[invert] batch_mode must be mono or overlap2");
  }
  std::vector<std::vector<std::vector<double>>> paths;
  for (const std::string& spec : cfg.get_string_list("invert", "paths")) {
    double lo = 0.0, hi = 0.0;
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos) {
      lo = hi = std::stod(spec);
    } else {
      lo = std::stod(spec.substr(0, colon));
      hi = std::stod(spec.substr(colon + 1));
    }
    if (!(lo > 0.0) || hi < lo) {
      throw ConfigError("bad path '" + spec + "' (want start:end, end >= start)");
    }
    const long k = std::llround((hi - lo) / step);
    if (std::abs(lo + double(k) * step - hi) > 1e-9 * std::max(1.0, hi)) {
      throw ConfigError("path '" + spec +
                        "' does not divide evenly by freq_step");
    }
    std::vector<double> freqs;
    for (long i = 0; i <= k; ++i) freqs.push_back(lo + double(i) * step);
    std::vector<std::vector<double>> batches;
    if (mode == "mono" || freqs.size() == 1) {
      for (double f : freqs) batches.push_back({f});
    } else {
      for (std::size_t i = 0; i + 1 < freqs.size(); ++i) {
        batches.push_back({freqs[i], freqs[i + 1]});
      }
    }
    paths.push_back(std::move(batches));
  }
  return paths;
}

InversionConfig inversion_from_config(const ConfigMap& cfg) {
  InversionConfig c;
  c.algorithm = parse_algorithm(cfg.get_string("invert", "algorithm"));
  c.stencil =
      parse_stencil(cfg.get_string("forward", "stencil", "five_point"));
  c.paths = schedule_from_config(cfg);
  c.stopping.max_outer = cfg.get_int("invert", "max_outer", 15);
  c.stopping.data_drop_tol = cfg.get_double("invert", "data_drop_tol", 1e-3);
  c.stopping.pde_tol = cfg.get_double("invert", "pde_tol", 0.0);
  c.stopping.divergence_factor =
      cfg.get_double("invert", "divergence_factor", 1e3);
  c.lambda_override = cfg.get_double("invert", "lambda", 0.0);
  c.gamma_tik = cfg.get_double("invert", "gamma_tik", -1.0);
  c.gamma_scale = cfg.get_double("invert", "gamma_scale", 1.0);
  c.carry_duals = cfg.get_bool("invert", "carry_duals", false);
  c.validate();
  return c;
}

std::vector<DataMatrix> synthesize_blocks(const ExperimentSetup& setup,
                                          const std::vector<double>& freqs) {
  check_frequencies(freqs);
  std::vector<DataMatrix> out;
  out.reserve(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    DataMatrix clean = synthesize_data(setup.m_true, setup.geometry,
                                       setup.signatures.at_frequency(freqs[i]),
                                       freqs[i], setup.stencil);
    if (std::isfinite(setup.snr_db)) {
      out.push_back(add_noise(clean, setup.snr_db,
                              setup.noise_seed + std::uint64_t(i)));
    } else {
      out.push_back(std::move(clean));
    }
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<HistoryRow>& rows) {
  std::ofstream out = open_csv(path);
  out << "path,batch,frequencies_hz,iteration,pde_misfit,data_misfit,"
         "model_re,factor_count,solve_count,wall_ms\n";
  for (const HistoryRow& r : rows) {
    out << r.path << ',' << r.batch << ',' << r.frequencies << ','
        << r.iteration << ',' << fmt(r.pde_misfit) << ','
        << fmt(r.data_misfit) << ',' << fmt(r.model_re) << ','
        << r.factor_count << ',' << r.solve_count << ',' << fmt(r.wall_ms)
        << '\n';
  }
}

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"grid", {"nx", "nz", "dx", "dz", "npml", "free_surface_top"}},
      {"model",
       {"kind", "file", "v", "v_top", "v_top_interface", "v_bottom_interface",
        "v_bottom", "interface_depth_frac", "lens_amplitude",
        "lens_sigma_frac", "blob_velocity", "blob_radius_frac",
        "bound_margin"}},
      {"start", {"kind", "smoothing_radius_m", "file", "v"}},
      {"acquisition",
       {"num_sources", "source_ix", "source_iz", "num_receivers",
        "receiver_ix", "receiver_iz", "margin_nodes"}},
      {"signatures", {"fc_lo", "fc_hi", "t0_lo", "t0_hi", "seed"}},
      {"noise", {"snr_db", "seed"}},
      {"forward", {"frequencies", "stencil"}},
      {"estimate", {"methods", "frequencies", "lambda", "data_file"}},
      {"invert",
       {"algorithm", "paths", "freq_step", "batch_mode", "max_outer",
        "data_drop_tol", "pde_tol", "divergence_factor", "lambda",
        "gamma_tik", "gamma_scale", "carry_duals", "data_file"}},
      {"sweep",
       {"axis", "values", "axis2", "values2", "seeds", "frequencies",
        "methods"}},
      {"output", {"dir"}},
  };
  return schema;
}

int cmd_forward(const ConfigMap& cfg, const std::filesystem::path& out_dir) {
  cfg.require_known(config_schema());
  const ExperimentSetup setup = setup_from_config(cfg);
  const std::vector<double> freqs =
      cfg.get_double_list("forward", "frequencies");
  check_frequencies(freqs);
  std::filesystem::create_directories(out_dir);

  std::vector<DataMatrix> clean;
  clean.reserve(freqs.size());
  for (double f : freqs) {
    clean.push_back(synthesize_data(setup.m_true, setup.geometry,
                                    setup.signatures.at_frequency(f), f,
                                    setup.stencil));
  }
  const bool noisy = std::isfinite(setup.snr_db);
  nlohmann::json manifest;
  manifest["command"] = "forward";
  manifest["frequencies_hz"] = freqs;
  manifest["num_sources"] = setup.geometry.num_sources();
  manifest["num_receivers"] = setup.geometry.num_receivers();
  manifest["stencil"] = stencil_name(setup.stencil);
  manifest["noise"] = noisy;
  if (noisy) {
    std::vector<DataMatrix> blocks;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      blocks.push_back(
          add_noise(clean[i], setup.snr_db, setup.noise_seed + i));
    }
    write_data_file(out_dir / "data.irwdat", blocks);
    write_data_file(out_dir / "data_clean.irwdat", clean);
    manifest["snr_db"] = setup.snr_db;
    manifest["noise_seed"] = setup.noise_seed;
    manifest["files"]["data"] = "data.irwdat";
    manifest["files"]["data_clean"] = "data_clean.irwdat";
  } else {
    write_data_file(out_dir / "data.irwdat", clean);
    manifest["files"]["data"] = "data.irwdat";
  }
  write_grid_file(out_dir / "model_true.grd", setup.grid.dx, setup.grid.dz,
                  squared_slowness_to_velocity(setup.m_true));
  manifest["files"]["model_true"] = "model_true.grd";

  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  cfg.write_file(out_dir / "resolved_config.ini");
  return 0;
}

int cmd_estimate_sources(const ConfigMap& cfg,
                         const std::filesystem::path& out_dir) {
  cfg.require_known(config_schema());
  const ExperimentSetup setup = setup_from_config(cfg);
  const std::vector<double> freqs = estimate_frequencies(cfg);
  check_frequencies(freqs);
  std::vector<std::string> methods =
      cfg.has("estimate", "methods")
          ? cfg.get_string_list("estimate", "methods")
          : std::vector<std::string>{"conventional", "separate", "joint"};
  const double lambda_cfg = cfg.get_double("estimate", "lambda", 0.0);

  std::vector<DataMatrix> blocks;
  if (cfg.has("estimate", "data_file")) {
    blocks = read_data_file(cfg.get_string("estimate", "data_file"));
  } else {
    blocks = synthesize_blocks(setup, freqs);
  }
  std::filesystem::create_directories(out_dir);

  nlohmann::json manifest;
  manifest["command"] = "estimate-sources";
  manifest["frequencies_hz"] = freqs;
  manifest["methods"] = methods;
  std::ofstream summary = open_csv(out_dir / "estimate_summary.csv");
  summary << "method,mean_re_fraction,median_re_fraction,max_re_fraction\n";

  for (const std::string& method : methods) {
    std::ofstream out = open_csv(out_dir / ("signatures_" + method + ".csv"));
    out << "frequency_hz,source,re_fraction,true_magnitude,est_magnitude,"
           "true_phase_rad,est_phase_rad\n";
    std::vector<double> all_re;
    for (double f : freqs) {
      const DataMatrix& d = block_at(blocks, f);
      const HelmholtzOperator a(setup.m_start, kTwoPi * f, setup.stencil);
      const double lambda =
          lambda_cfg > 0.0 ? lambda_cfg : default_lambda(a, setup.geometry);
      const CVec s_est =
          method_signatures(method, a, setup.geometry, d.values, lambda);
      const CVec s_true = setup.signatures.at_frequency(f);
      for (int i = 0; i < s_true.size(); ++i) {
        const double re = std::abs(s_true[i]) > 0.0
                              ? std::abs(s_true[i] - s_est[i]) /
                                    std::abs(s_true[i])
                              : std::numeric_limits<double>::quiet_NaN();
        all_re.push_back(re);
        out << fmt(f) << ',' << i << ',' << fmt(re) << ','
            << fmt(std::abs(s_true[i])) << ',' << fmt(std::abs(s_est[i]))
            << ',' << fmt(std::arg(s_true[i])) << ','
            << fmt(std::arg(s_est[i])) << '\n';
      }
    }
    summary << method << ',' << fmt(mean(all_re)) << ',' << fmt(median(all_re))
            << ',' << fmt(*std::max_element(all_re.begin(), all_re.end()))
            << '\n';
    manifest["files"]["signatures_" + method] =
        "signatures_" + method + ".csv";
  }
  manifest["files"]["summary"] = "estimate_summary.csv";
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  cfg.write_file(out_dir / "resolved_config.ini");
  return 0;
}

int cmd_invert(const ConfigMap& cfg, const std::filesystem::path& out_dir) {
  cfg.require_known(config_schema());
  const ExperimentSetup setup = setup_from_config(cfg);
  const InversionConfig inv = inversion_from_config(cfg);

  std::vector<DataMatrix> blocks;
  bool synthesized = false;
  if (cfg.has("invert", "data_file")) {
    blocks = read_data_file(cfg.get_string("invert", "data_file"));
  } else {
    blocks = synthesize_blocks(setup, unique_frequencies(inv.paths));
    synthesized = true;
  }
  std::filesystem::create_directories(out_dir);

  counters().reset();
  const InversionResult res = run_inversion(inv, blocks, setup.geometry,
                                            setup.m_start, &setup.signatures,
                                            &setup.m_true);

  write_history_csv(out_dir / "history.csv", res.history);
  write_grid_file(out_dir / "final_model.grd", setup.grid.dx, setup.grid.dz,
                  squared_slowness_to_velocity(res.model));
  write_grid_file(out_dir / "model_start.grd", setup.grid.dx, setup.grid.dz,
                  squared_slowness_to_velocity(setup.m_start));
  write_grid_file(out_dir / "model_true.grd", setup.grid.dx, setup.grid.dz,
                  squared_slowness_to_velocity(setup.m_true));
  for (const auto& [label, model] : res.snapshots) {
    write_grid_file(out_dir / ("model_" + label + ".grd"), setup.grid.dx,
                    setup.grid.dz, squared_slowness_to_velocity(model));
  }
  if (synthesized) {
    write_data_file(out_dir / "data.irwdat", blocks);
  }

  nlohmann::json manifest;
  manifest["command"] = "invert";
  manifest["algorithm"] = algorithm_name(inv.algorithm);
  manifest["stencil"] = stencil_name(inv.stencil);
  manifest["frequencies_hz"] = unique_frequencies(inv.paths);
  manifest["num_paths"] = inv.paths.size();
  manifest["iterations"] = res.history.size();
  manifest["factor_count"] =
      res.history.empty() ? 0 : res.history.back().factor_count;
  manifest["solve_count"] =
      res.history.empty() ? 0 : res.history.back().solve_count;
  manifest["final_model_re"] =
      res.history.empty() ? model_re(setup.m_true, res.model)
                          : res.history.back().model_re;
  manifest["diverged"] = res.diverged;
  manifest["files"]["history"] = "history.csv";
  manifest["files"]["final_model"] = "final_model.grd";
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  cfg.write_file(out_dir / "resolved_config.ini");

  if (res.diverged) {
    std::ofstream dv(out_dir / "divergence.txt");
    dv << res.divergence_message << "\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const ConfigMap& cfg, const std::filesystem::path& out_dir,
              int threads) {
  cfg.require_known(config_schema());
  const std::string axis = cfg.get_string("sweep", "axis");
  const std::vector<double> values = cfg.get_double_list("sweep", "values");
  const bool has_axis2 = cfg.has("sweep", "axis2");
  const std::string axis2 = cfg.get_string("sweep", "axis2", "");
  const std::vector<double> values2 =
      has_axis2 ? cfg.get_double_list("sweep", "values2")
                : std::vector<double>{0.0};
  const int num_seeds = cfg.get_int("sweep", "seeds", 5);
  if (num_seeds < 1) throw ConfigError("[sweep] seeds must be at least 1");
  std::vector<std::string> methods =
      cfg.has("sweep", "methods")
          ? cfg.get_string_list("sweep", "methods")
          : std::vector<std::string>{"conventional", "separate", "joint"};
  std::vector<double> freqs;
  if (cfg.has("sweep", "frequencies")) {
    freqs = cfg.get_double_list("sweep", "frequencies");
  } else {
    freqs = estimate_frequencies(cfg);
  }
  check_frequencies(freqs);

  auto apply_axis = [](ConfigMap& c, const std::string& ax, double v) {
    if (ax == "snr_db") {
      c.set("noise", "snr_db", fmt(v));
    } else if (ax == "smoothing_radius_m") {
      c.set("start", "kind", "smooth");
      c.set("start", "smoothing_radius_m", fmt(v));
    } else if (ax == "source_iz") {
      c.set("acquisition", "source_iz", fmt(v));
    } else if (ax == "num_sources") {
      if (c.has("acquisition", "source_ix")) {
        throw ConfigError(
            "sweeping num_sources conflicts with an explicit source_ix list");
      }
      c.set("acquisition", "num_sources", fmt(v));
    } else {
      throw ConfigError("unknown sweep axis '" + ax +
                        "' (expected snr_db, smoothing_radius_m, source_iz, "
                        "num_sources)");
    }
  };

  struct Cell {
    double v1 = 0.0, v2 = 0.0;
    // method -> per-seed mean RE over sources and frequencies
    std::map<std::string, std::vector<double>> re;
    bool failed = false;
    std::string message;
  };
  std::vector<Cell> cells(values.size() * values2.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values2.size(); ++j) {
      Cell& c = cells[i * values2.size() + j];
      c.v1 = values[i];
      c.v2 = values2[j];
    }
  }

  const std::uint64_t sig_seed0 = cfg.get_u64("signatures", "seed", 1234);
  const std::uint64_t noise_seed0 = cfg.get_u64("noise", "seed", 20240);

  auto run_cell = [&](Cell& cell) {
    try {
      ConfigMap local = cfg;
      apply_axis(local, axis, cell.v1);
      if (has_axis2) apply_axis(local, axis2, cell.v2);
      for (int s = 0; s < num_seeds; ++s) {
        local.set("signatures", "seed", std::to_string(sig_seed0 + s));
        local.set("noise", "seed", std::to_string(noise_seed0 + s));
        const ExperimentSetup setup = setup_from_config(local);
        const std::vector<DataMatrix> blocks = synthesize_blocks(setup, freqs);
        const double lambda_cfg = local.get_double("estimate", "lambda", 0.0);
        for (const std::string& method : methods) {
          std::vector<double> res;
          for (double f : freqs) {
            const DataMatrix& d = block_at(blocks, f);
            const HelmholtzOperator a(setup.m_start, kTwoPi * f,
                                      setup.stencil);
            const double lambda = lambda_cfg > 0.0
                                      ? lambda_cfg
                                      : default_lambda(a, setup.geometry);
            const CVec s_est = method_signatures(method, a, setup.geometry,
                                                 d.values, lambda);
            const CVec s_true = setup.signatures.at_frequency(f);
            const RVec re = per_source_signature_re(
                CMat(s_true.transpose()), CMat(s_est.transpose()));
            for (int q = 0; q < re.size(); ++q) res.push_back(re[q]);
          }
          cell.re[method].push_back(mean(res));
        }
      }
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.message = e.what();
    }
  };

  if (threads <= 1) {
    for (Cell& c : cells) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(cells.size()));
    for (int t = 0; t < n; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::filesystem::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["command"] = "sweep";
  manifest["axis"] = axis;
  if (has_axis2) manifest["axis2"] = axis2;
  manifest["seeds"] = num_seeds;
  manifest["frequencies_hz"] = freqs;
  for (const std::string& method : methods) {
    std::ofstream out = open_csv(out_dir / ("sweep_" + method + ".csv"));
    out << axis;
    if (has_axis2) out << ',' << axis2;
    out << ",mean_re_fraction,median_re_fraction,seed_count\n";
    for (const Cell& c : cells) {
      out << fmt(c.v1);
      if (has_axis2) out << ',' << fmt(c.v2);
      if (c.failed) {
        out << ",nan,nan,0\n";
        continue;
      }
      const std::vector<double>& re = c.re.at(method);
      out << ',' << fmt(mean(re)) << ',' << fmt(median(re)) << ','
          << re.size() << '\n';
    }
    manifest["files"]["sweep_" + method] = "sweep_" + method + ".csv";
  }
  bool any_failed = false;
  for (const Cell& c : cells) {
    if (c.failed) {
      any_failed = true;
      manifest["failures"].push_back({{"axis_value", c.v1},
                                      {"axis2_value", c.v2},
                                      {"message", c.message}});
    }
  }
  manifest["all_cells_ok"] = !any_failed;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  cfg.write_file(out_dir / "resolved_config.ini");
  return 0;
}

}  // namespace irwri
