#include "irwri/acquisition.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <unordered_set>

#include "irwri/linsolve.hpp"
#include "irwri/rng.hpp"

namespace irwri {

namespace {

void check_nodes(const Grid2D& grid, const std::vector<int>& nodes,
                 const char* what) {
  if (nodes.empty()) throw Error(std::string(what) + ": empty node list");
  std::unordered_set<int> seen;
  const int tnz = grid.total_nz();
  for (int node : nodes) {
    if (node < 0 || node >= grid.num_nodes())
      throw DimensionError(std::string(what) + ": node index out of range");
    if (!grid.is_physical(node / tnz, node % tnz))
      throw Error(std::string(what) + ": node lies in the absorbing pad");
    if (!seen.insert(node).second)
      throw Error(std::string(what) + ": duplicate node");
  }
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("data file: truncated");
  return v;
}

constexpr char kDataMagic[6] = {'I', 'R', 'W', 'D', 'A', 'T'};

}  // namespace

void AcquisitionGeometry::validate() const {
  check_nodes(grid, source_nodes, "sources");
  check_nodes(grid, receiver_nodes, "receivers");
}

SpMatR AcquisitionGeometry::phi() const {
  SpMatR out(grid.num_nodes(), num_sources());
  std::vector<TripletR> t;
  t.reserve(source_nodes.size());
  for (int i = 0; i < num_sources(); ++i)
    t.emplace_back(source_nodes[i], i, 1.0);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SpMatR AcquisitionGeometry::p() const {
  SpMatR out(num_receivers(), grid.num_nodes());
  std::vector<TripletR> t;
  t.reserve(receiver_nodes.size());
  for (int r = 0; r < num_receivers(); ++r)
    t.emplace_back(r, receiver_nodes[r], 1.0);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

CMat AcquisitionGeometry::apply_p(const CMat& u) const {
  if (u.rows() != grid.num_nodes())
    throw DimensionError("apply_p: field rows do not match grid");
  CMat out(num_receivers(), u.cols());
  for (int r = 0; r < num_receivers(); ++r)
    out.row(r) = u.row(receiver_nodes[r]);
  return out;
}

CMat AcquisitionGeometry::apply_p_transpose(const CMat& d) const {
  if (d.rows() != num_receivers())
    throw DimensionError("apply_p_transpose: data rows do not match receivers");
  CMat out = CMat::Zero(grid.num_nodes(), d.cols());
  for (int r = 0; r < num_receivers(); ++r)
    out.row(receiver_nodes[r]) = d.row(r);
  return out;
}

CMat AcquisitionGeometry::apply_phi(const CMat& s) const {
  if (s.rows() != num_sources())
    throw DimensionError("apply_phi: signature rows do not match sources");
  CMat out = CMat::Zero(grid.num_nodes(), s.cols());
  for (int i = 0; i < num_sources(); ++i) out.row(source_nodes[i]) = s.row(i);
  return out;
}

CMat AcquisitionGeometry::apply_phi_transpose(const CMat& y) const {
  if (y.rows() != grid.num_nodes())
    throw DimensionError("apply_phi_transpose: field rows do not match grid");
  CMat out(num_sources(), y.cols());
  for (int i = 0; i < num_sources(); ++i) out.row(i) = y.row(source_nodes[i]);
  return out;
}

CMat AcquisitionGeometry::apply_q(CMat y) const {
  if (y.rows() != grid.num_nodes())
    throw DimensionError("apply_q: field rows do not match grid");
  for (int node : source_nodes) y.row(node).setZero();
  return y;
}

CMat AcquisitionGeometry::apply_qi(CMat y, int i) const {
  if (y.rows() != grid.num_nodes())
    throw DimensionError("apply_qi: field rows do not match grid");
  y.row(source_nodes.at(i)).setZero();
  return y;
}

SpMat AcquisitionGeometry::ptp_diagonal() const {
  SpMat out(grid.num_nodes(), grid.num_nodes());
  std::vector<Triplet> t;
  t.reserve(receiver_nodes.size());
  for (int node : receiver_nodes) t.emplace_back(node, node, 1.0);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SpMat AcquisitionGeometry::q_diagonal() const {
  const int n = grid.num_nodes();
  std::unordered_set<int> src(source_nodes.begin(), source_nodes.end());
  SpMat out(n, n);
  std::vector<Triplet> t;
  t.reserve(n - src.size());
  for (int j = 0; j < n; ++j)
    if (!src.count(j)) t.emplace_back(j, j, 1.0);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SpMat AcquisitionGeometry::qi_diagonal(int i) const {
  const int n = grid.num_nodes();
  const int hole = source_nodes.at(i);
  SpMat out(n, n);
  std::vector<Triplet> t;
  t.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != hole) t.emplace_back(j, j, 1.0);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

AcquisitionGeometry make_geometry(
    const Grid2D& grid, const std::vector<std::pair<int, int>>& sources,
    const std::vector<std::pair<int, int>>& receivers) {
  auto to_nodes = [&](const std::vector<std::pair<int, int>>& pts) {
    std::vector<int> nodes;
    nodes.reserve(pts.size());
    for (auto [i, k] : pts) {
      if (i < 0 || i >= grid.nx || k < 0 || k >= grid.nz)
        throw Error("make_geometry: point outside the physical region");
      nodes.push_back(grid.physical_index(i, k));
    }
    return nodes;
  };
  AcquisitionGeometry g{grid, to_nodes(sources), to_nodes(receivers)};
  g.validate();
  return g;
}

Complex ricker_spectrum(double f_hz, double f_c_hz, double t0_s) {
  if (f_hz < 0.0) throw Error("ricker_spectrum: negative frequency");
  if (!(f_c_hz > 0.0))
    throw Error("ricker_spectrum: central frequency must be positive");
  constexpr double pi = std::numbers::pi;
  const double amp = 2.0 * f_hz * f_hz / (std::sqrt(pi) * std::pow(f_c_hz, 3)) *
                     std::exp(-f_hz * f_hz / (f_c_hz * f_c_hz));
  const double phase = -2.0 * pi * f_hz * t0_s;
  return amp * Complex(std::cos(phase), std::sin(phase));
}

CVec SignatureSet::at_frequency(double f_hz) const {
  if (f_c_hz.size() != t0_s.size())
    throw DimensionError("signature set: parameter lists differ in length");
  CVec out(num_sources());
  for (int i = 0; i < num_sources(); ++i)
    out[i] = ricker_spectrum(f_hz, f_c_hz[i], t0_s[i]);
  return out;
}

SignatureSet SignatureSet::random(int n_s, double fc_lo, double fc_hi,
                                  double t0_lo, double t0_hi,
                                  std::uint64_t seed) {
  if (n_s < 1) throw Error("signature set: need at least one source");
  Rng rng(seed);
  SignatureSet s;
  s.f_c_hz.reserve(n_s);
  s.t0_s.reserve(n_s);
  for (int i = 0; i < n_s; ++i) {
    s.f_c_hz.push_back(rng.uniform(fc_lo, fc_hi));
    s.t0_s.push_back(rng.uniform(t0_lo, t0_hi));
  }
  return s;
}

DataMatrix synthesize_data(const SquaredSlownessModel& m_true,
                           const AcquisitionGeometry& geometry,
                           const CVec& signatures, double frequency_hz,
                           StencilKind stencil) {
  if (signatures.size() != geometry.num_sources())
    throw DimensionError("synthesize_data: signature count != source count");
  if (!(frequency_hz > 0.0))
    throw Error("synthesize_data: frequency must be positive");
  const double omega = 2.0 * std::numbers::pi * frequency_hz;
  HelmholtzOperator a(m_true, omega, stencil);
  CMat rhs = geometry.apply_phi(CMat(signatures.asDiagonal()));
  Factorization f(a.matrix());
  const CMat u = f.solve_multi(rhs);
  DataMatrix d;
  d.frequency_hz = frequency_hz;
  d.values = geometry.apply_p(u);
  return d;
}

DataMatrix add_noise(const DataMatrix& clean, double target_snr_db,
                     std::uint64_t seed) {
  const double clean_rms =
      std::sqrt(clean.values.squaredNorm() / clean.values.size());
  if (!(clean_rms > 0.0)) throw Error("add_noise: data is identically zero");
  CMat noise(clean.values.rows(), clean.values.cols());
  Rng rng(seed);
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i)
      noise(i, j) = rng.complex_normal();
  const double noise_rms = std::sqrt(noise.squaredNorm() / noise.size());
  const double target_rms = clean_rms * std::pow(10.0, -target_snr_db / 20.0);
  DataMatrix out;
  out.frequency_hz = clean.frequency_hz;
  out.values = clean.values + (target_rms / noise_rms) * noise;
  out.snr_db = target_snr_db;
  return out;
}

void write_data_file(const std::filesystem::path& path,
                     const std::vector<DataMatrix>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("data file: cannot open " + path.string());
  out.write(kDataMagic, sizeof kDataMagic);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const DataMatrix& b : blocks) {
    put<double>(out, b.frequency_hz);
    put<double>(out, b.snr_db);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.values.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.values.cols()));
    for (Eigen::Index j = 0; j < b.values.cols(); ++j)
      for (Eigen::Index i = 0; i < b.values.rows(); ++i) {
        put<double>(out, b.values(i, j).real());
        put<double>(out, b.values(i, j).imag());
      }
  }
  if (!out) throw Error("data file: write failed for " + path.string());
}

std::vector<DataMatrix> read_data_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("data file: cannot open " + path.string());
  char magic[6];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDataMagic, sizeof magic) != 0)
    throw Error("data file: bad magic in " + path.string());
  if (get<std::uint16_t>(in) != 1)
    throw Error("data file: unsupported version in " + path.string());
  const auto count = get<std::uint32_t>(in);
  std::vector<DataMatrix> blocks(count);
  for (DataMatrix& b : blocks) {
    b.frequency_hz = get<double>(in);
    b.snr_db = get<double>(in);
    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    b.values.resize(rows, cols);
    for (std::uint32_t j = 0; j < cols; ++j)
      for (std::uint32_t i = 0; i < rows; ++i) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        b.values(i, j) = Complex(re, im);
      }
  }
  return blocks;
}

}  // namespace irwri
