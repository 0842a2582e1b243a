#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "irwri/acquisition.hpp"
#include "irwri/linsolve.hpp"
#include "irwri/metrics.hpp"
#include "test_support.hpp"

using namespace irwri;
namespace fs = std::filesystem;

TEST_SUITE("acquisition") {

TEST_CASE("geometry rejects duplicates and pad or out of range points") {
  Grid2D g(10, 8, 10.0, 10.0, 3, false);
  std::vector<std::pair<int, int>> rec = {{1, 6}, {4, 6}};
  CHECK_NOTHROW(make_geometry(g, {{2, 1}, {5, 1}}, rec));
  CHECK_THROWS_AS(make_geometry(g, {{2, 1}, {2, 1}}, rec), Error);
  CHECK_THROWS_AS(make_geometry(g, {{-1, 1}}, rec), Error);
  CHECK_THROWS_AS(make_geometry(g, {{10, 1}}, rec), Error);
  CHECK_THROWS_AS(make_geometry(g, {{2, 8}}, rec), Error);
  CHECK_THROWS_AS(make_geometry(g, {}, rec), Error);

  // Hand-built geometry with a node inside the absorbing pad.
  AcquisitionGeometry bad{g, {g.index(0, g.phys_iz0())}, {g.physical_index(1, 6)}};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("selection operators have orthonormal rows and columns") {
  auto sc = test::make_scene(12, 10, 4, 7);
  RMat phi = RMat(sc.geometry.phi());
  RMat p = RMat(sc.geometry.p());
  REQUIRE(phi.rows() == sc.grid.num_nodes());
  REQUIRE(phi.cols() == 4);
  REQUIRE(p.rows() == 7);

  RMat ptp = phi.transpose() * phi;  // n_s x n_s
  CHECK((ptp - RMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  RMat ppt = p * p.transpose();  // M x M
  CHECK((ppt - RMat::Identity(7, 7)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("source complement projector is an orthogonal projector") {
  auto sc = test::make_scene(10, 9, 3, 5);
  int n = sc.grid.num_nodes();
  SpMat q = sc.geometry.q_diagonal();
  CHECK((SpMat(q * q) - q).norm() == 0.0);
  CHECK((SpMat(q.transpose()) - q).norm() == 0.0);

  // Q annihilates source columns and leaves rank N - n_s behind. Q is a
  // 0/1 diagonal, so its trace counts its rank.
  CMat phic = RMat(sc.geometry.phi()).cast<Complex>();
  CMat qphi = q * phic;
  CHECK(qphi.norm() == 0.0);
  Complex tr = 0.0;
  for (int k = 0; k < q.outerSize(); ++k)
    for (SpMat::InnerIterator it(q, k); it; ++it)
      if (it.row() == it.col()) tr += it.value();
  CHECK(tr.real() == double(n - 3));

  SpMat qi = sc.geometry.qi_diagonal(1);
  CHECK((SpMat(qi * qi) - qi).norm() == 0.0);
  CVec e = CVec::Zero(n);
  e[sc.geometry.source_nodes[1]] = 1.0;
  CHECK((qi * e).norm() == 0.0);
}

TEST_CASE("apply helpers agree with the assembled operators") {
  auto sc = test::make_scene(11, 9, 3, 6);
  int n = sc.grid.num_nodes();
  CMat u = test::random_cmat(n, 3, 51);
  CMat d = test::random_cmat(6, 3, 52);
  CMat s = test::random_cmat(3, 3, 53);
  CMat y = test::random_cmat(n, 3, 54);

  CMat p_dense = RMat(sc.geometry.p()).cast<Complex>();
  CMat phi_dense = RMat(sc.geometry.phi()).cast<Complex>();

  CHECK((sc.geometry.apply_p(u) - p_dense * u).norm() == 0.0);
  CHECK((sc.geometry.apply_p_transpose(d) - p_dense.transpose() * d).norm() ==
        0.0);
  CHECK((sc.geometry.apply_phi(s) - phi_dense * s).norm() == 0.0);
  CHECK((sc.geometry.apply_phi_transpose(y) - phi_dense.transpose() * y)
            .norm() == 0.0);
  CMat q_dense = CMat::Identity(n, n) - phi_dense * phi_dense.transpose();
  CHECK((sc.geometry.apply_q(y) - q_dense * y).norm() < 1e-15 * y.norm());

  // apply_qi zeroes exactly one row.
  CMat yq = sc.geometry.apply_qi(y, 2);
  CHECK(yq.row(sc.geometry.source_nodes[2]).norm() == 0.0);
  yq.row(sc.geometry.source_nodes[2]) = y.row(sc.geometry.source_nodes[2]);
  CHECK((yq - y).norm() == 0.0);
}

TEST_CASE("ricker spectrum vanishes at dc and peaks at the center frequency") {
  CHECK(std::abs(ricker_spectrum(0.0, 8.0, 0.3)) == 0.0);
  CHECK_THROWS_AS(ricker_spectrum(-1.0, 8.0, 0.0), Error);
  CHECK_THROWS_AS(ricker_spectrum(5.0, 0.0, 0.0), Error);

  // Zero delay: the spectrum is real and positive.
  Complex w = ricker_spectrum(6.0, 8.0, 0.0);
  CHECK(w.imag() == 0.0);
  CHECK(w.real() > 0.0);

  // |W| is maximal at f = fc on a fine scan.
  double peak_f = 0.0, peak = -1.0;
  for (double f = 0.5; f <= 30.0; f += 0.05) {
    double a = std::abs(ricker_spectrum(f, 8.0, 0.17));
    if (a > peak) peak = a, peak_f = f;
  }
  CHECK(peak_f == doctest::Approx(8.0).epsilon(0.01));

  // Delay shows up as pure phase, linear in frequency.
  Complex delayed = ricker_spectrum(6.0, 8.0, 0.25);
  CHECK(std::abs(delayed) == doctest::Approx(std::abs(w)).epsilon(1e-12));
  // f * t0 = 1.5 lands the phase exactly on the branch cut, so compare the
  // wrapped difference instead of the raw angles.
  double expected_phase = -2.0 * std::numbers::pi * 6.0 * 0.25;
  CHECK(std::abs(std::remainder(std::arg(delayed) - expected_phase,
                                2.0 * std::numbers::pi)) < 1e-9);
}

TEST_CASE("random signature sets are reproducible per seed") {
  SignatureSet a = SignatureSet::random(6, 4.0, 10.0, 0.1, 0.4, 99);
  SignatureSet b = SignatureSet::random(6, 4.0, 10.0, 0.1, 0.4, 99);
  SignatureSet c = SignatureSet::random(6, 4.0, 10.0, 0.1, 0.4, 100);
  CHECK(a.f_c_hz == b.f_c_hz);
  CHECK(a.t0_s == b.t0_s);
  CHECK(a.f_c_hz != c.f_c_hz);
  for (double fc : a.f_c_hz) {
    CHECK(fc >= 4.0);
    CHECK(fc <= 10.0);
  }
  CVec s = a.at_frequency(5.0);
  CHECK(s.size() == 6);
  CHECK(s[0] == ricker_spectrum(5.0, a.f_c_hz[0], a.t0_s[0]));
}

TEST_CASE("synthesized data is linear in the signatures") {
  auto sc = test::make_scene(16, 12, 3, 8);
  SignatureSet sig = SignatureSet::random(3, 4.0, 9.0, 0.1, 0.3, 7);
  CVec s = sig.at_frequency(5.0);
  DataMatrix d1 = synthesize_data(sc.model, sc.geometry, s, 5.0,
                                  StencilKind::five_point);
  DataMatrix d2 = synthesize_data(sc.model, sc.geometry, CVec(2.0 * s), 5.0,
                                  StencilKind::five_point);
  CHECK(d1.frequency_hz == 5.0);
  CHECK(d1.values.rows() == 8);
  CHECK(d1.values.cols() == 3);
  CHECK((d2.values - 2.0 * d1.values).norm() < 1e-12 * d1.values.norm());

  DataMatrix dz = synthesize_data(sc.model, sc.geometry, CVec(CVec::Zero(3)),
                                  5.0, StencilKind::five_point);
  CHECK(dz.values.norm() == 0.0);
}

TEST_CASE("synthesized data obeys source receiver reciprocity") {
  // Same physical node pair used as (source, receiver) and then swapped:
  // with unit signatures the two traces coincide because the operator is
  // complex symmetric.
  Grid2D g(20, 16, 15.0, 15.0, 8, false);
  SquaredSlownessModel m = velocity_to_squared_slowness(
      g, test::random_velocity(16, 20, 1900.0, 2600.0, 13), 0.2);
  std::pair<int, int> pa{4, 3}, pb{14, 11};
  CVec one = CVec::Ones(1);
  DataMatrix fwd = synthesize_data(m, make_geometry(g, {pa}, {pb}), one, 6.0,
                                   StencilKind::five_point);
  DataMatrix rev = synthesize_data(m, make_geometry(g, {pb}, {pa}), one, 6.0,
                                   StencilKind::five_point);
  CHECK(std::abs(fwd.values(0, 0) - rev.values(0, 0)) <
        1e-10 * std::abs(fwd.values(0, 0)));
}

TEST_CASE("noise injection hits the requested snr exactly") {
  auto sc = test::make_scene(14, 10, 4, 9);
  SignatureSet sig = SignatureSet::random(4, 4.0, 9.0, 0.1, 0.3, 3);
  DataMatrix clean = synthesize_data(sc.model, sc.geometry,
                                     sig.at_frequency(5.0), 5.0,
                                     StencilKind::five_point);
  for (double snr : {5.0, 10.0, 20.0, 40.0}) {
    DataMatrix noisy = add_noise(clean, snr, 31);
    CHECK(noisy.snr_db == snr);
    CHECK(data_snr_db(clean, noisy) == doctest::Approx(snr).epsilon(1e-9));
  }

  // 300 dB is numerically clean data.
  DataMatrix silent = add_noise(clean, 300.0, 31);
  CHECK((silent.values - clean.values).norm() < 1e-14 * clean.values.norm());

  // Different seeds draw different noise.
  DataMatrix n1 = add_noise(clean, 20.0, 1), n2 = add_noise(clean, 20.0, 2);
  CHECK((n1.values - n2.values).norm() > 0.0);

  DataMatrix zero;
  zero.frequency_hz = 5.0;
  zero.values = CMat::Zero(4, 4);
  CHECK_THROWS_AS(add_noise(zero, 20.0, 1), Error);
}

TEST_CASE("data files roundtrip every block field") {
  auto p = fs::temp_directory_path() / "irwri_data_rt.irwdat";
  std::vector<DataMatrix> blocks(2);
  blocks[0].frequency_hz = 3.5;
  blocks[0].values = test::random_cmat(5, 3, 61);
  blocks[1].frequency_hz = 7.0;
  blocks[1].values = test::random_cmat(5, 3, 62);
  blocks[1].snr_db = 20.0;
  write_data_file(p, blocks);
  auto back = read_data_file(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].frequency_hz == 3.5);
  CHECK(std::isinf(back[0].snr_db));
  CHECK((back[0].values - blocks[0].values).norm() == 0.0);
  CHECK(back[1].snr_db == 20.0);
  CHECK((back[1].values - blocks[1].values).norm() == 0.0);
  fs::remove(p);

  CHECK_THROWS_AS(read_data_file(fs::temp_directory_path() / "missing.irwdat"),
                  Error);
}

}  // TEST_SUITE
