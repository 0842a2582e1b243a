// End-to-end acceptance harness. Twelve checks run against analytic
// oracles, dense reference solves, and measured statistical trends; each
// prints one "AC<n> ... PASS/FAIL" line and the exit code is the number of
// failures. The statistical checks pin their seeds, so every run sees the
// same draws.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "irwri/acquisition.hpp"
#include "irwri/config.hpp"
#include "irwri/experiment.hpp"
#include "irwri/grid.hpp"
#include "irwri/helmholtz.hpp"
#include "irwri/irwri.hpp"
#include "irwri/linsolve.hpp"
#include "irwri/metrics.hpp"
#include "irwri/model_update.hpp"
#include "irwri/source_estimation.hpp"
#include "irwri/types.hpp"
#include "irwri/wavefield_recon.hpp"
#include "test_support.hpp"

using namespace irwri;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  std::string label;
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// Layered desk scene shared by the statistical checks: two compaction
// trends, an interface, and a slow lens, with a surface source line.
struct Desk {
  Grid2D grid;
  SquaredSlownessModel m_true;
  AcquisitionGeometry geom;
};

Desk make_desk(int nx, int nz, int n_s, int rec_per_row,
               const std::vector<int>& rec_rows) {
  Grid2D g(nx, nz, 25.0, 15.0, 10, true);
  RMat v = velocity_two_layer_lens(nz, nx, 1500.0, 2100.0, 2500.0, 3000.0,
                                   0.45, 400.0, 0.12);
  SquaredSlownessModel m = velocity_to_squared_slowness(g, v, 0.25);
  std::vector<std::pair<int, int>> src, rec;
  for (int ix : even_line(n_s, 1, nx - 2)) src.emplace_back(ix, 1);
  for (int row : rec_rows) {
    for (int ix : even_line(rec_per_row, 1, nx - 2)) rec.emplace_back(ix, row);
  }
  return Desk{g, m, make_geometry(g, src, rec)};
}

double avg_re(const CVec& s_true, const CVec& s_est) {
  RVec per = per_source_signature_re(CMat(s_true.transpose()),
                                     CMat(s_est.transpose()));
  return per.mean();
}

// ---------------------------------------------------------------- AC1
// Homogeneous full-space solve against the analytic line-source response
// (i/4) H0(omega r / c). A unit discrete source represents dx*dz times the
// continuous delta of the -delta convention, so u = -dx*dz*G at the nodes.
Outcome check_forward_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  const int n = 200;
  const double h = 10.0, c = 1500.0, f = 5.0, omega = kTwoPi * f;
  const double wavelength = c / f;
  Grid2D g(n, n, h, h, 20, false);
  SquaredSlownessModel m =
      velocity_to_squared_slowness(g, RMat::Constant(n, n, c), 0.1);
  const int is = 100, ks = 100;
  // Receiver ring at 620 m: two wavelengths (600 m) from the source and
  // 370 m >= one wavelength clear of the absorbing pads.
  std::vector<std::pair<int, int>> rec;
  for (int j = 0; j < 16; ++j) {
    const double th = kTwoPi * j / 16.0;
    rec.emplace_back(is + (int)std::lround(62.0 * std::cos(th)),
                     ks + (int)std::lround(62.0 * std::sin(th)));
  }
  AcquisitionGeometry geom = make_geometry(g, {{is, ks}}, rec);
  HelmholtzOperator a(m, omega, StencilKind::five_point);
  CMat u = Factorization(a.matrix()).solve_multi(
      geom.apply_phi(CMat::Identity(1, 1)));
  CMat ur = geom.apply_p(u);

  double worst_amp = 0.0, worst_ph_frac = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double rx = (rec[j].first - is) * h, rz = (rec[j].second - ks) * h;
    const double r = std::hypot(rx, rz);
    const Complex gref = greens_function_oracle(omega, c, r);
    const double amp_dev = std::abs(std::abs(ur(j, 0)) / (h * h * std::abs(gref)) - 1.0);
    const double ph = std::abs(
        std::remainder(std::arg(ur(j, 0)) - std::arg(-gref), kTwoPi));
    worst_amp = std::max(worst_amp, amp_dev);
    // 2% of the accumulated propagation phase omega r / c.
    worst_ph_frac = std::max(worst_ph_frac, ph / (0.02 * omega * r / c));
    (void)wavelength;
  }
  const double wall = seconds_since(t0);
  Outcome o;
  o.label = "forward field matches the analytic line-source response";
  o.pass = worst_amp <= 0.05 && worst_ph_frac <= 1.0 && wall < 10.0;
  o.detail = fmt("amp dev %.2e (<=0.05), phase %.0f%% of budget, %.1f s",
                 worst_amp, 100.0 * worst_ph_frac, wall);
  return o;
}

// ---------------------------------------------------------------- AC2
// With the true model and noise-free data all three estimators are exact.
Outcome check_exact_model_recovery() {
  auto t0 = std::chrono::steady_clock::now();
  Desk d = make_desk(80, 40, 8, 20, {2});
  SignatureSet sigs = SignatureSet::random(8, 4.0, 10.0, 0.1, 0.4, 42);
  const double f = 5.0;
  CVec s_true = sigs.at_frequency(f);
  CMat data = synthesize_data(d.m_true, d.geom, s_true, f,
                              StencilKind::five_point)
                  .values;
  HelmholtzOperator a(d.m_true, kTwoPi * f, StencilKind::five_point);
  const double lambda = default_lambda(a, d.geom);

  CMat st = s_true.transpose();
  double worst = 0.0;
  worst = std::max(worst,
                   per_source_signature_re(
                       st, CMat(estimate_conventional(a, d.geom, data)
                                    .diagonal()
                                    .transpose()))
                       .maxCoeff());
  worst = std::max(
      worst, per_source_signature_re(
                 st, CMat(estimate_separate(a, d.geom, data, lambda)
                              .s.diagonal()
                              .transpose()))
                 .maxCoeff());
  worst = std::max(worst,
                   per_source_signature_re(
                       st, CMat(estimate_joint(a, d.geom, data, lambda)
                                    .s_full.diagonal()
                                    .transpose()))
                       .maxCoeff());
  const double wall = seconds_since(t0);
  Outcome o;
  o.label = "all estimators recover signatures exactly at the true model";
  o.pass = worst < 1e-6 && wall < 5.0;
  o.detail = fmt("worst per-source RE %.2e (<1e-6), %.1f s", worst, wall);
  return o;
}

// ---------------------------------------------------------------- AC3
// The sparse projected solves must agree with dense QR on the stacked
// least-squares systems, duals included, on a grid small enough to stack.
Outcome check_stacked_least_squares() {
  Grid2D g(8, 5, 10.0, 10.0, 3, false);  // 14 x 11 = 154 padded nodes
  RMat v(5, 8);
  for (int k = 0; k < 5; ++k)
    for (int i = 0; i < 8; ++i)
      v(k, i) = 1800.0 + 125.0 * k + 90.0 * std::sin(0.7 * i + 0.3 * k);
  SquaredSlownessModel m = velocity_to_squared_slowness(g, v, 0.3);
  AcquisitionGeometry geom =
      make_geometry(g, {{2, 1}, {5, 2}}, {{1, 3}, {3, 1}, {4, 3}, {6, 2}, {7, 3}});
  const int n = g.num_nodes(), mr = geom.num_receivers();
  const double fhz = 20.0, lambda = 3e-4, rl = std::sqrt(lambda);
  HelmholtzOperator a(m, kTwoPi * fhz, StencilKind::five_point);
  CVec s_true = test::random_cvec(2, 31);
  CMat d = synthesize_data(m, geom, s_true, fhz, StencilKind::five_point).values;
  DualState duals = DualState::zero(g, mr, 2);
  duals.d_hat = 0.1 * test::random_cmat(mr, 2, 33);
  duals.b_hat = 0.05 * test::random_cmat(n, 2, 34);

  CMat pd = RMat(geom.p()).cast<Complex>();
  CMat ad = CMat(a.matrix());
  double worst = 0.0;

  SeparateResult sr = estimate_separate(a, geom, d, duals, lambda);
  for (int i = 0; i < 2; ++i) {
    CMat stacked = CMat::Zero(mr + n, n + 1);
    stacked.topLeftCorner(mr, n) = pd;
    stacked.bottomLeftCorner(n, n) = rl * ad;
    stacked(mr + geom.source_nodes[i], n) = -rl;
    CVec rhs(mr + n);
    rhs.head(mr) = d.col(i) + duals.d_hat.col(i);
    rhs.tail(n) = rl * duals.b_hat.col(i);
    LstsqResult ls = dense_lstsq(stacked, rhs);
    if (ls.rank_deficient) {
      return {"projected solves match dense stacked least squares", false,
              "separate oracle system rank deficient"};
    }
    worst = std::max(worst, (sr.u.col(i) - ls.x.head(n)).norm() /
                                ls.x.head(n).norm());
    worst = std::max(worst, std::abs(sr.s.values(i, i) - ls.x[n]) /
                                std::abs(ls.x[n]));
  }

  JointResult jr = estimate_joint(a, geom, d, duals, lambda, true);
  CMat qa = ad;
  for (int i = 0; i < 2; ++i) qa.row(geom.source_nodes[i]).setZero();
  CMat qb = geom.apply_q(duals.b_hat);
  CMat stacked(mr + n, n);
  stacked.topRows(mr) = pd;
  stacked.bottomRows(n) = rl * qa;
  CMat u_oracle(n, 2);
  for (int i = 0; i < 2; ++i) {
    CVec rhs(mr + n);
    rhs.head(mr) = d.col(i) + duals.d_hat.col(i);
    rhs.tail(n) = rl * qb.col(i);
    LstsqResult ls = dense_lstsq(stacked, rhs);
    if (ls.rank_deficient) {
      return {"projected solves match dense stacked least squares", false,
              "blended oracle system rank deficient"};
    }
    u_oracle.col(i) = ls.x;
    worst = std::max(worst, (jr.u.col(i) - ls.x).norm() / ls.x.norm());
  }
  CMat s_oracle =
      geom.apply_phi_transpose(CMat(ad * u_oracle - duals.b_hat));
  worst = std::max(worst,
                   (jr.s_full.values - s_oracle).norm() / s_oracle.norm());

  Outcome o;
  o.label = "projected solves match dense stacked least squares";
  o.pass = worst < 1e-8;
  o.detail = fmt("worst relative deviation %.2e (<1e-8)", worst);
  return o;
}

// ---------------------------------------------------------------- AC4
// The annihilator is an exact orthogonal projector in floating point (its
// entries are 0/1 gathers), and with one source the blended and per-source
// paths are the same problem.
Outcome check_projector_algebra() {
  Grid2D g(8, 5, 10.0, 10.0, 3, false);
  RMat v = RMat::Constant(5, 8, 2000.0);
  SquaredSlownessModel m = velocity_to_squared_slowness(g, v, 0.3);
  AcquisitionGeometry geom =
      make_geometry(g, {{2, 1}, {5, 2}, {6, 3}}, {{1, 3}, {3, 1}, {4, 3}});
  const int n = g.num_nodes();
  RMat phid = RMat(geom.phi());
  RMat q = RMat::Identity(n, n) - phid * phid.transpose();
  double exact = 0.0;
  exact = std::max(exact, (q * q - q).cwiseAbs().maxCoeff());
  exact = std::max(exact, (q.transpose() - q).cwiseAbs().maxCoeff());
  exact = std::max(exact, (q * phid).cwiseAbs().maxCoeff());
  for (int i = 0; i < geom.num_sources(); ++i) {
    RMat qi = RMat::Identity(n, n);
    qi(geom.source_nodes[i], geom.source_nodes[i]) = 0.0;
    exact = std::max(exact, (qi * qi - qi).cwiseAbs().maxCoeff());
    exact = std::max(exact, (qi.transpose() - qi).cwiseAbs().maxCoeff());
    exact = std::max(exact,
                     (qi * phid.col(i)).cwiseAbs().maxCoeff());
  }

  // Single source: Q_1 and Q coincide, so joint == separate.
  test::Scene scene = test::make_scene(13, 10, 1, 6);
  CVec s_true = test::random_cvec(1, 5);
  CMat d = synthesize_data(scene.model, scene.geometry, s_true, 5.0,
                           StencilKind::five_point)
               .values;
  HelmholtzOperator a(scene.model, kTwoPi * 5.0, StencilKind::five_point);
  const double lambda = 1e-3;
  JointResult j = estimate_joint(a, scene.geometry, d, lambda);
  SeparateResult s = estimate_separate(a, scene.geometry, d, lambda);
  const double du = (j.u - s.u).norm() / s.u.norm();
  const double ds = std::abs(j.s_full.values(0, 0) - s.s.values(0, 0)) /
                    std::abs(s.s.values(0, 0));

  Outcome o;
  o.label = "annihilator algebra and single-source equivalence";
  o.pass = exact == 0.0 && du < 1e-12 && ds < 1e-12;
  o.detail = fmt("projector residual %.1g (exact), joint-vs-separate %.1e",
                 exact, std::max(du, ds));
  return o;
}

// ---------------------------------------------------------------- AC5
// Factorizations per outer iteration: separate pays one per source, the
// blended algorithms pay 1 (no re-solve) or 2 (with re-solve), and the
// known-source update pays 1.
Outcome check_factorization_law() {
  const int n_s = 4;
  test::Scene scene = test::make_scene(14, 11, n_s, 8);
  SignatureSet sigs = SignatureSet::random(n_s, 3.5, 8.0, 0.1, 0.35, 7);
  const double f = 5.0;
  CMat d = synthesize_data(scene.model, scene.geometry, sigs.at_frequency(f),
                           f, StencilKind::five_point)
               .values;
  SquaredSlownessModel m_rough = smooth_model(scene.model, 60.0);
  HelmholtzOperator a(m_rough, kTwoPi * f, StencilKind::five_point);
  DualState z = DualState::zero(scene.grid, 8, n_s);
  const double lambda = 1e-3;
  RegularizerConfig reg{1e-6};

  auto cost = [&](AlgorithmKind alg) {
    const long before = counters().factor_count.load();
    switch (alg) {
      case AlgorithmKind::alg1:
        iterate_alg1(m_rough, a, scene.geometry, d, z, lambda, reg);
        break;
      case AlgorithmKind::alg2:
        iterate_alg2(m_rough, a, scene.geometry, d, z, lambda, reg);
        break;
      case AlgorithmKind::separate:
        iterate_separate(m_rough, a, scene.geometry, d, z, lambda, reg);
        break;
      case AlgorithmKind::known_source:
        iterate_known_source(m_rough, a, scene.geometry, d,
                             sigs.at_frequency(f), z, lambda, reg);
        break;
    }
    return counters().factor_count.load() - before;
  };
  const long c1 = cost(AlgorithmKind::alg1);
  const long c2 = cost(AlgorithmKind::alg2);
  const long cs = cost(AlgorithmKind::separate);
  const long ck = cost(AlgorithmKind::known_source);

  Outcome o;
  o.label = "factorization counts follow the per-iteration law";
  o.pass = c1 == 1 && c2 == 2 && cs == n_s && ck == 1;
  o.detail = fmt("alg1=%ld alg2=%ld separate=%ld known=%ld (want 1/2/%d/1)",
                 c1, c2, cs, ck, n_s);
  return o;
}

// ---------------------------------------------------------------- AC10
// At the true model every variant is a fixed point, and the reported
// multipliers are bit-identical to independently accumulated residual sums.
Outcome check_fixed_point_and_duals() {
  test::Scene scene = test::make_scene(16, 12, 3, 9);
  SignatureSet sigs = SignatureSet::random(3, 3.5, 8.0, 0.1, 0.35, 7);
  const double f = 5.0, omega = kTwoPi * f;
  CMat d = synthesize_data(scene.model, scene.geometry, sigs.at_frequency(f),
                           f, StencilKind::five_point)
               .values;
  HelmholtzOperator a0(scene.model, omega, StencilKind::five_point);
  const double lambda = default_lambda(a0, scene.geometry);
  RegularizerConfig reg{0.0};

  double worst_data = 0.0, worst_pde = 0.0;
  bool duals_exact = true;
  for (auto alg : {AlgorithmKind::alg1, AlgorithmKind::alg2,
                   AlgorithmKind::separate, AlgorithmKind::known_source}) {
    SquaredSlownessModel m = scene.model;
    DualState duals = DualState::zero(scene.grid, 9, 3);
    CMat exp_b = CMat::Zero(scene.grid.num_nodes(), 3);
    CMat exp_d = CMat::Zero(9, 3);
    for (int it = 0; it < 5; ++it) {
      HelmholtzOperator a(m, omega, StencilKind::five_point);
      IterationResult r = [&]() -> IterationResult {
        switch (alg) {
          case AlgorithmKind::alg1:
            return iterate_alg1(m, a, scene.geometry, d, duals, lambda, reg);
          case AlgorithmKind::alg2:
            return iterate_alg2(m, a, scene.geometry, d, duals, lambda, reg);
          case AlgorithmKind::separate:
            return iterate_separate(m, a, scene.geometry, d, duals, lambda,
                                    reg);
          default:
            return iterate_known_source(m, a, scene.geometry, d,
                                        sigs.at_frequency(f), duals, lambda,
                                        reg);
        }
      }();
      worst_data = std::max(worst_data, r.data_misfit / d.norm());
      worst_pde = std::max(worst_pde, r.pde_misfit / r.s_diag.norm());
      // Independent accumulation of Phi S - A(m_new) U and D - P U.
      CMat phis = scene.geometry.apply_phi(CMat(r.s_diag.asDiagonal()));
      exp_b += phis - r.a_new.apply_multi(r.u);
      exp_d += d - scene.geometry.apply_p(r.u);
      duals_exact = duals_exact && (r.duals.b_hat - exp_b).norm() == 0.0 &&
                    (r.duals.d_hat - exp_d).norm() == 0.0;
      m = r.m;
      duals = r.duals;
    }
  }

  Outcome o;
  o.label = "true-model fixed point and exact dual bookkeeping";
  o.pass = worst_data < 1e-6 && worst_pde < 1e-6 && duals_exact;
  o.detail = fmt("misfit/scale data %.1e pde %.1e (<1e-6), duals %s",
                 worst_data, worst_pde,
                 duals_exact ? "bit-exact" : "DIVERGED");
  return o;
}

// ---------------------------------------------------------------- AC12
// The quadratic model-subproblem gradient against central differences on
// random instances; the objective is quadratic so the step size only has
// to dodge cancellation.
Outcome check_model_gradient() {
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    test::Scene scene = test::make_scene(10, 10, 2, 5, 11 + inst);
    const Grid2D& g = scene.grid;
    HelmholtzOperator op(scene.model, kTwoPi * 4.0, StencilKind::five_point);
    std::vector<FrequencyTerm> terms(1);
    terms[0] = FrequencyTerm{
        &op, &scene.geometry, test::random_cmat(g.num_nodes(), 2, 100 + inst),
        test::random_cvec(2, 200 + inst),
        CMat(0.3 * test::random_cmat(g.num_nodes(), 2, 300 + inst))};
    RegularizerConfig reg{4e-3};
    const double lambda = 2e-2;
    RVec m = RVec::Constant(g.nx * g.nz, 2e-7);
    std::mt19937_64 rng(400 + inst);
    std::normal_distribution<double> dist;
    for (int i = 0; i < m.size(); ++i) m[i] += 1e-8 * dist(rng);
    RVec grad = model_objective_gradient(g, m, terms, lambda, reg);
    for (int trial = 0; trial < 3; ++trial) {
      RVec dir(m.size());
      for (int i = 0; i < dir.size(); ++i) dir[i] = dist(rng);
      dir.normalize();
      const double h = 1e-8;
      const double plus =
          model_objective(g, RVec(m + h * dir), terms, lambda, reg);
      const double minus =
          model_objective(g, RVec(m - h * dir), terms, lambda, reg);
      const double fd = (plus - minus) / (2.0 * h);
      const double an = grad.dot(dir);
      worst = std::max(worst, std::abs(fd - an) / std::abs(an));
    }
  }
  Outcome o;
  o.label = "model-subproblem gradient matches finite differences";
  o.pass = worst < 1e-5;
  o.detail = fmt("worst relative deviation %.2e (<1e-5)", worst);
  return o;
}

// ---------------------------------------------------------------- AC7
// Rough background: the blended estimate must not lose to the per-source
// one (medians over ten seeded draws). Accurate background: they agree.
Outcome check_joint_vs_separate() {
  Desk d = make_desk(120, 60, 12, 118, {2});
  const double f = 5.0;
  double med_j[2], med_s[2];
  const double radii[2] = {300.0, 50.0};
  for (int cs = 0; cs < 2; ++cs) {
    SquaredSlownessModel m0 = smooth_model(d.m_true, radii[cs]);
    HelmholtzOperator a(m0, kTwoPi * f, StencilKind::five_point);
    const double lambda = default_lambda(a, d.geom);
    std::vector<double> jr, sr;
    for (int seed = 100; seed < 110; ++seed) {
      SignatureSet sigs = SignatureSet::random(12, 4.0, 10.0, 0.1, 0.4, seed);
      CVec s_true = sigs.at_frequency(f);
      CMat data = synthesize_data(d.m_true, d.geom, s_true, f,
                                  StencilKind::five_point)
                      .values;
      sr.push_back(avg_re(
          s_true, estimate_separate(a, d.geom, data, lambda).s.diagonal()));
      jr.push_back(avg_re(
          s_true, estimate_joint(a, d.geom, data, lambda).s_full.diagonal()));
    }
    med_j[cs] = median(jr);
    med_s[cs] = median(sr);
  }
  const bool rough_ok = med_j[0] <= med_s[0];
  const double agree = std::abs(med_j[1] - med_s[1]) / med_s[1];
  Outcome o;
  o.label = "joint estimation beats separate on rough backgrounds";
  o.pass = rough_ok && agree <= 0.10;
  o.detail = fmt("rough joint %.4f vs sep %.4f; accurate gap %.2f%% (<=10%%)",
                 med_j[0], med_s[0], 100.0 * agree);
  return o;
}

// ---------------------------------------------------------------- AC8
// Noise/background sensitivity surface. Conventional deconvolution keys on
// the background (>5x across radii, <2x across SNR); the extended
// estimators key on noise (medians rise monotonically as SNR drops).
Outcome check_noise_surface() {
  auto t0 = std::chrono::steady_clock::now();
  Desk d = make_desk(100, 50, 6, 96, {2, 3, 4});
  const double f = 5.0;
  const std::vector<double> radii = {40.0, 300.0, 800.0};
  const std::vector<double> snrs = {40.0, 20.0, 10.0, 5.0};
  double med[3][4][3];
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    SquaredSlownessModel m0 = smooth_model(d.m_true, radii[ri]);
    HelmholtzOperator a(m0, kTwoPi * f, StencilKind::five_point);
    const double lambda = default_lambda(a, d.geom);
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      std::vector<double> rc, rs, rj;
      for (int seed = 0; seed < 5; ++seed) {
        SignatureSet sigs =
            SignatureSet::random(6, 4.0, 10.0, 0.1, 0.4, 500 + seed);
        CVec s_true = sigs.at_frequency(f);
        DataMatrix clean = synthesize_data(d.m_true, d.geom, s_true, f,
                                           StencilKind::five_point);
        DataMatrix noisy = add_noise(clean, snrs[si], 900 + seed);
        rc.push_back(avg_re(
            s_true, estimate_conventional(a, d.geom, noisy.values).diagonal()));
        rs.push_back(
            avg_re(s_true, estimate_separate(a, d.geom, noisy.values, lambda)
                               .s.diagonal()));
        rj.push_back(
            avg_re(s_true, estimate_joint(a, d.geom, noisy.values, lambda)
                               .s_full.diagonal()));
      }
      med[ri][si][0] = median(rc);
      med[ri][si][1] = median(rs);
      med[ri][si][2] = median(rj);
    }
  }
  double worst_snr_spread = 0.0;  // conventional, across SNR at fixed radius
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      lo = std::min(lo, med[ri][si][0]);
      hi = std::max(hi, med[ri][si][0]);
    }
    worst_snr_spread = std::max(worst_snr_spread, hi / lo);
  }
  double worst_radius_spread = 1e300;  // conventional, across radii
  for (std::size_t si = 0; si < snrs.size(); ++si) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      lo = std::min(lo, med[ri][si][0]);
      hi = std::max(hi, med[ri][si][0]);
    }
    worst_radius_spread = std::min(worst_radius_spread, hi / lo);
  }
  bool monotone = true;  // separate and joint medians rise as SNR drops
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    for (std::size_t si = 1; si < snrs.size(); ++si) {
      monotone = monotone && med[ri][si][1] > med[ri][si - 1][1] &&
                 med[ri][si][2] > med[ri][si - 1][2];
    }
  }
  const double wall = seconds_since(t0);
  Outcome o;
  o.label = "noise and background sensitivity trends";
  o.pass = worst_snr_spread < 2.0 && worst_radius_spread > 5.0 && monotone &&
           wall < 300.0;
  o.detail = fmt("conv spread: snr %.2f (<2), radius %.2f (>5); "
                 "monotone %s; %.0f s",
                 worst_snr_spread, worst_radius_spread,
                 monotone ? "yes" : "NO", wall);
  return o;
}

// ---------------------------------------------------------------- AC9
// More sources than receivers leaves the blended signature gather
// under-determined; the per-source path does not care.
Outcome check_source_count_instability() {
  const double f = 5.0;
  std::vector<double> j10, j30, s10, s30;
  bool flags_ok = true;
  for (int n_s : {10, 30}) {
    Desk d = make_desk(120, 60, n_s, 20, {2});
    SquaredSlownessModel m0 = smooth_model(d.m_true, 100.0);
    HelmholtzOperator a(m0, kTwoPi * f, StencilKind::five_point);
    const double lambda = default_lambda(a, d.geom);
    for (int seed = 300; seed < 305; ++seed) {
      SignatureSet sigs =
          SignatureSet::random(n_s, 4.0, 10.0, 0.1, 0.4, seed);
      CVec s_true = sigs.at_frequency(f);
      CMat data = synthesize_data(d.m_true, d.geom, s_true, f,
                                  StencilKind::five_point)
                      .values;
      JointResult j = estimate_joint(a, d.geom, data, lambda);
      flags_ok = flags_ok && (j.underdetermined == (n_s > 20));
      (n_s == 10 ? j10 : j30)
          .push_back(avg_re(s_true, j.s_full.diagonal()));
      (n_s == 10 ? s10 : s30)
          .push_back(avg_re(s_true,
                            estimate_separate(a, d.geom, data, lambda)
                                .s.diagonal()));
    }
  }
  const double jr = median(j30) / median(j10);
  const double sr = median(s30) / median(s10);
  Outcome o;
  o.label = "joint estimation destabilizes once sources outnumber receivers";
  o.pass = jr >= 3.0 && sr < 1.5 && sr > 1.0 / 1.5 && flags_ok;
  o.detail = fmt("joint RE ratio %.2f (>=3), separate %.2f (<1.5), flag %s",
                 jr, sr, flags_ok ? "set" : "MISSING");
  return o;
}

// ------------------------------------------------------- AC11 and AC6
// Full frequency-continuation inversion of the layered desk model, the
// three estimation-equipped algorithms against the known-source baseline,
// then the signature crosstalk before and after inversion.
struct InversionPair {
  Outcome parity;     // AC11
  Outcome crosstalk;  // AC6
};

InversionPair check_full_inversion() {
  auto t0 = std::chrono::steady_clock::now();
  const char* ini = R"(
[grid]
nx = 120
nz = 60
dx = 25
dz = 15
npml = 10
free_surface_top = true

[model]
kind = two_layer_lens

[start]
kind = smooth
smoothing_radius_m = 300

[acquisition]
num_sources = 12
source_iz = 1
num_receivers = 118
receiver_iz = 2
margin_nodes = 1

[signatures]
seed = 7

[invert]
algorithm = alg2
paths = 3:6, 3:7.5, 3:10
freq_step = 0.5
max_outer = 10
)";
  ConfigMap cfg = ConfigMap::parse_string(ini);
  ExperimentSetup setup = setup_from_config(cfg);
  InversionConfig base = inversion_from_config(cfg);
  std::vector<double> freqs;
  for (const auto& path : base.paths)
    for (const auto& batch : path)
      for (double f : batch) freqs.push_back(f);
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  std::vector<DataMatrix> data = synthesize_blocks(setup, freqs);

  InversionResult res[3];
  const AlgorithmKind kinds[3] = {AlgorithmKind::known_source,
                                  AlgorithmKind::alg2, AlgorithmKind::alg1};
  {
    std::vector<std::thread> pool;
    for (int i = 0; i < 3; ++i) {
      pool.emplace_back([&, i] {
        InversionConfig c = base;
        c.algorithm = kinds[i];
        res[i] = run_inversion(c, data, setup.geometry, setup.m_start,
                               &setup.signatures, &setup.m_true);
      });
    }
    for (auto& t : pool) t.join();
  }
  const double wall = seconds_since(t0);
  const double re0 = model_re(setup.m_true, setup.m_start);
  const double re_ks = model_re(setup.m_true, res[0].model);
  const double re_a2 = model_re(setup.m_true, res[1].model);
  const double re_a1 = model_re(setup.m_true, res[2].model);
  const bool completed =
      !res[0].diverged && !res[1].diverged && !res[2].diverged;

  InversionPair out;
  out.parity.label = "frequency-continuation inversion parity";
  out.parity.pass = completed && re_ks <= 0.5 * re0 && re_a2 <= 0.5 * re0 &&
                    std::abs(re_a2 - re_ks) <= 0.20 * re_ks && re_a1 < re0 &&
                    wall < 900.0;
  out.parity.detail =
      fmt("RE %.4f -> known %.4f / alg2 %.4f / alg1 %.4f, %.0f s", re0,
          re_ks, re_a2, re_a1, wall);

  // Crosstalk of the gathered signature matrix at the lowest scheduled
  // frequency: visible at the smooth start, gone in the inverted model.
  const CMat* d3 = nullptr;
  for (const DataMatrix& b : data)
    if (b.frequency_hz == 3.0) d3 = &b.values;
  double rough_ratio = 1e300, final_ratio = 1e300;
  if (d3 != nullptr) {
    HelmholtzOperator a_rough(setup.m_start, kTwoPi * 3.0,
                              StencilKind::five_point);
    rough_ratio =
        estimate_joint(a_rough, setup.geometry, *d3,
                       default_lambda(a_rough, setup.geometry))
            .s_full.off_diagonal_ratio();
    HelmholtzOperator a_final(res[1].model, kTwoPi * 3.0,
                              StencilKind::five_point);
    final_ratio =
        estimate_joint(a_final, setup.geometry, *d3,
                       default_lambda(a_final, setup.geometry))
            .s_full.off_diagonal_ratio();
  }
  out.crosstalk.label = "signature crosstalk collapses as the model converges";
  out.crosstalk.pass =
      rough_ratio < 0.05 && rough_ratio > 0.0 && final_ratio < 1e-3;
  out.crosstalk.detail = fmt("off/diag %.2e rough (<0.05), %.2e final (<1e-3)",
                             rough_ratio, final_ratio);
  return out;
}

}  // namespace

int main() {
  Outcome results[13];
  auto guard = [&](int id, auto&& fn) {
    std::fprintf(stderr, "[acceptance] running AC%d...\n", id);
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id].pass = false;
      results[id].detail = std::string("exception: ") + e.what();
    }
  };

  guard(1, check_forward_oracle);
  guard(2, check_exact_model_recovery);
  guard(3, check_stacked_least_squares);
  guard(4, check_projector_algebra);
  guard(5, check_factorization_law);
  guard(12, check_model_gradient);
  guard(10, check_fixed_point_and_duals);
  guard(8, check_noise_surface);
  guard(7, check_joint_vs_separate);
  guard(9, check_source_count_instability);
  std::fprintf(stderr, "[acceptance] running AC11 + AC6...\n");
  try {
    InversionPair pair = check_full_inversion();
    results[11] = pair.parity;
    results[6] = pair.crosstalk;
  } catch (const std::exception& e) {
    results[11].pass = results[6].pass = false;
    results[11].detail = results[6].detail =
        std::string("exception: ") + e.what();
  }

  static const char* kLabels[13] = {
      nullptr,
      "forward field matches the analytic line-source response",
      "all estimators recover signatures exactly at the true model",
      "projected solves match dense stacked least squares",
      "annihilator algebra and single-source equivalence",
      "factorization counts follow the per-iteration law",
      "signature crosstalk collapses as the model converges",
      "joint estimation beats separate on rough backgrounds",
      "noise and background sensitivity trends",
      "joint estimation destabilizes once sources outnumber receivers",
      "true-model fixed point and exact dual bookkeeping",
      "frequency-continuation inversion parity",
      "model-subproblem gradient matches finite differences",
  };
  int failures = 0;
  for (int id = 1; id <= 12; ++id) {
    const Outcome& o = results[id];
    const char* label = o.label.empty() ? kLabels[id] : o.label.c_str();
    std::printf("AC%-2d %-62s %s%s%s%s\n", id, label,
                o.pass ? "PASS" : "FAIL", o.detail.empty() ? "" : "  (",
                o.detail.c_str(), o.detail.empty() ? "" : ")");
    failures += o.pass ? 0 : 1;
  }
  if (failures) std::printf("%d of 12 acceptance checks failed\n", failures);
  return failures;
}
