#include <cmath>
#include <vector>

#include "doctest.h"
#include "qbmm/closures.hpp"
#include "qbmm/error.hpp"
#include "qbmm/moments.hpp"
#include "qbmm/scheme.hpp"
#include "support/oracles.hpp"

using namespace qbmm;
using doctest::Approx;

namespace {

void check_error(ErrorCode code, auto&& fn) {
  try {
    fn();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

GridState uniform_grid(int n, const MomentVec& M) {
  GridState g(n, -1.0, 1.0);
  for (auto& c : g.interior()) c = M;
  return g;
}

MomentVec reflect(const MomentVec& M) { return {{M[0], -M[1], M[2], -M[3], M[4]}}; }

SchemeConfig config(Closure c, SourceMode mode, double tau, BoundarySpec bc) {
  SchemeConfig cfg;
  cfg.closure.kind = c;
  cfg.source.mode = mode;
  cfg.source.tau = tau;
  cfg.bc = bc;
  return cfg;
}

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("van_albada_slope") {
  const double dx = 0.1, d = 0.7;
  const MomentVec c{{1, 2, 3, 4, 5}};
  const Vec5 dv{{d, d, d, d, d}};
  Vec5 s = van_albada_slope(c - dx * dv, c, c + dx * dv, dx);
  for (std::size_t k = 0; k < 5; ++k) CHECK(s[k] == Approx(d).epsilon(1e-14));

  s = van_albada_slope(c - dx * dv, c, c - dx * dv, dx);
  for (std::size_t k = 0; k < 5; ++k) CHECK(s[k] == 0.0);

  const double eps = 3 * dx;
  s = van_albada_slope(c, c, c + dx * dv, dx);
  CHECK(s[0] == Approx(d * eps / (d * d + 2 * eps)).epsilon(1e-14));
}

TEST_CASE("characteristic slope reproduces linear data and falls back on repeated eigenvalues") {
  const MomentVec M = hyqmom_forward({0.8, 1, 0.8, 2, 1, 0});
  const auto lam = hyqmom_eigenvalues(M);
  REQUIRE(lam);
  const double dx = 0.01;
  const Vec5 d{{0.1, -0.2, 0.3, 0.1, -0.5}};
  const auto s = characteristic_van_albada_slope(M - dx * d, M, M + dx * d, dx, *lam);
  REQUIRE(s);
  for (std::size_t k = 0; k < 5; ++k) CHECK((*s)[k] == Approx(d[k]).epsilon(1e-10).scale(1));
  CHECK_FALSE(characteristic_van_albada_slope(M, M, M, dx, {0, 0, 1, 2, 3}));
}

TEST_CASE("reconstruct_faces") {
  GridState g = uniform_grid(8, {{1, 0, 1, 0, 3}});
  apply_bc(g, BoundarySpec::periodic());
  FaceStates f = reconstruct_faces(g);
  for (int c = 0; c < 8; ++c) {
    CHECK(f.lo[static_cast<std::size_t>(c + 1)] == g[c]);
    CHECK(f.hi[static_cast<std::size_t>(c + 1)] == g[c]);
  }

  // linear M0: with equal one-sided slopes the limiter returns the exact slope
  GridState lin(8, 0.0, 1.0);
  for (int i = -2; i < 10; ++i) lin[i] = {{lin.x_center(i), 0, 1, 0, 3}};
  f = reconstruct_faces(lin);
  for (int c = 0; c < 8; ++c) {
    CHECK(f.lo[static_cast<std::size_t>(c + 1)][0] == Approx(lin.x_center(c) - lin.dx() / 2));
    CHECK(f.hi[static_cast<std::size_t>(c + 1)][0] == Approx(lin.x_center(c) + lin.dx() / 2));
  }

  // mean identity on a random field, for both slope variants
  oracle::Rng rng(31);
  GridState r(16, 0.0, 1.0);
  for (int i = -2; i < 18; ++i) r[i] = oracle::random_mixture(rng);
  for (auto vars : {SlopeVariables::Conserved, SlopeVariables::Characteristic}) {
    f = reconstruct_faces(r, {Closure::Hyqmom}, vars);
    for (int c = 0; c < 16; ++c) {
      const auto idx = static_cast<std::size_t>(c + 1);
      const MomentVec mean = 0.5 * (f.lo[idx] + f.hi[idx]);
      for (std::size_t k = 0; k < 5; ++k)
        CHECK(mean[k] == Approx(r[c][k]).epsilon(1e-14).scale(1));
    }
  }
}

TEST_CASE("realizability_limit") {
  const MomentVec avg{{1, 0, 1, 0, 3}};
  LimitResult r = realizability_limit(maxwellian_moments(1, 0.1, 1), maxwellian_moments(1, -0.1, 1),
                                      avg);
  CHECK(r.theta == 1.0);
  CHECK(r.minus == maxwellian_moments(1, 0.1, 1));

  r = realizability_limit(avg, avg, avg);
  CHECK(r.theta == 1.0);

  // z(theta) = 2 - 2.5 theta on the left face
  const MomentVec lo{{1, 0, 1, 0, 0.5}};
  r = realizability_limit(lo, 2.0 * avg - lo, avg);
  CHECK(r.theta <= 0.8);
  CHECK(r.theta == Approx(0.8).epsilon(1e-10));
  CHECK(is_strictly_realizable(r.minus));
  CHECK(is_strictly_realizable(r.plus));

  check_error(ErrorCode::CellAvgNotRealizable, [] {
    realizability_limit({{1, 0, 1, 0, 0.5}}, {{1, 0, 1, 0, 0.5}}, {{1, 0, 1, 0, 0.5}});
  });
  // a boundary average admits only the constant reconstruction
  const MomentVec edge{{1, 0, 1, 0, 1}};
  r = realizability_limit(edge + MomentVec{{0, 0.1, 0, 0, 0}}, edge - MomentVec{{0, 0.1, 0, 0, 0}},
                          edge);
  CHECK(r.theta == 0.0);
  CHECK(r.minus == edge);
}

TEST_CASE("hll_flux") {
  const ClosureSpec node_speeds{Closure::Hyqmom, kDefaultA, false};
  const MomentVec M{{1, 1, 4.0 / 3, 2, 10.0 / 3}};
  for (const ClosureSpec& spec : {node_speeds, ClosureSpec{Closure::Hyqmom},
                                  ClosureSpec{Closure::Eqmom}}) {
    const HllResult r = hll_flux(M, M, spec);
    const Vec5 F = physical_flux(close_state(spec, M));
    for (std::size_t k = 0; k < 5; ++k) CHECK(r.flux[k] == Approx(F[k]).epsilon(1e-14));
  }

  // all speeds nonnegative: upwind flux
  const MomentVec A = hyqmom_forward({0.2, 0.5, 0.3, 1, 2, 3});
  const MomentVec B = hyqmom_forward({0.3, 0.4, 0.3, 1.5, 2, 2.5});
  const HllResult up = hll_flux(A, B, node_speeds);
  const Vec5 FA = physical_flux(close_state(node_speeds, A));
  for (std::size_t k = 0; k < 5; ++k) CHECK(up.flux[k] == Approx(FA[k]).epsilon(1e-13));

  // reflected pair with node speeds
  const HllResult s = hll_flux(M, reflect(M), node_speeds);
  CHECK(s.speeds.minus == Approx(-2.0));
  CHECK(s.speeds.plus == Approx(2.0));
  const double expect[5] = {0, 10.0 / 3, 0, 22.0 / 3, 0};
  for (std::size_t k = 0; k < 5; ++k) CHECK(s.flux[k] == Approx(expect[k]).epsilon(1e-13).scale(1));
}

TEST_CASE("hll_flux is consistent under shrinking perturbations") {
  for (Closure c : {Closure::Eqmom, Closure::Hyqmom}) {
    const ClosureSpec spec{c};
    const MomentVec M = eqmom_forward({1, 0.5, 0.8, -0.6, 0.7});
    const Vec5 F = physical_flux(close_state(spec, M));
    double prev = kInfinity;
    for (double h = 1e-2; h >= 1e-8; h /= 10) {
      const MomentVec N = M + h * MomentVec{{0.3, -0.2, 0.5, 0.4, 1.0}};
      const Vec5 G = hll_flux(M, N, spec).flux;
      double err = 0;
      for (std::size_t k = 0; k < 5; ++k) err = std::max(err, std::abs(G[k] - F[k]));
      CHECK(err < prev);
      CHECK(err < 50 * h);
      prev = err;
    }
  }
}

TEST_CASE("bgk_source") {
  const Vec5 z = bgk_source({{1, 0, 1, 0, 3}}, 0.3);
  for (std::size_t k = 0; k < 5; ++k) CHECK(z[k] == 0.0);
  const Vec5 s = bgk_source({{1, 0, 1, 0, 4}}, 1.0);
  CHECK(s == Vec5{{0, 0, 0, 0, -1}});
  const Vec5 c = bgk_source({{1, 0, 1, 0, 4}}, kInfinity);
  for (std::size_t k = 0; k < 5; ++k) CHECK(c[k] == 0.0);
  check_error(ErrorCode::NonpositiveTheta, [] { bgk_source({{1, 1, 1, 1, 1}}, 1.0); });
}

TEST_CASE("mu_star") {
  CHECK(mu_star({{1, 0, 1, 0, 4}}, {{0, 0, 0, 0, -1}}) == Approx(3.0));
  CHECK(mu_star({{1, 0, 1, 0, 4}}, {{0, 0, 0, 0, 0}}) == kInfinity);
  const MomentVec M{{1, 0, 1, 0, 3}};
  const Vec5 S{{0, 0, 0, 1, 0}};
  const auto q = mu_star_coefficients(M, S);
  CHECK(q.a0 == -1.0);
  CHECK(q.a1 == 0.0);
  CHECK(q.a2 == Approx(2.0));
  const double mu = mu_star(M, S);
  CHECK(mu == Approx(std::sqrt(2.0)));
  CHECK(oracle::det3(oracle::hankel_of(M + (mu * 0.999) * S)) > 0);
  CHECK(oracle::det3(oracle::hankel_of(M + (mu * 1.001) * S)) < 0);

  check_error(ErrorCode::NotRealizable,
              [] { mu_star({{1, 0, 1, 0, 1}}, {{0, 0, 0, 0, -1}}); });
}

TEST_CASE("mu_star of the BGK source exceeds tau") {
  // M + tau S is the local Maxwellian, which is strictly realizable
  oracle::Rng rng(32);
  for (int n = 0; n < 2000; ++n) {
    const MomentVec M = oracle::random_mixture(rng);
    const double tau = rng.uniform(1e-3, 2.0);
    CHECK(mu_star(M, bgk_source(M, tau)) >= tau * (1 - 1e-12));
  }
}

TEST_CASE("cfl_dt") {
  const std::vector<WaveSpeedPair> speeds{{-3, 3}, {-1, 2}, {-2, 1}};
  CHECK(cfl_dt(speeds, {}, 0.01, SourceMode::Collisionless, 0.5) == Approx(5.0 / 6 * 1e-3));
  CHECK(cfl_dt(speeds, {}, 0.01, SourceMode::SemiImplicitBGK, 0.5) == Approx(5.0 / 6 * 1e-3));
  const std::vector<double> mu{1e-3, 1.0};
  const double dt = cfl_dt(speeds, mu, 0.01, SourceMode::ExplicitBGK, 0.5);
  CHECK(dt * (600 + 1000) == Approx(0.5 * kExplicitSourceSafety));
  CHECK(dt == Approx(3.12e-4).epsilon(1e-3));
  const std::vector<WaveSpeedPair> zero{{0, 0}, {0, 0}};
  check_error(ErrorCode::ZeroSpread,
              [&] { cfl_dt(zero, {}, 0.01, SourceMode::Collisionless, 0.5); });

  // widened zero speeds keep the spread positive
  const MomentVec rest = hyqmom_forward({1, 0, 0, 0, 0, 0});
  const HllResult r = hll_flux(rest, rest, {Closure::Hyqmom});
  CHECK(r.speeds.plus - r.speeds.minus >= 2 * kZeroSpreadWidening);
}

TEST_CASE("apply_bc") {
  GridState g(6, 0.0, 1.0);
  for (int i = 0; i < 6; ++i) g[i] = maxwellian_moments(1 + i, 0, 1);
  apply_bc(g, BoundarySpec::periodic());
  CHECK(g[-1] == g[5]);
  CHECK(g[-2] == g[4]);
  CHECK(g[6] == g[0]);
  CHECK(g[7] == g[1]);

  apply_bc(g, BoundarySpec::outflow());
  CHECK(g[-1] == g[0]);
  CHECK(g[-2] == g[0]);
  CHECK(g[7] == g[5]);

  const MomentVec in{{2, 1, 3, 2, 9}};
  apply_bc(g, {{BcKind::Inflow, in}, {BcKind::Outflow, {}}});
  CHECK(g[-1] == in);
  CHECK(g[-2] == in);
  CHECK(g[6] == g[5]);

  check_error(ErrorCode::ValidationError,
              [&] { apply_bc(g, {{BcKind::Periodic, {}}, {BcKind::Outflow, {}}}); });
}

TEST_CASE("uniform Maxwellian is a steady state in every mode") {
  const MomentVec M = maxwellian_moments(1.2, 0.4, 0.8);
  for (Closure c : {Closure::Eqmom, Closure::Hyqmom})
    for (SourceMode mode :
         {SourceMode::Collisionless, SourceMode::ExplicitBGK, SourceMode::SemiImplicitBGK}) {
      const SchemeConfig cfg =
          config(c, mode, mode == SourceMode::Collisionless ? kInfinity : 0.05,
                 BoundarySpec::periodic());
      const GridState g0 = uniform_grid(16, M);
      const GridState g1 = ssp_rk2_step(g0, 1e-3, cfg);
      for (int i = 0; i < 16; ++i)
        for (std::size_t k = 0; k < 5; ++k) CHECK(g1[i][k] == Approx(M[k]).epsilon(1e-14));
      CHECK(g1.time == Approx(1e-3));
    }
}

TEST_CASE("one collisionless step conserves every moment") {
  oracle::Rng rng(33);
  for (Closure c : {Closure::Eqmom, Closure::Hyqmom}) {
    GridState g(32, 0.0, 1.0);
    for (auto& m : g.interior()) m = oracle::random_mixture(rng);
    const SchemeConfig cfg = config(c, SourceMode::Collisionless, kInfinity,
                                    BoundarySpec::periodic());
    const StageData st = prepare_stage(g, cfg);
    const double dt = cfl_dt(st, g.dx(), cfg.source, cfg.cfl);
    const GridState h = apply_euler_update(g, st, dt, cfg);
    for (std::size_t k = 0; k < 5; ++k) {
      double a = 0, b = 0, scale = 0;
      for (int i = 0; i < 32; ++i) {
        a += g[i][k];
        b += h[i][k];
        scale += std::abs(g[i][k]);
      }
      CHECK(std::abs(a - b) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("stiff semi-implicit step relaxes to the Maxwellian") {
  const MomentVec M{{1, 0.3, 1.2, 0.4, 4.5}};
  const SchemeConfig cfg =
      config(Closure::Hyqmom, SourceMode::SemiImplicitBGK, 1e-6, BoundarySpec::periodic());
  // dt / tau = 1e5, so the remaining deviation is 1e-5 of the initial one
  const GridState g1 = forward_euler_step(uniform_grid(8, M), 0.1, cfg);
  const Macros mac = macros(M);
  const MomentVec eq = maxwellian_moments(mac.rho, mac.U, mac.theta);
  for (int i = 0; i < 8; ++i) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(g1[i][k] == Approx(M[k]).epsilon(1e-14));
    CHECK(g1[i][3] == Approx(eq[3]).epsilon(1e-5));
    CHECK(g1[i][4] == Approx(eq[4]).epsilon(1e-5));
  }
}

TEST_CASE("mirror symmetric data stays symmetric") {
  const MomentVec L{{1, 1, 4.0 / 3, 2, 10.0 / 3}};
  for (Closure c : {Closure::Eqmom, Closure::Hyqmom}) {
    GridState g(40, -1.0, 1.0);
    for (int i = 0; i < 40; ++i) g[i] = i < 20 ? L : reflect(L);
    Solver s(g, config(c, SourceMode::Collisionless, kInfinity, BoundarySpec::outflow()));
    for (int n = 0; n < 20; ++n) s.step();
    const GridState& h = s.state();
    double worst = 0;
    for (int i = 0; i < 40; ++i) {
      const MomentVec r = reflect(h[39 - i]);
      for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::abs(h[i][k] - r[k]));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("random fields stay realizable under SSP-RK2") {
  oracle::Rng rng(34);
  for (Closure c : {Closure::Eqmom, Closure::Hyqmom}) {
    GridState g(24, 0.0, 1.0);
    for (auto& m : g.interior()) m = oracle::random_mixture(rng);
    Solver s(g, config(c, SourceMode::ExplicitBGK, 0.05, BoundarySpec::periodic()));
    for (int n = 0; n < 10; ++n) {
      const StepStats st = s.step();
      CHECK(st.audit.ok);
      CHECK(st.theta_min >= 0.0);
    }
    CHECK(audit_realizability(s.state(), c).ok);
  }
}

TEST_CASE("audit flags an unrealizable cell") {
  GridState g = uniform_grid(5, {{1, 0, 1, 0, 3}});
  g[3] = {{1, 0, 1, 0, 0.5}};
  const AuditReport r = audit_realizability(g, Closure::Eqmom);
  CHECK_FALSE(r.ok);
  CHECK(r.first_bad_cell == 3);
  CHECK(r.min_z == Approx(-0.5));
  CHECK(parse_source_mode("semi_implicit") == SourceMode::SemiImplicitBGK);
}

}  // TEST_SUITE
