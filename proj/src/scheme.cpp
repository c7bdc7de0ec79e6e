#include "qbmm/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/LU>

#include "qbmm/error.hpp"
#include "qbmm/parallel.hpp"

namespace qbmm {

namespace {

constexpr double kBoundaryTol = 1e-10;
constexpr double kBisectionTol = 1e-12;
constexpr int kBisectionMaxIter = 60;

// Smallest eigenvalue gap, relative to their span, for a characteristic decomposition.
constexpr double kMinEigenGap = 1e-4;

std::string describe_cell(int i, const MomentVec& M) {
  std::ostringstream os;
  os.precision(17);
  os << "cell " << i << " M = (" << M[0] << ", " << M[1] << ", " << M[2] << ", " << M[3] << ", "
     << M[4] << ")";
  if (M[0] != 0.0) {
    const RealizabilityMargins r = margins(M);
    os << " e = " << r.e << " z = " << r.z;
  }
  return os.str();
}

bool passes_audit(const MomentVec& M, Closure closure) {
  return closure == Closure::Eqmom ? is_strictly_realizable(M, 0.0)
                                   : is_realizable_within(M, kBoundaryTol);
}

// Largest theta in [0, 1] with avg + theta (face - avg) strictly realizable.
double largest_admissible_theta(const MomentVec& face, const MomentVec& avg) {
  const MomentVec dir = face - avg;
  auto inside = [&](double th) { return is_strictly_realizable(avg + th * dir, 0.0); };
  if (inside(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < kBisectionMaxIter && hi - lo > kBisectionTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

// --- grid ---------------------------------------------------------------------

GridState::GridState(int n_cells, double x_lo, double x_hi)
    : n_cells_(n_cells),
      x_lo_(x_lo),
      dx_((x_hi - x_lo) / n_cells),
      cells_(static_cast<std::size_t>(n_cells + 2 * kGhost)) {
  if (n_cells < 4) throw Error(ErrorCode::ValidationError, "grid needs at least 4 cells");
  if (!(x_hi > x_lo)) throw Error(ErrorCode::ValidationError, "grid needs x_hi > x_lo");
}

void apply_bc(GridState& g, const BoundarySpec& bc) {
  const int n = g.n_cells();
  const bool lp = bc.left.kind == BcKind::Periodic;
  const bool rp = bc.right.kind == BcKind::Periodic;
  if (lp != rp) throw Error(ErrorCode::ValidationError, "periodic BC must be set on both sides");
  if (lp) {
    for (int k = 1; k <= GridState::kGhost; ++k) {
      g[-k] = g[n - k];
      g[n - 1 + k] = g[k - 1];
    }
    return;
  }
  for (int k = 1; k <= GridState::kGhost; ++k) {
    g[-k] = bc.left.kind == BcKind::Inflow ? bc.left.inflow_state : g[0];
    g[n - 1 + k] = bc.right.kind == BcKind::Inflow ? bc.right.inflow_state : g[n - 1];
  }
}

// --- sources --------------------------------------------------------------------

std::string_view to_string(SourceMode m) noexcept {
  switch (m) {
    case SourceMode::Collisionless: return "collisionless";
    case SourceMode::ExplicitBGK: return "explicit";
    case SourceMode::SemiImplicitBGK: return "semi_implicit";
  }
  return "unknown";
}

SourceMode parse_source_mode(std::string_view name) {
  if (name == "collisionless" || name == "none") return SourceMode::Collisionless;
  if (name == "explicit") return SourceMode::ExplicitBGK;
  if (name == "semi_implicit" || name == "semi-implicit") return SourceMode::SemiImplicitBGK;
  throw Error(ErrorCode::ValidationError, "unknown source mode '" + std::string(name) + "'");
}

Vec5 bgk_source(const MomentVec& M, double tau) {
  if (std::isinf(tau)) return {};
  const Macros mac = macros(M);
  if (!(mac.theta > 0.0))
    throw Error(ErrorCode::NonpositiveTheta, "BGK source needs a positive temperature");
  const MomentVec eq = maxwellian_moments(mac.rho, mac.U, mac.theta);
  return {{0.0, 0.0, 0.0, (eq[3] - M[3]) / tau, (eq[4] - M[4]) / tau}};
}

MuStarQuadratic mu_star_coefficients(const MomentVec& M, const Vec5& S) noexcept {
  const double M0 = M[0], M1 = M[1], M2 = M[2], M3 = M[3];
  return {-M0 * S[3] * S[3], 2.0 * S[3] * (M1 * M2 - M0 * M3) + S[4] * (M0 * M2 - M1 * M1),
          hankel_det(M)};
}

double mu_star(const MomentVec& M, const Vec5& S) {
  if (S[3] == 0.0 && S[4] == 0.0) return kInfinity;
  const auto [a0, a1, a2] = mu_star_coefficients(M, S);
  if (!(a2 > 0.0)) {
    // Boundary state: realizable only if the source points into the moment space, and
    // then the far root is the bound.
    if (!(a1 > 0.0)) throw Error(ErrorCode::NotRealizable, "mu_star needs det H(M) > 0");
    if (a0 == 0.0) return kInfinity;
    return (a1 + std::sqrt(std::max(0.0, a1 * a1 - 4.0 * a0 * a2))) / (-2.0 * a0);
  }
  if (a0 == 0.0) return a1 < 0.0 ? -a2 / a1 : kInfinity;
  const double root = std::sqrt(a1 * a1 - 4.0 * a0 * a2);
  // Pick the cancellation-free form of the positive root.
  return a1 > 0.0 ? (a1 + root) / (-2.0 * a0) : 2.0 * a2 / (root - a1);
}

// --- reconstruction and limiting ------------------------------------------------

namespace {

double van_albada(double dl, double dr, double eps) noexcept {
  return ((dr * dr + eps) * dl + (dl * dl + eps) * dr) / (dl * dl + dr * dr + eps + eps);
}

}  // namespace

Vec5 van_albada_slope(const MomentVec& left, const MomentVec& center, const MomentVec& right,
                      double dx) noexcept {
  const double eps = 3.0 * dx;
  Vec5 slope;
  for (std::size_t k = 0; k < 5; ++k)
    slope[k] = van_albada((center[k] - left[k]) / dx, (right[k] - center[k]) / dx, eps);
  return slope;
}

std::optional<Vec5> characteristic_van_albada_slope(const MomentVec& left,
                                                    const MomentVec& center,
                                                    const MomentVec& right, double dx,
                                                    const std::array<double, 5>& lambda) {
  const double width = lambda[4] - lambda[0];
  for (std::size_t j = 0; j + 1 < 5; ++j)
    if (!(lambda[j + 1] - lambda[j] > kMinEigenGap * width)) return std::nullopt;

  // The right eigenvectors of a companion matrix are (1, l, l^2, l^3, l^4).
  Eigen::Matrix<double, 5, 5> V;
  for (int j = 0; j < 5; ++j) {
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      V(k, j) = p;
      p *= lambda[static_cast<std::size_t>(j)];
    }
  }
  Eigen::Matrix<double, 5, 1> dl, dr;
  for (int k = 0; k < 5; ++k) {
    const auto u = static_cast<std::size_t>(k);
    dl(k) = (center[u] - left[u]) / dx;
    dr(k) = (right[u] - center[u]) / dx;
  }
  const Eigen::PartialPivLU<Eigen::Matrix<double, 5, 5>> lu(V);
  const Eigen::Matrix<double, 5, 1> al = lu.solve(dl);
  const Eigen::Matrix<double, 5, 1> ar = lu.solve(dr);
  const double eps = 3.0 * dx;
  Eigen::Matrix<double, 5, 1> a;
  for (int j = 0; j < 5; ++j) a(j) = van_albada(al(j), ar(j), eps);
  const Eigen::Matrix<double, 5, 1> s = V * a;
  Vec5 slope;
  for (int k = 0; k < 5; ++k) slope[static_cast<std::size_t>(k)] = s(k);
  return slope;
}

FaceStates reconstruct_faces(const GridState& g) {
  return reconstruct_faces(g, ClosureSpec{}, SlopeVariables::Conserved);
}

FaceStates reconstruct_faces(const GridState& g, const ClosureSpec& closure,
                             SlopeVariables vars) {
  const int n = g.n_cells();
  const double half = 0.5 * g.dx();
  const bool characteristic =
      vars == SlopeVariables::Characteristic && closure.kind == Closure::Hyqmom;
  FaceStates f;
  f.n_cells = n;
  f.lo.resize(static_cast<std::size_t>(n + 2));
  f.hi.resize(static_cast<std::size_t>(n + 2));
  f.theta.assign(static_cast<std::size_t>(n + 2), 1.0);
  parallel_for(-1, n + 1, [&](int c) {
    std::optional<Vec5> slope;
    if (characteristic)
      if (const auto lam = hyqmom_eigenvalues(g[c]))
        slope = characteristic_van_albada_slope(g[c - 1], g[c], g[c + 1], g.dx(), *lam);
    if (!slope) slope = van_albada_slope(g[c - 1], g[c], g[c + 1], g.dx());
    const auto idx = static_cast<std::size_t>(c + 1);
    f.lo[idx] = g[c] - half * *slope;
    f.hi[idx] = g[c] + half * *slope;
  });
  return f;
}

LimitResult realizability_limit(const MomentVec& face_minus, const MomentVec& face_plus,
                                const MomentVec& cell_avg) {
  if (!is_strictly_realizable(cell_avg, 0.0)) {
    // A closure that allows boundary states (HyQMOM) can hand us a boundary average;
    // the only admissible reconstruction is then the constant one.
    if (cell_avg[0] > 0.0 && is_realizable_within(cell_avg, kBoundaryTol))
      return {0.0, cell_avg, cell_avg};
    throw Error(ErrorCode::CellAvgNotRealizable, describe_cell(-1, cell_avg));
  }
  if (is_strictly_realizable(face_minus, 0.0) && is_strictly_realizable(face_plus, 0.0))
    return {1.0, face_minus, face_plus};

  double theta = std::min(largest_admissible_theta(face_minus, cell_avg),
                          largest_admissible_theta(face_plus, cell_avg));
  auto build = [&](double th) {
    return LimitResult{th, cell_avg + th * (face_minus - cell_avg),
                       cell_avg + th * (face_plus - cell_avg)};
  };
  LimitResult out = build(theta);
  if (!is_strictly_realizable(out.minus, 0.0) || !is_strictly_realizable(out.plus, 0.0)) {
    out = build(std::max(0.0, theta - kBisectionTol));
    if (out.theta == 0.0) out = {0.0, cell_avg, cell_avg};
  }
  return out;
}

void limit_faces(FaceStates& f, const GridState& g) {
  parallel_for(-1, f.n_cells + 1, [&](int c) {
    const auto idx = static_cast<std::size_t>(c + 1);
    LimitResult r;
    try {
      r = realizability_limit(f.lo[idx], f.hi[idx], g[c]);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::CellAvgNotRealizable) throw;
      throw Error(ErrorCode::CellAvgNotRealizable, describe_cell(c, g[c]));
    }
    f.theta[idx] = r.theta;
    f.lo[idx] = r.minus;
    f.hi[idx] = r.plus;
  });
}

// --- flux ---------------------------------------------------------------------------

HllResult hll_flux(const ClosedState& left, const ClosedState& right) noexcept {
  double dp = std::max(left.speeds.plus, right.speeds.plus);
  double dm = std::min(left.speeds.minus, right.speeds.minus);
  if (dp == 0.0 && dm == 0.0) {
    dp = kZeroSpreadWidening;
    dm = -kZeroSpreadWidening;
  }
  const Vec5 fl = physical_flux(left);
  const Vec5 fr = physical_flux(right);
  HllResult out;
  out.speeds = {dm, dp};
  const double inv = 1.0 / (dp - dm);
  const double prod = dp * dm;
  for (std::size_t k = 0; k < 5; ++k) {
    out.flux[k] = (dp * fl[k] - dm * fr[k] + prod * (right.M[k] - left.M[k])) * inv;
  }
  return out;
}

HllResult hll_flux(const MomentVec& left, const MomentVec& right, const ClosureSpec& closure) {
  return hll_flux(close_state(closure, left), close_state(closure, right));
}

// --- stepping -----------------------------------------------------------------------

StageData prepare_stage(const GridState& state, const SchemeConfig& cfg) {
  GridState g = state;
  apply_bc(g, cfg.bc);
  const int n = g.n_cells();

  StageData st;
  st.faces = reconstruct_faces(g, cfg.closure, cfg.slopes);
  if (cfg.limiter) limit_faces(st.faces, g);

  // Interface j needs hi of cell j-1 (index j) and lo of cell j (index j+1).
  std::vector<ClosedState> closed_hi(static_cast<std::size_t>(n + 1));
  std::vector<ClosedState> closed_lo(static_cast<std::size_t>(n + 1));
  parallel_for(0, n + 1, [&](int j) {
    const auto u = static_cast<std::size_t>(j);
    closed_hi[u] = close_state(cfg.closure, st.faces.minus(j));
    closed_lo[u] = close_state(cfg.closure, st.faces.plus(j));
  });

  st.flux.resize(static_cast<std::size_t>(n + 1));
  st.speeds.resize(static_cast<std::size_t>(n + 1));
  parallel_for(0, n + 1, [&](int j) {
    const auto u = static_cast<std::size_t>(j);
    const HllResult h = hll_flux(closed_hi[u], closed_lo[u]);
    st.flux[u] = h.flux;
    st.speeds[u] = h.speeds;
  });

  if (cfg.source.mode == SourceMode::ExplicitBGK) {
    st.source.resize(static_cast<std::size_t>(n));
    st.mu.resize(static_cast<std::size_t>(n));
    parallel_for(0, n, [&](int i) {
      const auto idx = static_cast<std::size_t>(i + 1);
      const MomentVec& lo = st.faces.lo[idx];
      const MomentVec& hi = st.faces.hi[idx];
      const Vec5 s_lo = bgk_source(lo, cfg.source.tau);
      const Vec5 s_hi = bgk_source(hi, cfg.source.tau);
      st.source[static_cast<std::size_t>(i)] = 0.5 * (s_lo + s_hi);
      st.mu[static_cast<std::size_t>(i)] = std::min(mu_star(lo, s_lo), mu_star(hi, s_hi));
    });
  }
  return st;
}

double cfl_dt(std::span<const WaveSpeedPair> speeds, std::span<const double> mu, double dx,
              SourceMode mode, double cfl) {
  auto spread = [&](std::size_t j) { return speeds[j].plus - speeds[j].minus; };
  if (mode != SourceMode::ExplicitBGK) {
    double max_spread = 0.0;
    for (std::size_t j = 0; j < speeds.size(); ++j) max_spread = std::max(max_spread, spread(j));
    if (!(max_spread > 0.0)) throw Error(ErrorCode::ZeroSpread, "all interface spreads vanish");
    return cfl * dx / max_spread;
  }
  if (mu.size() + 1 != speeds.size())
    throw Error(ErrorCode::LengthMismatch, "explicit-source CFL needs one mu per cell");
  double rate = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double local = std::max(spread(i), spread(i + 1)) / dx + 1.0 / mu[i];
    rate = std::max(rate, local);
  }
  if (!(rate > 0.0)) throw Error(ErrorCode::ZeroSpread, "all interface spreads vanish");
  return kExplicitSourceSafety * cfl / rate;
}

double cfl_dt(const StageData& stage, double dx, const SourceSpec& source, double cfl) {
  return cfl_dt(stage.speeds, stage.mu, dx, source.mode, cfl);
}

AuditReport audit_realizability(const GridState& g, Closure closure) {
  AuditReport rep;
  for (int i = 0; i < g.n_cells(); ++i) {
    const MomentVec& M = g[i];
    const bool ok = M[0] != 0.0 && passes_audit(M, closure);
    rep.min_m0 = std::min(rep.min_m0, M[0]);
    if (M[0] != 0.0) {
      const RealizabilityMargins r = margins(M);
      rep.min_e = std::min(rep.min_e, r.e);
      rep.min_z = std::min(rep.min_z, r.z);
    }
    if (!ok && rep.ok) {
      rep.ok = false;
      rep.first_bad_cell = i;
    }
  }
  return rep;
}

GridState apply_euler_update(const GridState& state, const StageData& st, double dt,
                             const SchemeConfig& cfg) {
  GridState out = state;
  const int n = state.n_cells();
  const double lambda = dt / state.dx();
  const SourceSpec& src = cfg.source;
  const double relax = std::isinf(src.tau) ? 0.0 : dt / src.tau;

  parallel_for(0, n, [&](int i) {
    const auto u = static_cast<std::size_t>(i);
    MomentVec M = state[i] - lambda * (st.flux[u + 1] - st.flux[u]);
    if (src.mode == SourceMode::ExplicitBGK) {
      M += dt * st.source[u];
    } else if (src.mode == SourceMode::SemiImplicitBGK && relax > 0.0) {
      const bool post = src.eval == MaxwellianEval::PostConvection;
      const Macros mac = macros(post ? M : state[i]);
      if (!(mac.theta > 0.0))
        throw Error(ErrorCode::RealizabilityLost, "convected " + describe_cell(i, M));
      const MomentVec eq = maxwellian_moments(mac.rho, mac.U, mac.theta);
      // Post-convection: components 0..2 of eq equal those of M, so only 3 and 4 move.
      for (std::size_t k = post ? 3 : 0; k < 5; ++k) M[k] = (M[k] + relax * eq[k]) / (1.0 + relax);
    }
    out[i] = M;
  });
  out.time = state.time + dt;

  for (int i = 0; i < n; ++i) {
    if (!passes_audit(out[i], cfg.closure.kind))
      throw Error(ErrorCode::RealizabilityLost,
                  describe_cell(i, out[i]) + " at t = " + std::to_string(out.time));
  }
  return out;
}

GridState forward_euler_step(const GridState& state, double dt, const SchemeConfig& cfg) {
  return apply_euler_update(state, prepare_stage(state, cfg), dt, cfg);
}

namespace {

GridState heun_average(const GridState& u0, const GridState& u2) {
  GridState out = u2;
  for (int i = 0; i < u0.n_cells(); ++i) out[i] = 0.5 * u0[i] + 0.5 * u2[i];
  out.time = u2.time;
  return out;
}

void accumulate_theta(const FaceStates& f, StepStats& st, double& sum, int& count) {
  for (int c = 0; c < f.n_cells; ++c) {
    const double th = f.theta[static_cast<std::size_t>(c + 1)];
    st.theta_min = std::min(st.theta_min, th);
    if (th < 1.0) ++st.limited_cells;
    sum += th;
    ++count;
  }
}

}  // namespace

GridState ssp_rk2_step(const GridState& state, double dt, const SchemeConfig& cfg) {
  const GridState u1 = forward_euler_step(state, dt, cfg);
  GridState u2 = forward_euler_step(u1, dt, cfg);
  u2.time = state.time + dt;
  return heun_average(state, u2);
}

Solver::Solver(GridState initial, SchemeConfig cfg) : state_(std::move(initial)), cfg_(cfg) {
  if (!(cfg_.cfl > 0.0 && cfg_.cfl <= 0.5))
    throw Error(ErrorCode::ValidationError, "cfl must lie in (0, 0.5]");
  if (cfg_.source.mode != SourceMode::Collisionless && !(cfg_.source.tau > 0.0))
    throw Error(ErrorCode::ValidationError, "BGK source needs tau > 0");
  const AuditReport rep = audit_realizability(state_, cfg_.closure.kind);
  if (!rep.ok)
    throw Error(ErrorCode::NotRealizable,
                "initial " + describe_cell(rep.first_bad_cell, state_[rep.first_bad_cell]));
}

StepStats Solver::step(double t_max) {
  const double remaining = t_max - state_.time;
  const StageData s0 = prepare_stage(state_, cfg_);
  double dt = std::min(cfl_dt(s0, state_.dx(), cfg_.source, cfg_.cfl), remaining);

  // The second stage must satisfy its own bound; shrink and redo the first stage if not.
  for (int attempt = 0;; ++attempt) {
    const GridState u1 = apply_euler_update(state_, s0, dt, cfg_);
    const StageData s1 = prepare_stage(u1, cfg_);
    const double dt1 = cfl_dt(s1, u1.dx(), cfg_.source, cfg_.cfl);
    if (dt1 < dt) {
      if (attempt >= 16)
        throw Error(ErrorCode::ZeroSpread, "RK2 step size did not settle under the CFL bound");
      dt = 0.98 * dt1;
      continue;
    }
    GridState u2 = apply_euler_update(u1, s1, dt, cfg_);
    const bool last = dt >= remaining;
    GridState next = heun_average(state_, u2);
    next.time = last ? t_max : state_.time + dt;

    StepStats stats;
    stats.dt = dt;
    double sum = 0.0;
    int count = 0;
    accumulate_theta(s0.faces, stats, sum, count);
    accumulate_theta(s1.faces, stats, sum, count);
    stats.theta_mean = count > 0 ? sum / count : 1.0;
    stats.audit = audit_realizability(next, cfg_.closure.kind);
    if (!stats.audit.ok)
      throw Error(ErrorCode::RealizabilityLost,
                  describe_cell(stats.audit.first_bad_cell, next[stats.audit.first_bad_cell]));
    state_ = std::move(next);
    return stats;
  }
}

}  // namespace qbmm
