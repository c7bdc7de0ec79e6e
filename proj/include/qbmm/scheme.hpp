#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qbmm/closures.hpp"
#include "qbmm/moments.hpp"

namespace qbmm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Half-width used when both interface speeds vanish, so the HLL denominator stays positive.
inline constexpr double kZeroSpreadWidening = 1e-12;

/// Safety factor keeping the explicit-source CFL bound strict.
inline constexpr double kExplicitSourceSafety = 0.999;

// --- grid ---------------------------------------------------------------------

/// Cell averages on a uniform grid with two ghost cells per side.
/// Index i runs over [-2, n_cells + 1]; [0, n_cells) is the interior.
class GridState {
 public:
  static constexpr int kGhost = 2;

  GridState() = default;
  GridState(int n_cells, double x_lo, double x_hi);

  int n_cells() const noexcept { return n_cells_; }
  double dx() const noexcept { return dx_; }
  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_lo_ + dx_ * n_cells_; }
  double x_center(int i) const noexcept { return x_lo_ + (i + 0.5) * dx_; }

  MomentVec& operator[](int i) noexcept { return cells_[static_cast<std::size_t>(i + kGhost)]; }
  const MomentVec& operator[](int i) const noexcept {
    return cells_[static_cast<std::size_t>(i + kGhost)];
  }

  std::span<MomentVec> interior() noexcept {
    return {cells_.data() + kGhost, static_cast<std::size_t>(n_cells_)};
  }
  std::span<const MomentVec> interior() const noexcept {
    return {cells_.data() + kGhost, static_cast<std::size_t>(n_cells_)};
  }

  double time = 0.0;

 private:
  int n_cells_ = 0;
  double x_lo_ = 0.0;
  double dx_ = 0.0;
  std::vector<MomentVec> cells_;
};

enum class BcKind { Periodic, Outflow, Inflow };

struct BoundarySide {
  BcKind kind = BcKind::Outflow;
  MomentVec inflow_state{};  // used only for Inflow
};

struct BoundarySpec {
  BoundarySide left;
  BoundarySide right;

  static BoundarySpec periodic() { return {{BcKind::Periodic, {}}, {BcKind::Periodic, {}}}; }
  static BoundarySpec outflow() { return {{BcKind::Outflow, {}}, {BcKind::Outflow, {}}}; }
};

/// Fills the ghost cells. Periodic on one side requires periodic on both.
void apply_bc(GridState& state, const BoundarySpec& bc);

// --- sources --------------------------------------------------------------------

enum class SourceMode { Collisionless, ExplicitBGK, SemiImplicitBGK };

/// Where the implicit collision step evaluates its Maxwellian.
enum class MaxwellianEval {
  PostConvection,  // conserves M0..M2 exactly
  LevelN,          // literal time-level-n evaluation
};

std::string_view to_string(SourceMode m) noexcept;
SourceMode parse_source_mode(std::string_view name);

struct SourceSpec {
  SourceMode mode = SourceMode::Collisionless;
  double tau = kInfinity;
  MaxwellianEval eval = MaxwellianEval::PostConvection;
};

/// BGK relaxation source (0, 0, 0, (rho D3 - M3)/tau, (rho D4 - M4)/tau). tau = inf
/// gives zero. Throws NonpositiveTheta when the temperature is not positive.
Vec5 bgk_source(const MomentVec& M, double tau);

/// Largest mu with M + mu S realizable: the positive root of
///   a0 mu^2 + a1 mu + a2,  a0 = -M0 S3^2,
///   a1 = 2 S3 (M1 M2 - M0 M3) + S4 (M0 M2 - M1^2),  a2 = det H(M).
/// Returns +inf when no positive root exists. On the boundary (a2 <= 0) the far root is
/// returned if a1 > 0; otherwise throws NotRealizable.
double mu_star(const MomentVec& M, const Vec5& S);

struct MuStarQuadratic {
  double a0, a1, a2;
};
MuStarQuadratic mu_star_coefficients(const MomentVec& M, const Vec5& S) noexcept;

// --- reconstruction and limiting ------------------------------------------------

/// Componentwise van Albada slope, eps_L = eps_R = 3 dx.
Vec5 van_albada_slope(const MomentVec& left, const MomentVec& center, const MomentVec& right,
                      double dx) noexcept;

/// Reconstructed face values of cells -1..n_cells; entry c + 1 belongs to cell c.
/// Interface j (between cells j-1 and j) sees minus(j) on its left and plus(j) on its right.
struct FaceStates {
  int n_cells = 0;
  std::vector<MomentVec> lo;   // value at the cell's left face
  std::vector<MomentVec> hi;   // value at the cell's right face
  std::vector<double> theta;   // realizability limiter factor per cell (1 = untouched)

  const MomentVec& minus(int j) const { return hi[static_cast<std::size_t>(j)]; }
  const MomentVec& plus(int j) const { return lo[static_cast<std::size_t>(j + 1)]; }
};

/// Variables the slope limiter acts on. Characteristic limiting decomposes the one-sided
/// differences on the eigenvectors of the closed flux Jacobian; it is available for
/// HyQMOM, whose eigenvalues are known in closed form. Limiting the moments one by one
/// lets M3 and M4 disagree near their extrema, which HyQMOM amplifies on fine grids.
enum class SlopeVariables { Conserved, Characteristic };

/// van Albada applied to the characteristic amplitudes for the given Jacobian
/// eigenvalues. Empty when two eigenvalues (nearly) coincide.
std::optional<Vec5> characteristic_van_albada_slope(const MomentVec& left,
                                                    const MomentVec& center,
                                                    const MomentVec& right, double dx,
                                                    const std::array<double, 5>& lambda);

/// Piecewise-linear face values. Requires filled ghost cells.
FaceStates reconstruct_faces(const GridState& state);
FaceStates reconstruct_faces(const GridState& state, const ClosureSpec& closure,
                             SlopeVariables vars);

struct LimitResult {
  double theta = 1.0;
  MomentVec minus;  // limited left-face value
  MomentVec plus;   // limited right-face value
};

/// Scales both faces of a cell toward its average by the largest theta in [0, 1] that
/// keeps each strictly realizable. Throws CellAvgNotRealizable for an invalid average.
LimitResult realizability_limit(const MomentVec& face_minus, const MomentVec& face_plus,
                                const MomentVec& cell_avg);

/// Applies realizability_limit to every cell of `faces`.
void limit_faces(FaceStates& faces, const GridState& state);

// --- flux ---------------------------------------------------------------------------

struct HllResult {
  Vec5 flux;
  WaveSpeedPair speeds;  // interface speeds, minus < 0 < plus after widening
};

/// HLL flux with interface speeds max/min over both states' closure speeds.
HllResult hll_flux(const ClosedState& left, const ClosedState& right) noexcept;
HllResult hll_flux(const MomentVec& left, const MomentVec& right, const ClosureSpec& closure);

// --- stepping -----------------------------------------------------------------------

struct SchemeConfig {
  ClosureSpec closure;
  SourceSpec source;
  BoundarySpec bc = BoundarySpec::outflow();
  double cfl = 0.4;
  bool limiter = true;
  SlopeVariables slopes = SlopeVariables::Characteristic;  // EQMOM always uses Conserved
};

/// Everything one forward-Euler stage needs, evaluated once from a state.
struct StageData {
  FaceStates faces;
  std::vector<Vec5> flux;               // per interface 0..n
  std::vector<WaveSpeedPair> speeds;    // per interface 0..n
  std::vector<Vec5> source;             // per interior cell (explicit mode only)
  std::vector<double> mu;               // per interior cell (explicit mode only)
};

/// Fills ghosts (on a copy), reconstructs, limits, closes and evaluates fluxes.
StageData prepare_stage(const GridState& state, const SchemeConfig& cfg);

/// Largest admissible step for the given stage and mode: cfl dx / max spread, or for
/// the explicit source the largest dt with dt max_i(spread_i/dx + 1/mu_i) = safety cfl.
double cfl_dt(const StageData& stage, double dx, const SourceSpec& source, double cfl);

/// Plain-data form used by tests: interface spreads and per-cell mu.
double cfl_dt(std::span<const WaveSpeedPair> interface_speeds, std::span<const double> mu,
              double dx, SourceMode mode, double cfl);

struct AuditReport {
  bool ok = true;
  int first_bad_cell = -1;
  double min_m0 = kInfinity;
  double min_e = kInfinity;
  double min_z = kInfinity;
};

/// EQMOM requires strict realizability; HyQMOM tolerates the boundary within 1e-10.
AuditReport audit_realizability(const GridState& state, Closure closure);

/// One forward-Euler step of size dt from a prepared stage. Throws RealizabilityLost
/// if any updated cell fails the audit.
GridState apply_euler_update(const GridState& state, const StageData& stage, double dt,
                             const SchemeConfig& cfg);

GridState forward_euler_step(const GridState& state, double dt, const SchemeConfig& cfg);

/// Heun form: u1 = E(u0), result = (u0 + E(u1)) / 2, with fixed dt.
GridState ssp_rk2_step(const GridState& state, double dt, const SchemeConfig& cfg);

struct StepStats {
  double dt = 0.0;
  double theta_min = 1.0;
  double theta_mean = 1.0;
  int limited_cells = 0;
  AuditReport audit;
};

/// Adaptive SSP-RK2 driver. dt is taken from the CFL bound of both stages.
class Solver {
 public:
  Solver(GridState initial, SchemeConfig cfg);

  const GridState& state() const noexcept { return state_; }
  const SchemeConfig& config() const noexcept { return cfg_; }

  /// Advances one step, never past t_max. Returns statistics of the accepted step.
  StepStats step(double t_max = kInfinity);

  /// Steps until time t_end; the callback (if any) sees every accepted step.
  template <class OnStep>
  int run_to(double t_end, OnStep&& on_step) {
    int steps = 0;
    while (state_.time < t_end) {
      const StepStats st = step(t_end);
      on_step(steps, state_, st);
      ++steps;
    }
    return steps;
  }
  int run_to(double t_end) {
    return run_to(t_end, [](int, const GridState&, const StepStats&) {});
  }

 private:
  GridState state_;
  SchemeConfig cfg_;
};

}  // namespace qbmm
