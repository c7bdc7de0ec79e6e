#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <variant>

#include "qbmm/moments.hpp"

namespace qbmm {

/// Two-node Gaussian-EQMOM primitives: two Gaussians sharing one standard deviation.
struct EqmomParams {
  double rho1 = 0.0;
  double v1 = 0.0;
  double rho2 = 0.0;
  double v2 = 0.0;
  double sigma = 0.0;
};

/// Three-point HyQMOM primitives; after inversion v1 <= v2 = M1/M0 <= v3.
struct HyqmomParams {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

/// Signal speed bounds, minus <= 0 <= plus.
struct WaveSpeedPair {
  double minus = 0.0;
  double plus = 0.0;
};

enum class Closure { Eqmom, Hyqmom };

std::string_view to_string(Closure c) noexcept;
Closure parse_closure(std::string_view name);  // "eqmom" | "hyqmom"

/// Default EQMOM wave-speed constant; any a > sqrt(3) is admissible.
inline constexpr double kDefaultA = 2.0;

struct ClosureSpec {
  Closure kind = Closure::Eqmom;
  double a = kDefaultA;
  // HyQMOM only: widen the node range to the closed system's characteristic speeds.
  // The node range alone under-dissipates and goes unstable on fine grids.
  bool characteristic_speeds = true;
};

// --- Gaussian-EQMOM ---------------------------------------------------------

MomentVec eqmom_forward(const EqmomParams& W) noexcept;

/// Solves for sigma^2 from the deconvolution cubic, then the two-node quadrature of
/// the remaining central moments. Throws NotRealizable, ExcludedSet or RootFindFailure.
EqmomParams eqmom_invert(const MomentVec& M);

/// Bound on |zeta| / sqrt(e) used by the flux closure. Near zero skewness with
/// kurtosis above 3 the exact inversion sends a vanishing-weight node off to infinity.
inline constexpr double kEqmomZetaCap = 6.0;

/// As eqmom_invert, but with |zeta| <= zeta_cap sqrt(e). A capped result reproduces
/// M0..M3 exactly and underestimates M4; *capped reports whether that happened.
EqmomParams eqmom_invert_bounded(const MomentVec& M, double zeta_cap, bool* capped = nullptr);

/// (min, max) generalized eigenvalues of the pencil (H(F), H(M)): the sharpest speeds
/// with delta+ M - F and F - delta- M positive semidefinite.
WaveSpeedPair hankel_pencil_speeds(const MomentVec& M, const Vec5& F);

/// Closure for the fifth moment: rho1 v1^5 + rho2 v2^5 + 10 M3 sigma^2 - 15 sigma^4 M1.
double eqmom_m5(const EqmomParams& W, const MomentVec& M) noexcept;

/// Throws InvalidA when a <= sqrt(3).
WaveSpeedPair wave_speeds(const EqmomParams& W, double a);

// --- HyQMOM -----------------------------------------------------------------

MomentVec hyqmom_forward(const HyqmomParams& W) noexcept;

/// Closed-form inversion with the middle node pinned at U = M1/M0. A state with
/// (numerically) zero variance collapses onto a single node at U.
HyqmomParams hyqmom_invert(const MomentVec& M);

/// True when hyqmom_invert would collapse M onto a single node.
bool hyqmom_is_degenerate(const MomentVec& M);

double hyqmom_m5(const HyqmomParams& W) noexcept;

/// Eigenvalues of the closed HyQMOM flux Jacobian, ascending; the middle one is U.
/// Empty for zero-variance and two-node states, where they are not distinct.
std::optional<std::array<double, 5>> hyqmom_eigenvalues(const MomentVec& M);

/// Node range of wave_speeds(HyqmomParams) widened to contain hyqmom_eigenvalues.
WaveSpeedPair hyqmom_characteristic_speeds(const MomentVec& M);

WaveSpeedPair wave_speeds(const HyqmomParams& W) noexcept;

// --- closure-generic evaluation used by the flux --------------------------------

/// A moment vector together with everything the flux needs from its closure.
struct ClosedState {
  MomentVec M;
  double m5 = 0.0;
  WaveSpeedPair speeds;
  std::variant<EqmomParams, HyqmomParams> params;
};

ClosedState close_state(const ClosureSpec& spec, const MomentVec& M);

/// Physical flux F(M) = (M1, M2, M3, M4, M5bar).
inline Vec5 physical_flux(const MomentVec& M, double m5) noexcept {
  return {{M[1], M[2], M[3], M[4], m5}};
}

inline Vec5 physical_flux(const ClosedState& s) noexcept { return physical_flux(s.M, s.m5); }

}  // namespace qbmm
