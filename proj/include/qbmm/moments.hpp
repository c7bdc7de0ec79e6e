#pragma once

#include <array>
#include <cstddef>
#include <limits>

namespace qbmm {

/// Five velocity moments (M0..M4) of a number density function in 1D.
/// This is the conservative state carried by every cell.
struct MomentVec {
  std::array<double, 5> m{};

  constexpr double& operator[](std::size_t k) { return m[k]; }
  constexpr double operator[](std::size_t k) const { return m[k]; }

  constexpr MomentVec& operator+=(const MomentVec& o) {
    for (std::size_t k = 0; k < 5; ++k) m[k] += o.m[k];
    return *this;
  }
  constexpr MomentVec& operator-=(const MomentVec& o) {
    for (std::size_t k = 0; k < 5; ++k) m[k] -= o.m[k];
    return *this;
  }
  constexpr MomentVec& operator*=(double s) {
    for (auto& v : m) v *= s;
    return *this;
  }

  friend constexpr MomentVec operator+(MomentVec a, const MomentVec& b) { return a += b; }
  friend constexpr MomentVec operator-(MomentVec a, const MomentVec& b) { return a -= b; }
  friend constexpr MomentVec operator*(double s, MomentVec a) { return a *= s; }
  friend constexpr MomentVec operator*(MomentVec a, double s) { return a *= s; }
  friend constexpr bool operator==(const MomentVec&, const MomentVec&) = default;
};

/// Flux vectors and slopes share the moment layout.
using Vec5 = MomentVec;

/// Normalized central moments and the last Hankel margin of a moment vector.
/// Strict realizability is m0 > 0, e > 0, z > 0.
struct RealizabilityMargins {
  double m0 = 0.0;
  double e = 0.0;    // central variance
  double q = 0.0;    // central third moment
  double eta = 0.0;  // central fourth moment
  double z = 0.0;    // eta - e^2 - q^2/e
};

/// Value reported for z when e <= 0, so comparisons stay total.
inline constexpr double kUndefinedZ = -std::numeric_limits<double>::max();

using Hankel3 = std::array<std::array<double, 3>, 3>;

Hankel3 hankel(const MomentVec& v) noexcept;

/// Leading principal minors (1x1, 2x2, 3x3) of the Hankel matrix.
std::array<double, 3> hankel_minors(const MomentVec& v) noexcept;

/// det of the 3x3 Hankel matrix, expanded symbolically in the moments.
double hankel_det(const MomentVec& v) noexcept;

/// Throws ZeroDensity when m0 == 0.
RealizabilityMargins margins(const MomentVec& M);

/// m0, e and z compared against rel_margin-scaled thresholds; rel_margin = 0 gives the
/// plain strict inequalities.
bool is_strictly_realizable(const MomentVec& M, double rel_margin = 0.0) noexcept;

/// Weaker test for states allowed to touch the boundary of moment space:
/// m0 > 0, e >= -tol*(1 + M2/M0), z >= -tol*(1 + |eta|).
bool is_realizable_within(const MomentVec& M, double tol) noexcept;

/// rho * (1, U, U^2 + theta, U^3 + 3U theta, U^4 + 6U^2 theta + 3 theta^2).
/// Throws NegativeInput for rho < 0 or theta < 0.
MomentVec maxwellian_moments(double rho, double U, double theta);

/// Macroscopic (rho, U, theta) of a moment vector. Throws ZeroDensity when M0 == 0.
struct Macros {
  double rho;
  double U;
  double theta;
};
Macros macros(const MomentVec& M);

}  // namespace qbmm
