#include "qbmm/moments.hpp"

#include <cmath>

#include "qbmm/error.hpp"

namespace qbmm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::NotRealizable: return "NotRealizable";
    case ErrorCode::ExcludedSet: return "ExcludedSet";
    case ErrorCode::RootFindFailure: return "RootFindFailure";
    case ErrorCode::InvalidA: return "InvalidA";
    case ErrorCode::NonpositiveTheta: return "NonpositiveTheta";
    case ErrorCode::CellAvgNotRealizable: return "CellAvgNotRealizable";
    case ErrorCode::RealizabilityLost: return "RealizabilityLost";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndivisibleRatio: return "IndivisibleRatio";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Hankel3 hankel(const MomentVec& v) noexcept {
  return {{{v[0], v[1], v[2]}, {v[1], v[2], v[3]}, {v[2], v[3], v[4]}}};
}

double hankel_det(const MomentVec& v) noexcept {
  const double M0 = v[0], M1 = v[1], M2 = v[2], M3 = v[3], M4 = v[4];
  return M0 * M2 * M4 - M0 * M3 * M3 - M1 * M1 * M4 + 2.0 * M1 * M2 * M3 - M2 * M2 * M2;
}

std::array<double, 3> hankel_minors(const MomentVec& v) noexcept {
  return {v[0], v[0] * v[2] - v[1] * v[1], hankel_det(v)};
}

RealizabilityMargins margins(const MomentVec& M) {
  const double M0 = M[0], M1 = M[1], M2 = M[2], M3 = M[3], M4 = M[4];
  if (M0 == 0.0) throw Error(ErrorCode::ZeroDensity, "margins of a state with M0 = 0");
  const double M0sq = M0 * M0;
  const double M1sq = M1 * M1;
  const double var_num = M0 * M2 - M1sq;

  RealizabilityMargins r;
  r.m0 = M0;
  r.e = var_num / M0sq;
  r.q = ((M3 * M0sq - M1sq * M1) - 3.0 * M1 * var_num) / (M0sq * M0);
  r.eta = (-3.0 * M1sq * M1sq + M4 * M0sq * M0 - 4.0 * M0sq * M1 * M3 + 6.0 * M0 * M1sq * M2) /
          (M0sq * M0sq);
  r.z = r.e > 0.0 ? r.eta - (r.e * r.e + r.q * r.q / r.e) : kUndefinedZ;
  return r;
}

bool is_strictly_realizable(const MomentVec& M, double rel_margin) noexcept {
  for (double v : M.m)
    if (!std::isfinite(v)) return false;
  if (!(M[0] > rel_margin * (1.0 + std::abs(M[0])))) return false;
  const RealizabilityMargins r = margins(M);
  const double e_ref = std::abs(M[2] / M[0]);
  if (!(r.e > rel_margin * (1.0 + e_ref))) return false;
  return r.z > rel_margin * (1.0 + std::abs(r.eta));
}

bool is_realizable_within(const MomentVec& M, double tol) noexcept {
  for (double v : M.m)
    if (!std::isfinite(v)) return false;
  if (!(M[0] > 0.0)) return false;
  const RealizabilityMargins r = margins(M);
  if (!(r.e >= -tol * (1.0 + std::abs(M[2] / M[0])))) return false;
  // A zero-variance state is a single atom; higher central moments must vanish with it.
  if (r.e <= 0.0) return std::abs(r.eta) <= tol * (1.0 + std::abs(M[4] / M[0]));
  return r.z >= -tol * (1.0 + std::abs(r.eta));
}

MomentVec maxwellian_moments(double rho, double U, double theta) {
  if (rho < 0.0 || theta < 0.0)
    throw Error(ErrorCode::NegativeInput, "maxwellian_moments requires rho >= 0 and theta >= 0");
  const double U2 = U * U;
  return {{rho, rho * U, rho * (U2 + theta), rho * (U2 * U + 3.0 * U * theta),
           rho * (U2 * U2 + 6.0 * U2 * theta + 3.0 * theta * theta)}};
}

Macros macros(const MomentVec& M) {
  if (M[0] == 0.0) throw Error(ErrorCode::ZeroDensity, "macros of a state with M0 = 0");
  return {M[0], M[1] / M[0], (M[0] * M[2] - M[1] * M[1]) / (M[0] * M[0])};
}

}  // namespace qbmm
