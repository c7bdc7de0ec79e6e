#include "qbmm/closures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <string>

#include <Eigen/Eigenvalues>

#include "qbmm/error.hpp"

namespace qbmm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSqrt3 = 1.7320508075688772;

// |q'| below this is treated as zero skewness (the EQMOM excluded set lives there).
constexpr double kSkewFloor = 1e-10;

// Rounding noise of standardized central moments recovered from raw moments. The
// cancellation grows like (|U|/sqrt(e))^4, so a fixed threshold is either too tight
// for fast states or too loose for slow ones.
double standardized_noise(double U, double e) {
  const double drift = 1.0 + std::abs(U) / std::sqrt(e);
  const double d2 = drift * drift;
  return 32.0 * kEps * d2 * d2;
}

// Root of f on [lo, hi] given sign(f(lo)) != sign(f(hi)); Newton steps that leave the
// bracket fall back to bisection.
template <class F, class DF>
double bracketed_newton(F f, DF df, double lo, double hi, double abs_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw Error(ErrorCode::RootFindFailure, "sigma^2 cubic has no sign change on bracket");

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * kEps * std::abs(x)) return x;

    const double d = df(x);
    double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * kEps * std::abs(x)) return next;
    x = next;
  }
  if (hi - lo <= abs_tol) return 0.5 * (lo + hi);
  throw Error(ErrorCode::RootFindFailure, "sigma^2 cubic did not converge");
}

}  // namespace

std::string_view to_string(Closure c) noexcept {
  return c == Closure::Eqmom ? "eqmom" : "hyqmom";
}

Closure parse_closure(std::string_view name) {
  if (name == "eqmom") return Closure::Eqmom;
  if (name == "hyqmom") return Closure::Hyqmom;
  throw Error(ErrorCode::ValidationError, "unknown closure '" + std::string(name) + "'");
}

// --- Gaussian-EQMOM ---------------------------------------------------------

MomentVec eqmom_forward(const EqmomParams& W) noexcept {
  const double s = W.sigma * W.sigma;
  const double r1 = W.rho1, r2 = W.rho2, v1 = W.v1, v2 = W.v2;
  const double M0 = r1 + r2;
  const double M1 = r1 * v1 + r2 * v2;
  const double M2 = r1 * v1 * v1 + r2 * v2 * v2 + s * M0;
  const double M3 = r1 * v1 * v1 * v1 + r2 * v2 * v2 * v2 + 3.0 * s * M1;
  const double v1sq = v1 * v1, v2sq = v2 * v2;
  const double M4 = r1 * v1sq * v1sq + r2 * v2sq * v2sq + 6.0 * s * M2 - 3.0 * s * s * M0;
  return {{M0, M1, M2, M3, M4}};
}

namespace {

// zeta_cap bounds |zeta| / sqrt(e); past it the variance split is chosen so M0..M3 stay
// exact and the unrepresentable part of the kurtosis is dropped.
EqmomParams eqmom_invert_impl(const MomentVec& M, double zeta_cap, bool& capped) {
  capped = false;
  if (!is_strictly_realizable(M, 0.0))
    throw Error(ErrorCode::NotRealizable, "EQMOM inversion needs a strictly realizable state");

  const RealizabilityMargins r = margins(M);
  const double M0 = M[0];
  const double U = M[1] / M0;
  const double e = r.e;
  const double q = r.q;
  const double shape = r.eta - 3.0 * e * e;  // eta - 3e^2, zero for a single Gaussian
  const double skew = q / (e * std::sqrt(e));
  const double kurt = r.eta / (e * e);
  const double noise = std::max(kSkewFloor, standardized_noise(U, e));

  // In t = e - sigma^2 (the variance left for the two nodes) the cubic reads
  //   H(t) = 2 t^3 + (eta - 3e^2) t - q^2,
  // with H(0) = -q^2 and H(e) = e z > 0. For q != 0 it has a single root in (0, e).
  double s = 0.0;
  double t = 0.0;
  double zeta = 0.0;
  // Noise-level skew with kurtosis clearly above 3 is still an ordinary state unless
  // q vanishes exactly, so only exact zero is refused.
  if (std::abs(skew) <= noise && (kurt <= 3.0 + noise || q == 0.0)) {
    if (kurt > 3.0 + noise) {
      if (std::isinf(zeta_cap))
        throw Error(ErrorCode::ExcludedSet,
                    "zero skewness with kurtosis above 3 has no two-Gaussian representation");
      capped = true;
    }
    if (kurt >= 3.0 - noise) {
      s = e;
      t = 0.0;
    } else {
      t = e * std::sqrt(0.5 * (3.0 - kurt));
      s = e - t;
    }
  } else {
    const double q2 = q * q;
    const double tol = 1e-14 * e;
    const double half = 0.5 * e;
    const double H_half = 2.0 * half * half * half + shape * half - q2;
    if (H_half >= 0.0) {
      auto H = [&](double x) { return (2.0 * x * x + shape) * x - q2; };
      auto dH = [&](double x) { return 6.0 * x * x + shape; };
      t = bracketed_newton(H, dH, 0.0, half, tol);
      s = e - t;
    } else {
      // Root close to t = e: iterate on s = sigma^2 directly to keep its precision,
      //   G(s) = e z - (3e^2 + eta) s + 6 e s^2 - 2 s^3.
      const double ez = e * r.z;
      const double c1 = 3.0 * e * e + r.eta;
      auto G = [&](double x) { return ez - x * (c1 - x * (6.0 * e - 2.0 * x)); };
      auto dG = [&](double x) { return -c1 + x * (12.0 * e - 6.0 * x); };
      s = bracketed_newton(G, dG, 0.0, half, tol);
      t = e - s;
    }
    zeta = q / (2.0 * t);
    const double zeta_max = zeta_cap * std::sqrt(e);
    if (std::abs(zeta) > zeta_max) {
      capped = true;
      zeta = std::copysign(zeta_max, q);
      t = std::abs(q) / (2.0 * zeta_max);
      s = e - t;
    }
  }

  EqmomParams W;
  W.sigma = std::sqrt(s);
  if (t <= 0.0) {
    W.rho1 = W.rho2 = 0.5 * M0;
    W.v1 = W.v2 = U;
    return W;
  }
  const double root = std::sqrt(zeta * zeta + t);
  double d_minus, d_plus;  // node offsets from U
  if (zeta == 0.0) {
    d_minus = -root;
    d_plus = root;
  } else if (zeta > 0.0) {
    d_plus = zeta + root;
    d_minus = -t / d_plus;
  } else {
    d_minus = zeta - root;
    d_plus = -t / d_minus;
  }
  const double span = d_plus - d_minus;
  W.v1 = U + d_minus;
  W.v2 = U + d_plus;
  W.rho1 = M0 * (d_plus / span);
  W.rho2 = M0 * (-d_minus / span);
  return W;
}

// Largest lambda with det(lambda H(M) - H(F)) = 0; H(M) must be positive definite.
double pencil_max(const MomentVec& M, const Vec5& F) {
  Eigen::Matrix3d A, B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      A(i, j) = F[static_cast<std::size_t>(i + j)];
      B(i, j) = M[static_cast<std::size_t>(i + j)];
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::NotRealizable, "moment Hankel matrix is not positive definite");
  return es.eigenvalues().maxCoeff();
}

}  // namespace

EqmomParams eqmom_invert(const MomentVec& M) {
  bool capped = false;
  return eqmom_invert_impl(M, std::numeric_limits<double>::infinity(), capped);
}

EqmomParams eqmom_invert_bounded(const MomentVec& M, double zeta_cap, bool* capped) {
  bool c = false;
  const EqmomParams W = eqmom_invert_impl(M, zeta_cap, c);
  if (capped) *capped = c;
  return W;
}

WaveSpeedPair hankel_pencil_speeds(const MomentVec& M, const Vec5& F) {
  // The lower bound is the upper bound of the mirrored problem, which keeps the two
  // exactly antisymmetric under v -> -v.
  const MomentVec Mm{{M[0], -M[1], M[2], -M[3], M[4]}};
  const Vec5 Fm{{-F[0], F[1], -F[2], F[3], -F[4]}};
  return {-pencil_max(Mm, Fm), pencil_max(M, F)};
}

double eqmom_m5(const EqmomParams& W, const MomentVec& M) noexcept {
  const double s = W.sigma * W.sigma;
  const double v1sq = W.v1 * W.v1, v2sq = W.v2 * W.v2;
  return W.rho1 * v1sq * v1sq * W.v1 + W.rho2 * v2sq * v2sq * W.v2 + 10.0 * M[3] * s -
         15.0 * s * s * M[1];
}

WaveSpeedPair wave_speeds(const EqmomParams& W, double a) {
  if (!(a > kSqrt3))
    throw Error(ErrorCode::InvalidA, "EQMOM wave-speed constant must exceed sqrt(3), got " +
                                         std::to_string(a));
  const double spread = a * W.sigma;
  return {std::min({W.v1 - spread, W.v2 - spread, 0.0}),
          std::max({W.v1 + spread, W.v2 + spread, 0.0})};
}

// --- HyQMOM -----------------------------------------------------------------

MomentVec hyqmom_forward(const HyqmomParams& W) noexcept {
  MomentVec M;
  const double rho[3] = {W.rho1, W.rho2, W.rho3};
  const double v[3] = {W.v1, W.v2, W.v3};
  for (int i = 0; i < 3; ++i) {
    double p = rho[i];
    for (int k = 0; k < 5; ++k) {
      M[k] += p;
      p *= v[i];
    }
  }
  return M;
}

bool hyqmom_is_degenerate(const MomentVec& M) {
  if (!(M[0] > 0.0)) throw Error(ErrorCode::NotRealizable, "HyQMOM inversion needs M0 > 0");
  const double U = M[1] / M[0];
  const double e = (M[0] * M[2] - M[1] * M[1]) / (M[0] * M[0]);
  return e <= 1e-14 * (1.0 + U * U);
}

HyqmomParams hyqmom_invert(const MomentVec& M) {
  for (double v : M.m)
    if (!std::isfinite(v)) throw Error(ErrorCode::NotRealizable, "non-finite moment");
  const double M0 = M[0];
  const double U = M[1] / M0;
  HyqmomParams W;
  if (hyqmom_is_degenerate(M)) {
    W.rho2 = M0;
    W.v1 = W.v2 = W.v3 = U;
    return W;
  }
  const RealizabilityMargins r = margins(M);
  const double e = r.e;
  const double sd = std::sqrt(e);
  const double skew = r.q / (e * sd);
  double excess = r.z / (e * e);  // eta' - 1 - q'^2, the middle node's share
  if (excess < -1e-10)
    throw Error(ErrorCode::NotRealizable, "HyQMOM state outside moment space (z < 0)");
  excess = std::max(excess, 0.0);

  const double P = 1.0 + excess;  // eta' - q'^2 = -x1 x3
  const double s = std::sqrt(4.0 * P + skew * skew);
  double x1, x3;
  if (skew == 0.0) {
    x1 = -0.5 * s;
    x3 = 0.5 * s;
  } else if (skew > 0.0) {
    x3 = 0.5 * (skew + s);
    x1 = -2.0 * P / (s + skew);
  } else {
    x1 = 0.5 * (skew - s);
    x3 = 2.0 * P / (s - skew);
  }
  const double w1 = 1.0 / (s * -x1);
  const double w3 = 1.0 / (s * x3);
  const double w2 = excess / P;

  W.rho1 = M0 * w1;
  W.rho2 = M0 * w2;
  W.rho3 = M0 * w3;
  W.v1 = U + x1 * sd;
  W.v2 = U;
  W.v3 = U + x3 * sd;
  return W;
}

double hyqmom_m5(const HyqmomParams& W) noexcept {
  auto p5 = [](double v) {
    const double v2 = v * v;
    return v2 * v2 * v;
  };
  return W.rho1 * p5(W.v1) + W.rho2 * p5(W.v2) + W.rho3 * p5(W.v3);
}

WaveSpeedPair wave_speeds(const HyqmomParams& W) noexcept {
  return {std::min({W.v1, W.v2, W.v3, 0.0}), std::max({W.v1, W.v2, W.v3, 0.0})};
}

namespace {

// Roots of lambda^2 - q lambda - c = 0 for c > 0, smaller first.
std::pair<double, double> split_roots(double q, double c) {
  const double R = std::sqrt(q * q + 4.0 * c);
  if (q >= 0.0) {
    const double hi = 0.5 * (q + R);
    return {-2.0 * c / (R + q), hi};
  }
  const double lo = 0.5 * (q - R);
  return {lo, 2.0 * c / (R - q)};
}

}  // namespace

std::optional<std::array<double, 5>> hyqmom_eigenvalues(const MomentVec& M) {
  if (hyqmom_is_degenerate(M)) return std::nullopt;
  const RealizabilityMargins r = margins(M);
  const double excess = r.z / (r.e * r.e);  // P - 1
  if (!(excess > 0.0)) return std::nullopt;
  // Standardized, the closure gives m5 = q (2 eta - q^2). The flux Jacobian is a
  // companion matrix with characteristic polynomial
  //   lambda (lambda^2 - q lambda + y1)(lambda^2 - q lambda + y2),
  // y^2 + 2P y + P = 0, P = eta - q^2, so -y1 = P + sqrt(P (P - 1)) and -y2 = P / -y1.
  const double sd = std::sqrt(r.e);
  const double skew = r.q / (r.e * sd);
  const double P = 1.0 + excess;
  const double c_outer = P + std::sqrt(P * excess);
  const double c_inner = P / c_outer;
  const auto [o_lo, o_hi] = split_roots(skew, c_outer);
  const auto [i_lo, i_hi] = split_roots(skew, c_inner);
  const double U = M[1] / M[0];
  return std::array<double, 5>{U + sd * o_lo, U + sd * i_lo, U, U + sd * i_hi, U + sd * o_hi};
}

WaveSpeedPair hyqmom_characteristic_speeds(const MomentVec& M) {
  const WaveSpeedPair nodes = wave_speeds(hyqmom_invert(M));
  const auto lam = hyqmom_eigenvalues(M);
  if (!lam) return nodes;
  return {std::min(nodes.minus, (*lam)[0]), std::max(nodes.plus, (*lam)[4])};
}

ClosedState close_state(const ClosureSpec& spec, const MomentVec& M) {
  ClosedState out;
  out.M = M;
  if (spec.kind == Closure::Eqmom) {
    bool capped = false;
    const EqmomParams W = eqmom_invert_bounded(M, kEqmomZetaCap, &capped);
    out.m5 = eqmom_m5(W, M);
    out.speeds = wave_speeds(W, spec.a);
    if (capped) {
      // W no longer reproduces M4, so the node speeds alone do not bound the flux.
      const WaveSpeedPair p = hankel_pencil_speeds(M, physical_flux(M, out.m5));
      const double pad = 1e-8 * (std::abs(M[1] / M[0]) + W.sigma);
      out.speeds.minus = std::min(out.speeds.minus, p.minus - pad);
      out.speeds.plus = std::max(out.speeds.plus, p.plus + pad);
    }
    out.params = W;
  } else {
    const HyqmomParams W = hyqmom_invert(M);
    out.m5 = hyqmom_m5(W);
    out.speeds = spec.characteristic_speeds ? hyqmom_characteristic_speeds(M) : wave_speeds(W);
    out.params = W;
  }
  return out;
}

}  // namespace qbmm
