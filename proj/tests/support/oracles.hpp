#pragma once
// Independent reference computations for the tests. Nothing here calls into the
// library's closure or margin code.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "qbmm/moments.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// k-th raw moment of rho * N(U, s2), by composite Simpson over U +- 14 sigma.
inline double gaussian_moment(int k, double rho, double U, double s2, int intervals = 4000) {
  const double s = std::sqrt(s2);
  const double lo = U - 14.0 * s, hi = U + 14.0 * s;
  const double h = (hi - lo) / intervals;
  auto f = [&](double v) {
    const double t = (v - U) / s;
    return std::pow(v, k) * std::exp(-0.5 * t * t) / (s * std::sqrt(2.0 * kPi));
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return rho * sum * h / 3.0;
}

/// Moments 0..n of a two-Gaussian mixture with a shared variance, by quadrature.
inline std::vector<double> mixture_moments(double r1, double v1, double r2, double v2,
                                           double sigma, int n) {
  std::vector<double> out(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k)
    out[static_cast<std::size_t>(k)] =
        gaussian_moment(k, r1, v1, sigma * sigma) + gaussian_moment(k, r2, v2, sigma * sigma);
  return out;
}

/// sum_i w_i x_i^k for k = 0..n.
inline std::vector<double> node_moments(const std::vector<double>& w,
                                        const std::vector<double>& x, int n) {
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (int k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] += w[i] * std::pow(x[i], k);
  return out;
}

inline qbmm::MomentVec to_mv(const std::vector<double>& v) {
  return {{v[0], v[1], v[2], v[3], v[4]}};
}

/// Cofactor expansion of a 3x3 determinant along the first row.
inline double det3(const std::array<std::array<double, 3>, 3>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline std::array<std::array<double, 3>, 3> hankel_of(const qbmm::MomentVec& v) {
  return {{{v[0], v[1], v[2]}, {v[1], v[2], v[3]}, {v[2], v[3], v[4]}}};
}

/// Leading principal minors by direct evaluation.
inline std::array<double, 3> minors(const qbmm::MomentVec& v) {
  return {v[0], v[0] * v[2] - v[1] * v[1], det3(hankel_of(v))};
}

/// Central moments c1..c4 about the mean, from raw moments by binomial expansion.
inline std::array<double, 5> central(const qbmm::MomentVec& M) {
  const double U = M[1] / M[0];
  std::array<double, 5> c{};
  const double binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
  for (int n = 0; n <= 4; ++n) {
    double s = 0.0;
    for (int j = 0; j <= n; ++j)
      s += binom[n][j] * M[static_cast<std::size_t>(j)] * std::pow(-U, n - j);
    c[static_cast<std::size_t>(n)] = s / M[0];
  }
  return c;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned long long seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(gen); }
};

/// Moments of a random positive mixture of 2..4 Maxwellians.
inline qbmm::MomentVec random_mixture(Rng& r) {
  const int n = r.integer(2, 4);
  qbmm::MomentVec M{};
  for (int i = 0; i < n; ++i) {
    const double rho = r.uniform(0.05, 2.0), U = r.uniform(-2.0, 2.0), th = r.uniform(0.05, 2.0);
    M += qbmm::MomentVec{{rho, rho * U, rho * (U * U + th), rho * (U * U * U + 3 * U * th),
                          rho * (std::pow(U, 4) + 6 * U * U * th + 3 * th * th)}};
  }
  return M;
}

/// Moments of three weighted atoms at random distinct positions.
inline qbmm::MomentVec random_three_atoms(Rng& r) {
  const std::vector<double> w{r.uniform(0.05, 2.0), r.uniform(0.05, 2.0), r.uniform(0.05, 2.0)};
  const double a = r.uniform(-3.0, 3.0);
  const std::vector<double> x{a, a + r.uniform(0.2, 2.5), a + r.uniform(2.7, 5.0)};
  return to_mv(node_moments(w, x, 4));
}

}  // namespace oracle
