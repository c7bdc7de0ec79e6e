#include "qbmm/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "qbmm/error.hpp"

namespace qbmm {

namespace {

InitialValue eqmom(double rho1, double rho2, double v1, double v2, double sigma) {
  return EqmomParams{rho1, v1, rho2, v2, sigma};
}

InitialValue hyqmom(double rho1, double rho2, double rho3, double v1, double v2, double v3) {
  return HyqmomParams{rho1, rho2, rho3, v1, v2, v3};
}

Preset smooth() {
  Preset p;
  p.name = "smooth";
  p.x_lo = -1.0;
  p.x_hi = 1.0;
  p.end_time = 0.01;
  p.left_bc = p.right_bc = BcKind::Periodic;
  p.default_tau = 0.1;
  p.tau_options = {0.1};
  constexpr double pi = std::numbers::pi;
  p.eqmom_ic = [](double x) {
    return eqmom(1.0 + 0.2 * std::sin(pi * x), 1.0 + 0.2 * std::cos(pi * x), 1.0, -1.0, 1.0);
  };
  // Outer nodes sit at U +/- 1 around the mean U = 1; equal outer weights keep M1/M0 = U.
  p.hyqmom_ic = [](double x) {
    const double U = 1.0;
    return hyqmom(1.0 + 0.2 * std::sin(pi * x), 1.0 + 0.2 * std::cos(pi * x),
                  1.0 + 0.2 * std::sin(pi * x), U + 1.0, U, U - 1.0);
  };
  return p;
}

Preset riemann() {
  Preset p;
  p.name = "riemann";
  p.end_time = 0.1;
  p.tau_options = {kInfinity, 0.05};
  const MomentVec left{{1.0, 1.0, 4.0 / 3.0, 2.0, 10.0 / 3.0}};
  const MomentVec right{{1.0, -1.0, 4.0 / 3.0, -2.0, 10.0 / 3.0}};
  auto ic = [=](double x) -> InitialValue { return x < 0.0 ? left : right; };
  p.eqmom_ic = ic;
  p.hyqmom_ic = ic;
  return p;
}

Preset shock_tube() {
  Preset p;
  p.name = "shock_tube";
  p.end_time = 0.2;
  p.tau_options = {kInfinity, 0.05};
  p.eqmom_ic = [](double x) {
    return x < 0.0 ? eqmom(0.35, 0.65, -1.5, 2.0, 0.8) : eqmom(0.09, 0.01, -1.5, 2.0, 0.8);
  };
  p.hyqmom_ic = [](double x) {
    return x < 0.0 ? hyqmom(0.2, 0.35, 0.45, -1.5, -1.0, 2.0)
                   : hyqmom(0.05, 0.01, 0.04, -1.5, -1.0, 2.0);
  };
  return p;
}

Preset shu_osher() {
  Preset p;
  p.name = "shu_osher";
  p.x_lo = -5.0;
  p.x_hi = 5.0;
  p.end_time = 1.0;
  p.left_bc = BcKind::Inflow;
  p.right_bc = BcKind::Outflow;
  p.tau_options = {kInfinity, 0.05};
  p.eqmom_ic = [](double x) {
    if (x < -4.0) return eqmom(1.0, 1.0, 2.5, 1.0, 0.5);
    const double s = std::sin(5.0 * x);
    return eqmom(1.0 + 0.1 * s, 1.0 + 0.2 * s, -0.5, 2.0, 0.5);
  };
  p.hyqmom_ic = [](double x) {
    if (x < -4.0) return hyqmom(1.0, 1.0, 1.0, 2.5, 0.0, 1.0);
    const double s = std::sin(5.0 * x);
    return hyqmom(1.0 + 0.1 * s, 1.0 + 0.2 * s, 1.0 + 0.3 * s, -0.5, 0.0, 2.0);
  };
  return p;
}

Preset double_rarefaction() {
  Preset p;
  p.name = "double_rarefaction";
  p.end_time = 0.12;
  p.tau_options = {kInfinity, 0.05};
  p.eqmom_ic = [](double x) {
    return x < 0.0 ? eqmom(0.5, 0.5, -5.0, 1.0, 1.0) : eqmom(0.5, 0.5, -1.0, 5.0, 1.0);
  };
  p.hyqmom_ic = [](double x) {
    return x < 0.0 ? hyqmom(0.05, 0.9, 0.05, -5.0, -2.0, 1.0)
                   : hyqmom(0.05, 0.9, 0.05, -1.0, 2.0, 5.0);
  };
  return p;
}

}  // namespace

MomentVec to_moments(const InitialValue& v) noexcept {
  struct Visitor {
    MomentVec operator()(const EqmomParams& w) const { return eqmom_forward(w); }
    MomentVec operator()(const HyqmomParams& w) const { return hyqmom_forward(w); }
    MomentVec operator()(const MomentVec& m) const { return m; }
  };
  return std::visit(Visitor{}, v);
}

InitialValue Preset::initial_value(Closure closure, double x) const {
  return closure == Closure::Eqmom ? eqmom_ic(x) : hyqmom_ic(x);
}

std::vector<std::string> preset_names() {
  return {"smooth", "riemann", "shock_tube", "shu_osher", "double_rarefaction"};
}

Preset build_preset(const std::string& name) {
  if (name == "smooth") return smooth();
  if (name == "riemann") return riemann();
  if (name == "shock_tube") return shock_tube();
  if (name == "shu_osher") return shu_osher();
  if (name == "double_rarefaction") return double_rarefaction();
  throw Error(ErrorCode::UnknownPreset, "no preset named '" + name + "'");
}

Preset build_custom_preset(const MomentVec& left, const MomentVec& right, double x_jump,
                           double x_lo, double x_hi, double end_time, BcKind left_bc,
                           BcKind right_bc) {
  Preset p;
  p.name = "custom";
  p.x_lo = x_lo;
  p.x_hi = x_hi;
  p.end_time = end_time;
  p.left_bc = left_bc;
  p.right_bc = right_bc;
  p.tau_options = {kInfinity};
  auto ic = [=](double x) -> InitialValue { return x < x_jump ? left : right; };
  p.eqmom_ic = ic;
  p.hyqmom_ic = ic;
  return p;
}

GridState init_state(const Preset& preset, Closure closure, int n_cells) {
  GridState g(n_cells, preset.x_lo, preset.x_hi);
  for (int i = 0; i < n_cells; ++i) {
    g[i] = to_moments(preset.initial_value(closure, g.x_center(i)));
    if (!is_strictly_realizable(g[i], 0.0))
      throw Error(ErrorCode::NotRealizable,
                  preset.name + " initial data not strictly realizable at x = " +
                      std::to_string(g.x_center(i)));
  }
  return g;
}

BoundarySpec preset_boundary(const Preset& preset, Closure closure, double dx) {
  BoundarySpec bc;
  bc.left.kind = preset.left_bc;
  bc.right.kind = preset.right_bc;
  if (bc.left.kind == BcKind::Inflow)
    bc.left.inflow_state = to_moments(preset.initial_value(closure, preset.x_lo - 0.5 * dx));
  if (bc.right.kind == BcKind::Inflow)
    bc.right.inflow_state = to_moments(preset.initial_value(closure, preset.x_hi + 0.5 * dx));
  return bc;
}

ErrorReport error_norms(std::span<const MomentVec> sol, std::span<const MomentVec> ref) {
  if (sol.size() != ref.size())
    throw Error(ErrorCode::LengthMismatch, "solution and reference differ in length");
  ErrorReport rep;
  if (sol.empty()) return rep;
  const double nx = static_cast<double>(sol.size());
  for (std::size_t k = 0; k < 5; ++k) {
    double sum_abs = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
      const double d = sol[i][k] - ref[i][k];
      sum_abs += std::abs(d);
      sum_sq += d * d;
    }
    rep.e1[k] = sum_abs / nx;
    rep.e2[k] = std::sqrt(sum_sq) / nx;
  }
  return rep;
}

std::vector<MomentVec> restrict_reference(const GridState& fine, int ratio) {
  if (ratio <= 0 || fine.n_cells() % ratio != 0)
    throw Error(ErrorCode::IndivisibleRatio, std::to_string(fine.n_cells()) +
                                                 " fine cells do not split into groups of " +
                                                 std::to_string(ratio));
  const int coarse = fine.n_cells() / ratio;
  std::vector<MomentVec> out(static_cast<std::size_t>(coarse));
  for (int c = 0; c < coarse; ++c) {
    MomentVec sum;
    for (int k = 0; k < ratio; ++k) sum += fine[c * ratio + k];
    out[static_cast<std::size_t>(c)] = sum * (1.0 / ratio);
  }
  return out;
}

SchemeConfig scheme_config(const SimulationSpec& spec, const GridState& grid) {
  SchemeConfig cfg;
  cfg.closure = {spec.closure, spec.a};
  cfg.source = spec.source;
  cfg.cfl = spec.cfl;
  cfg.limiter = spec.limiter;
  Preset p = spec.preset;
  if (spec.bc_override) {
    p.left_bc = spec.bc_override->first;
    p.right_bc = spec.bc_override->second;
  }
  cfg.bc = preset_boundary(p, spec.closure, grid.dx());
  return cfg;
}

SimulationResult simulate(const SimulationSpec& spec, const StepCallback& on_step) {
  GridState g = init_state(spec.preset, spec.closure, spec.n_cells);
  const SchemeConfig cfg = scheme_config(spec, g);
  Solver solver(std::move(g), cfg);
  const double t_end = spec.end_time.value_or(spec.preset.end_time);

  SimulationResult res;
  res.worst = audit_realizability(solver.state(), spec.closure);
  res.steps = solver.run_to(t_end, [&](int step, const GridState& s, const StepStats& st) {
    res.theta_min = std::min(res.theta_min, st.theta_min);
    res.worst.min_m0 = std::min(res.worst.min_m0, st.audit.min_m0);
    res.worst.min_e = std::min(res.worst.min_e, st.audit.min_e);
    res.worst.min_z = std::min(res.worst.min_z, st.audit.min_z);
    if (on_step) on_step(step, s, st);
  });
  res.state = solver.state();
  return res;
}

ConvergenceTable convergence_study(const SimulationSpec& base, std::span<const int> resolutions,
                                   int ref_resolution) {
  const auto start = std::chrono::steady_clock::now();
  for (int n : resolutions)
    if (n <= 0 || ref_resolution % n != 0)
      throw Error(ErrorCode::IndivisibleRatio, "reference resolution " +
                                                   std::to_string(ref_resolution) +
                                                   " is not a multiple of " + std::to_string(n));
  SimulationSpec ref_spec = base;
  ref_spec.n_cells = ref_resolution;
  const GridState ref = simulate(ref_spec).state;

  ConvergenceTable table;
  for (std::size_t r = 0; r < resolutions.size(); ++r) {
    SimulationSpec spec = base;
    spec.n_cells = resolutions[r];
    const GridState sol = simulate(spec).state;
    const std::vector<MomentVec> ref_c = restrict_reference(ref, ref_resolution / spec.n_cells);

    ConvergenceRow row;
    row.n_cells = spec.n_cells;
    row.errors = error_norms(sol.interior(), ref_c);
    row.rate_e1.fill(std::numeric_limits<double>::quiet_NaN());
    row.rate_e2.fill(std::numeric_limits<double>::quiet_NaN());
    if (r > 0) {
      const ConvergenceRow& prev = table.rows.back();
      const double log_ratio = std::log(static_cast<double>(row.n_cells) / prev.n_cells);
      for (std::size_t k = 0; k < 5; ++k) {
        row.rate_e1[k] = std::log(prev.errors.e1[k] / row.errors.e1[k]) / log_ratio;
        row.rate_e2[k] = std::log(prev.errors.e2[k] / row.errors.e2[k]) / log_ratio;
      }
    }
    table.rows.push_back(row);
  }
  table.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

}  // namespace qbmm
