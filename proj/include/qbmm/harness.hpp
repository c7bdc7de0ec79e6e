#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qbmm/closures.hpp"
#include "qbmm/scheme.hpp"

namespace qbmm {

/// An initial value is given either through closure primitives or as raw moments.
using InitialValue = std::variant<EqmomParams, HyqmomParams, MomentVec>;

MomentVec to_moments(const InitialValue& v) noexcept;

struct Preset {
  std::string name;
  double x_lo = -1.0;
  double x_hi = 1.0;
  double end_time = 0.1;
  BcKind left_bc = BcKind::Outflow;
  BcKind right_bc = BcKind::Outflow;
  double default_tau = kInfinity;
  std::vector<double> tau_options;
  std::function<InitialValue(double)> eqmom_ic;
  std::function<InitialValue(double)> hyqmom_ic;

  InitialValue initial_value(Closure closure, double x) const;
};

/// smooth | riemann | shock_tube | shu_osher | double_rarefaction. Throws UnknownPreset.
Preset build_preset(const std::string& name);

std::vector<std::string> preset_names();

/// Raw-moment Riemann data (left == right gives a uniform state).
Preset build_custom_preset(const MomentVec& left, const MomentVec& right, double x_jump,
                           double x_lo, double x_hi, double end_time, BcKind left_bc,
                           BcKind right_bc);

/// Cell values from the initial data sampled at cell centers. Throws NotRealizable if
/// any cell is not strictly realizable.
GridState init_state(const Preset& preset, Closure closure, int n_cells);

/// Boundary conditions of the preset; inflow sides take the initial value just
/// outside the domain.
BoundarySpec preset_boundary(const Preset& preset, Closure closure, double dx);

struct ErrorReport {
  std::array<double, 5> e1{};
  std::array<double, 5> e2{};
};

/// e1 = (1/Nx) sum |d|,  e2 = (1/Nx) sqrt(sum d^2), per moment. Throws LengthMismatch.
ErrorReport error_norms(std::span<const MomentVec> sol, std::span<const MomentVec> ref);

/// Coarse cell value = mean of the `ratio` fine cells it contains. Throws IndivisibleRatio.
std::vector<MomentVec> restrict_reference(const GridState& fine, int ratio);

struct SimulationSpec {
  Preset preset;
  Closure closure = Closure::Eqmom;
  int n_cells = 800;
  double cfl = 0.4;
  double a = kDefaultA;
  SourceSpec source;
  std::optional<double> end_time;
  std::optional<std::pair<BcKind, BcKind>> bc_override;
  bool limiter = true;
};

using StepCallback = std::function<void(int, const GridState&, const StepStats&)>;

struct SimulationResult {
  GridState state;
  int steps = 0;
  double theta_min = 1.0;
  AuditReport worst;  // smallest margins seen over all accepted steps
};

SchemeConfig scheme_config(const SimulationSpec& spec, const GridState& grid);

SimulationResult simulate(const SimulationSpec& spec, const StepCallback& on_step = {});

struct ConvergenceRow {
  int n_cells = 0;
  ErrorReport errors;
  std::array<double, 5> rate_e1{};  // NaN on the first row
  std::array<double, 5> rate_e2{};
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double seconds = 0.0;
};

/// Runs `base` at each resolution and at ref_resolution, and compares against the
/// restricted reference. rate = log(e_prev / e) / log(n / n_prev).
ConvergenceTable convergence_study(const SimulationSpec& base, std::span<const int> resolutions,
                                   int ref_resolution);

}  // namespace qbmm
