#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbmm/harness.hpp"

namespace qbmm {

enum class RunMode { Run, Converge, Audit };

std::string_view to_string(RunMode m) noexcept;

struct RunConfig {
  std::string preset = "riemann";  // a preset name, or "custom" with left/right
  Closure closure = Closure::Eqmom;
  int nx = 800;
  double cfl = 0.4;
  std::optional<double> tau;  // unset: the preset's default
  std::optional<SourceMode> source_mode;
  double a = kDefaultA;
  std::optional<double> end_time;
  std::optional<std::pair<BcKind, BcKind>> bc;
  std::string out = "out";
  RunMode mode = RunMode::Run;
  MaxwellianEval maxwellian_eval = MaxwellianEval::PostConvection;
  std::vector<int> resolutions{40, 80, 160, 320, 640, 1280};
  int ref_nx = 10240;
  std::string audit_log;  // empty: audit.csv in out for audit mode, none otherwise
  std::optional<MomentVec> left;
  std::optional<MomentVec> right;
  double x_jump = 0.0;
  double x_lo = -1.0;
  double x_hi = 1.0;
  bool limiter = true;
};

/// Sets one key. Throws ParseError for unknown keys, ValidationError for malformed values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies config text on top of cfg without validating, so later overrides can follow.
void apply_config_text(RunConfig& cfg, std::string_view text);

/// Flat `key = value` lines with `#` comments. Throws ParseError (with the line number)
/// and ValidationError.
RunConfig parse_config(std::string_view text);

/// Checks the bounds: 0 < cfl <= 1/2, a > sqrt(3) for eqmom, nx >= 4, tau > 0.
void validate_config(const RunConfig& cfg);

Preset preset_for(const RunConfig& cfg);
SimulationSpec simulation_spec(const RunConfig& cfg);

/// Shortest round-trip decimal form, independent of locale.
std::string format_number(double v);

void write_solution_csv(std::ostream& os, const GridState& state, const ClosureSpec& closure);
void write_rates_csv(std::ostream& os, const ConvergenceTable& table);

/// Runs the configured mode, writing artifacts under cfg.out. Returns the exit status;
/// diagnostics go to `err`.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace qbmm
