#include "qbmm/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "qbmm/error.hpp"

namespace qbmm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* want) {
  throw Error(ErrorCode::ValidationError,
              std::string(key) + " = '" + std::string(value) + "': expected " + want);
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "inf" || v == "infinity") return kInfinity;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "a number");
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  v = trim(v);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::vector<std::string_view> split(std::string_view v, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = v.find(sep, start);
    parts.push_back(trim(v.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

MomentVec to_moments_list(std::string_view key, std::string_view v) {
  const auto parts = split(v, ',');
  if (parts.size() != 5) bad_value(key, v, "five comma-separated moments");
  MomentVec M;
  for (std::size_t k = 0; k < 5; ++k) M[k] = to_double(key, parts[k]);
  return M;
}

BcKind to_bc_kind(std::string_view key, std::string_view v) {
  if (v == "periodic") return BcKind::Periodic;
  if (v == "outflow") return BcKind::Outflow;
  if (v == "inflow") return BcKind::Inflow;
  bad_value(key, v, "periodic, outflow or inflow");
}

RunMode to_mode(std::string_view v) {
  if (v == "run") return RunMode::Run;
  if (v == "converge") return RunMode::Converge;
  if (v == "audit") return RunMode::Audit;
  bad_value("mode", v, "run, converge or audit");
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  bad_value(key, v, "true or false");
}

}  // namespace

std::string_view to_string(RunMode m) noexcept {
  switch (m) {
    case RunMode::Run: return "run";
    case RunMode::Converge: return "converge";
    case RunMode::Audit: return "audit";
  }
  return "?";
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "preset") {
    cfg.preset = std::string(value);
  } else if (key == "closure") {
    cfg.closure = parse_closure(value);
  } else if (key == "nx") {
    cfg.nx = to_int(key, value);
  } else if (key == "cfl") {
    cfg.cfl = to_double(key, value);
  } else if (key == "tau") {
    cfg.tau = to_double(key, value);
  } else if (key == "source_mode") {
    cfg.source_mode = parse_source_mode(value);
  } else if (key == "a") {
    cfg.a = to_double(key, value);
  } else if (key == "end_time") {
    cfg.end_time = to_double(key, value);
  } else if (key == "bc") {
    const auto parts = split(value, ',');
    if (parts.size() == 1) {
      const BcKind k = to_bc_kind(key, parts[0]);
      cfg.bc = std::pair{k, k};
    } else if (parts.size() == 2) {
      cfg.bc = std::pair{to_bc_kind(key, parts[0]), to_bc_kind(key, parts[1])};
    } else {
      bad_value(key, value, "one kind or left,right");
    }
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "mode") {
    cfg.mode = to_mode(value);
  } else if (key == "maxwellian_eval") {
    if (value == "post_convection") cfg.maxwellian_eval = MaxwellianEval::PostConvection;
    else if (value == "level_n") cfg.maxwellian_eval = MaxwellianEval::LevelN;
    else bad_value(key, value, "post_convection or level_n");
  } else if (key == "resolutions") {
    cfg.resolutions.clear();
    for (auto p : split(value, ',')) cfg.resolutions.push_back(to_int(key, p));
  } else if (key == "ref_nx") {
    cfg.ref_nx = to_int(key, value);
  } else if (key == "audit_log") {
    cfg.audit_log = std::string(value);
  } else if (key == "left") {
    cfg.left = to_moments_list(key, value);
  } else if (key == "right") {
    cfg.right = to_moments_list(key, value);
  } else if (key == "x_jump") {
    cfg.x_jump = to_double(key, value);
  } else if (key == "x_lo") {
    cfg.x_lo = to_double(key, value);
  } else if (key == "x_hi") {
    cfg.x_hi = to_double(key, value);
  } else if (key == "limiter") {
    cfg.limiter = to_bool(key, value);
  } else {
    throw Error(ErrorCode::ParseError, "unknown key '" + std::string(key) + "'");
  }
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); };
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.5))
    fail("cfl = " + format_number(cfg.cfl) + " outside (0, 1/2]");
  if (cfg.closure == Closure::Eqmom && !(cfg.a > std::sqrt(3.0)))
    fail("a = " + format_number(cfg.a) + " must exceed sqrt(3) for eqmom");
  if (cfg.nx < 4) fail("nx must be at least 4");
  if (cfg.tau && !(*cfg.tau > 0.0)) fail("tau must be positive");
  if (cfg.end_time && !(*cfg.end_time >= 0.0)) fail("end_time must be nonnegative");
  if (cfg.preset == "custom" && !(cfg.left && cfg.right))
    fail("custom preset needs left and right moment vectors");
  if (cfg.preset == "custom" && !(cfg.x_lo < cfg.x_hi)) fail("x_lo must be below x_hi");
  if (cfg.bc && ((cfg.bc->first == BcKind::Periodic) != (cfg.bc->second == BcKind::Periodic)))
    fail("periodic bc must apply to both sides");
  if (cfg.mode == RunMode::Converge) {
    if (cfg.resolutions.empty()) fail("resolutions must not be empty");
    for (int n : cfg.resolutions)
      if (n < 4 || cfg.ref_nx % n != 0)
        fail("ref_nx = " + std::to_string(cfg.ref_nx) + " is not a multiple of " +
             std::to_string(n));
  }
}

Preset preset_for(const RunConfig& cfg) {
  if (cfg.preset == "custom") {
    const double t = cfg.end_time.value_or(0.1);
    return build_custom_preset(*cfg.left, *cfg.right, cfg.x_jump, cfg.x_lo, cfg.x_hi, t,
                               BcKind::Outflow, BcKind::Outflow);
  }
  return build_preset(cfg.preset);
}

SimulationSpec simulation_spec(const RunConfig& cfg) {
  SimulationSpec spec;
  spec.preset = preset_for(cfg);
  spec.closure = cfg.closure;
  spec.n_cells = cfg.nx;
  spec.cfl = cfg.cfl;
  spec.a = cfg.a;
  spec.end_time = cfg.end_time;
  spec.bc_override = cfg.bc;
  spec.limiter = cfg.limiter;
  spec.source.tau = cfg.tau.value_or(spec.preset.default_tau);
  spec.source.eval = cfg.maxwellian_eval;
  if (cfg.source_mode)
    spec.source.mode = *cfg.source_mode;
  else
    spec.source.mode =
        std::isinf(spec.source.tau) ? SourceMode::Collisionless : SourceMode::ExplicitBGK;
  return spec;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_solution_csv(std::ostream& os, const GridState& state, const ClosureSpec& closure) {
  os << "x,M0,M1,M2,M3,M4,M5bar,";
  if (closure.kind == Closure::Eqmom)
    os << "rho1,v1,rho2,v2,sigma";
  else
    os << "rho1,rho2,rho3,v1,v2,v3";
  os << ",e_margin,z_margin\n";

  for (int i = 0; i < state.n_cells(); ++i) {
    const MomentVec& M = state[i];
    const ClosedState cs = close_state(closure, M);
    const RealizabilityMargins mg = margins(M);
    os << format_number(state.x_center(i));
    for (std::size_t k = 0; k < 5; ++k) os << ',' << format_number(M[k]);
    os << ',' << format_number(cs.m5);
    if (const auto* w = std::get_if<EqmomParams>(&cs.params)) {
      for (double p : {w->rho1, w->v1, w->rho2, w->v2, w->sigma}) os << ',' << format_number(p);
    } else {
      const auto& h = std::get<HyqmomParams>(cs.params);
      for (double p : {h.rho1, h.rho2, h.rho3, h.v1, h.v2, h.v3}) os << ',' << format_number(p);
    }
    os << ',' << format_number(mg.e) << ',' << format_number(mg.z) << '\n';
  }
}

void write_rates_csv(std::ostream& os, const ConvergenceTable& table) {
  os << "Nx";
  for (int k = 0; k < 5; ++k)
    os << ",e1_M" << k << ",order1_M" << k << ",e2_M" << k << ",order2_M" << k;
  os << '\n';
  auto rate = [](double r) { return std::isnan(r) ? std::string() : format_number(r); };
  for (const ConvergenceRow& row : table.rows) {
    os << row.n_cells;
    for (std::size_t k = 0; k < 5; ++k)
      os << ',' << format_number(row.errors.e1[k]) << ',' << rate(row.rate_e1[k]) << ','
         << format_number(row.errors.e2[k]) << ',' << rate(row.rate_e2[k]);
    os << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::ValidationError, "cannot write " + p.string());
  return f;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    validate_config(cfg);
    const std::filesystem::path out(cfg.out);
    const SimulationSpec spec = simulation_spec(cfg);

    if (cfg.mode == RunMode::Converge) {
      const ConvergenceTable table = convergence_study(spec, cfg.resolutions, cfg.ref_nx);
      std::ofstream f = open_output(out / "rates.csv");
      write_rates_csv(f, table);
      log << "converge: " << table.rows.size() << " resolutions against " << cfg.ref_nx
          << " cells, wrote " << (out / "rates.csv").string() << '\n';
      return 0;
    }

    std::string audit_path = cfg.audit_log;
    if (audit_path.empty() && cfg.mode == RunMode::Audit) audit_path = (out / "audit.csv").string();
    std::ofstream audit;
    if (!audit_path.empty()) {
      audit = open_output(audit_path);
      audit << "step,time,dt,min_m0,min_e,min_z,theta_min,theta_mean,limited_cells\n";
    }

    const SimulationResult res = simulate(spec, [&](int step, const GridState& s,
                                                    const StepStats& st) {
      if (!audit.is_open()) return;
      audit << step << ',' << format_number(s.time) << ',' << format_number(st.dt) << ','
            << format_number(st.audit.min_m0) << ',' << format_number(st.audit.min_e) << ','
            << format_number(st.audit.min_z) << ',' << format_number(st.theta_min) << ','
            << format_number(st.theta_mean) << ',' << st.limited_cells << '\n';
    });

    std::ofstream f = open_output(out / "solution.csv");
    write_solution_csv(f, res.state, {spec.closure, spec.a});
    log << spec.preset.name << " " << to_string(spec.closure) << " nx=" << spec.n_cells
        << " steps=" << res.steps << " t=" << format_number(res.state.time)
        << " min_z=" << format_number(res.worst.min_z) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qbmm
