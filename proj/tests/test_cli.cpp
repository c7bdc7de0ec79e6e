#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qbmm/cli.hpp"
#include "qbmm/error.hpp"

using namespace qbmm;
namespace fs = std::filesystem;

namespace {

ErrorCode error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qbmm_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_config accepts a plain config") {
  const RunConfig c = parse_config("closure = hyqmom\npreset = riemann\nnx = 800\n");
  CHECK(c.closure == Closure::Hyqmom);
  CHECK(c.preset == "riemann");
  CHECK(c.nx == 800);

  const RunConfig d = parse_config(
      "# comment line\n"
      "tau = inf   # collisionless\n"
      "bc = outflow, inflow\n"
      "mode = converge\n"
      "resolutions = 40, 80\n"
      "ref_nx = 160\n"
      "source_mode = semi_implicit\n"
      "maxwellian_eval = level_n\n"
      "limiter = off\n");
  CHECK(std::isinf(*d.tau));
  CHECK(d.bc->first == BcKind::Outflow);
  CHECK(d.bc->second == BcKind::Inflow);
  CHECK(d.mode == RunMode::Converge);
  CHECK(d.resolutions == std::vector<int>{40, 80});
  CHECK(*d.source_mode == SourceMode::SemiImplicitBGK);
  CHECK(d.maxwellian_eval == MaxwellianEval::LevelN);
  CHECK_FALSE(d.limiter);
}

TEST_CASE("parse_config rejects bad input") {
  CHECK(error_code([] { parse_config("cfl = 0.9\n"); }) == ErrorCode::ValidationError);
  CHECK(error_text([] { parse_config("cfl = 0.9\n"); }).find("cfl") != std::string::npos);
  CHECK(error_code([] { parse_config("a = 1.5\nclosure = eqmom\n"); }) ==
        ErrorCode::ValidationError);
  CHECK_NOTHROW(parse_config("a = 1.5\nclosure = hyqmom\n"));
  CHECK(error_code([] { parse_config("nx = 800\nspeed = 3\n"); }) == ErrorCode::ParseError);
  CHECK(error_text([] { parse_config("nx = 800\nspeed = 3\n"); }).find("line 2") !=
        std::string::npos);
  CHECK(error_code([] { parse_config("\n\nnx 800\n"); }) == ErrorCode::ParseError);
  CHECK(error_text([] { parse_config("\n\nnx 800\n"); }).find("line 3") != std::string::npos);
  CHECK(error_code([] { parse_config("nx = many\n"); }) == ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("tau = 0\n"); }) == ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("nx = 2\n"); }) == ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("bc = periodic, outflow\n"); }) ==
        ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("preset = custom\n"); }) == ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("mode = converge\nresolutions = 30\n"); }) ==
        ErrorCode::ValidationError);
  CHECK(error_code([] { parse_config("left = 1, 2, 3\n"); }) == ErrorCode::ValidationError);
}

TEST_CASE("simulation_spec defaults") {
  SimulationSpec s = simulation_spec(parse_config("preset = smooth\n"));
  CHECK(s.source.tau == 0.1);
  CHECK(s.source.mode == SourceMode::ExplicitBGK);
  s = simulation_spec(parse_config("preset = riemann\n"));
  CHECK(s.source.mode == SourceMode::Collisionless);
  s = simulation_spec(parse_config("preset = riemann\ntau = 0.05\nsource_mode = semi_implicit\n"));
  CHECK(s.source.mode == SourceMode::SemiImplicitBGK);
  CHECK(s.source.eval == MaxwellianEval::PostConvection);
}

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  const double v = 1.0 / 3.0;
  CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(v).size() <= 19);
}

TEST_CASE("run writes a uniform solution for a uniform Maxwellian") {
  const fs::path out = scratch("uniform");
  RunConfig c = parse_config(
      "preset = custom\nleft = 1, 0.5, 1.25, 1.625, 4.5625\nright = 1, 0.5, 1.25, 1.625, 4.5625\n"
      "closure = hyqmom\nnx = 16\nbc = periodic\nend_time = 0.05\n");
  c.out = out.string();
  std::ostringstream log, err;
  REQUIRE(run(c, log, err) == 0);
  const auto rows = lines(slurp(out / "solution.csv"));
  REQUIRE(rows.size() == 17);
  CHECK(rows[0] == "x,M0,M1,M2,M3,M4,M5bar,rho1,rho2,rho3,v1,v2,v3,e_margin,z_margin");
  auto tail = [](const std::string& r) { return r.substr(r.find(',')); };
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(tail(rows[i]) == tail(rows[1]));
}

TEST_CASE("riemann hyqmom run at 800 cells keeps z positive and is deterministic") {
  const fs::path a = scratch("riemann_a"), b = scratch("riemann_b");
  RunConfig c = parse_config("preset = riemann\nclosure = hyqmom\nnx = 800\nmode = audit\n");
  std::ostringstream log, err;
  c.out = a.string();
  REQUIRE(run(c, log, err) == 0);
  c.out = b.string();
  REQUIRE(run(c, log, err) == 0);

  const std::string sa = slurp(a / "solution.csv");
  CHECK(sa == slurp(b / "solution.csv"));
  CHECK(slurp(a / "audit.csv") == slurp(b / "audit.csv"));

  const auto rows = lines(sa);
  REQUIRE(rows.size() == 801);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double z = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(z > 0);
  }
  const auto audit = lines(slurp(a / "audit.csv"));
  CHECK(audit[0] == "step,time,dt,min_m0,min_e,min_z,theta_min,theta_mean,limited_cells");
  CHECK(audit.size() > 10);
}

TEST_CASE("converge mode writes rates") {
  const fs::path out = scratch("converge");
  RunConfig c = parse_config(
      "preset = smooth\nclosure = eqmom\nmode = converge\nresolutions = 40, 80, 160\n"
      "ref_nx = 640\n");
  c.out = out.string();
  std::ostringstream log, err;
  REQUIRE(run(c, log, err) == 0);
  const auto rows = lines(slurp(out / "rates.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("Nx,e1_M0,order1_M0,e2_M0,order2_M0,e1_M1", 0) == 0);
  CHECK(rows[1].rfind("40,", 0) == 0);
  // first rate column is empty on the first row
  CHECK(rows[1].find(",,") != std::string::npos);
  std::vector<std::string> cols;
  std::istringstream is(rows[3]);
  for (std::string f; std::getline(is, f, ',');) cols.push_back(f);
  const double rate = std::stod(cols[2]);
  CHECK(rate > 1.5);
  CHECK(rate < 2.7);
}

TEST_CASE("run reports failures with a nonzero status") {
  RunConfig c = parse_config(
      "preset = custom\nleft = 1, 0, 1, 0, 0.5\nright = 1, 0, 1, 0, 3\nnx = 8\n");
  c.out = scratch("fail").string();
  std::ostringstream log, err;
  CHECK(run(c, log, err) == 1);
  CHECK(err.str().find("NotRealizable") != std::string::npos);
}

}  // TEST_SUITE
