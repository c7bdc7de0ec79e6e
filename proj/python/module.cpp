#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <sstream>
#include <string>

#include "qbmm/cli.hpp"
#include "qbmm/closures.hpp"
#include "qbmm/error.hpp"
#include "qbmm/harness.hpp"
#include "qbmm/moments.hpp"
#include "qbmm/scheme.hpp"

namespace py = pybind11;
using qbmm::MomentVec;

namespace {

using Arr5 = std::array<double, 5>;

MomentVec mv(const Arr5& a) { return MomentVec{a}; }

py::array_t<double> to_array(const qbmm::GridState& g) {
  py::array_t<double> out({static_cast<py::ssize_t>(g.n_cells()), py::ssize_t{5}});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < g.n_cells(); ++i)
    for (py::ssize_t k = 0; k < 5; ++k) r(i, k) = g[i][static_cast<std::size_t>(k)];
  return out;
}

py::dict eqmom_dict(const qbmm::EqmomParams& W) {
  py::dict d;
  d["rho1"] = W.rho1;
  d["v1"] = W.v1;
  d["rho2"] = W.rho2;
  d["v2"] = W.v2;
  d["sigma"] = W.sigma;
  return d;
}

py::dict hyqmom_dict(const qbmm::HyqmomParams& W) {
  py::dict d;
  d["rho"] = std::array<double, 3>{W.rho1, W.rho2, W.rho3};
  d["v"] = std::array<double, 3>{W.v1, W.v2, W.v3};
  return d;
}

qbmm::ClosureSpec closure_spec(const std::string& name, double a) {
  qbmm::ClosureSpec s;
  s.kind = qbmm::parse_closure(name);
  s.a = a;
  return s;
}

}  // namespace

PYBIND11_MODULE(_qbmm, m) {
  m.doc() = "Realizability-preserving finite-volume solver for five-moment closures";

  // qbmm.Error carries the failure class in `code`.
  static PyObject* error_type = PyErr_NewException("qbmm._qbmm.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::reinterpret_borrow<py::object>(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qbmm::Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(qbmm::to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.attr("DEFAULT_A") = qbmm::kDefaultA;

  m.def("maxwellian_moments", [](double rho, double U, double theta) {
    return qbmm::maxwellian_moments(rho, U, theta).m;
  });
  m.def("margins", [](const Arr5& M) {
    const auto r = qbmm::margins(mv(M));
    py::dict d;
    d["m0"] = r.m0;
    d["e"] = r.e;
    d["q"] = r.q;
    d["eta"] = r.eta;
    d["z"] = r.z;
    return d;
  });
  m.def("hankel", [](const Arr5& v) { return qbmm::hankel(mv(v)); });
  m.def("is_strictly_realizable",
        [](const Arr5& M, double rel_margin) { return qbmm::is_strictly_realizable(mv(M), rel_margin); },
        py::arg("M"), py::arg("rel_margin") = 0.0);

  m.def("eqmom_forward", [](double rho1, double v1, double rho2, double v2, double sigma) {
    return qbmm::eqmom_forward({rho1, v1, rho2, v2, sigma}).m;
  });
  m.def("eqmom_invert", [](const Arr5& M) { return eqmom_dict(qbmm::eqmom_invert(mv(M))); });
  m.def("eqmom_m5", [](const Arr5& M) {
    const MomentVec v = mv(M);
    return qbmm::eqmom_m5(qbmm::eqmom_invert(v), v);
  });
  m.def("hyqmom_forward", [](const std::array<double, 3>& rho, const std::array<double, 3>& v) {
    return qbmm::hyqmom_forward({rho[0], rho[1], rho[2], v[0], v[1], v[2]}).m;
  });
  m.def("hyqmom_invert", [](const Arr5& M) { return hyqmom_dict(qbmm::hyqmom_invert(mv(M))); });
  m.def("hyqmom_m5", [](const Arr5& M) { return qbmm::hyqmom_m5(qbmm::hyqmom_invert(mv(M))); });

  m.def("wave_speeds", [](const Arr5& M, const std::string& closure, double a) {
          const auto s = qbmm::close_state(closure_spec(closure, a), mv(M)).speeds;
          return std::pair{s.minus, s.plus};
        },
        py::arg("M"), py::arg("closure"), py::arg("a") = qbmm::kDefaultA);
  m.def("hll_flux",
        [](const Arr5& left, const Arr5& right, const std::string& closure, double a) {
          const auto r = qbmm::hll_flux(mv(left), mv(right), closure_spec(closure, a));
          return py::make_tuple(r.flux.m, std::pair{r.speeds.minus, r.speeds.plus});
        },
        py::arg("left"), py::arg("right"), py::arg("closure"), py::arg("a") = qbmm::kDefaultA);
  m.def("bgk_source", [](const Arr5& M, double tau) { return qbmm::bgk_source(mv(M), tau).m; });
  m.def("mu_star", [](const Arr5& M, const Arr5& S) { return qbmm::mu_star(mv(M), mv(S)); });

  m.def("preset_names", &qbmm::preset_names);
  m.def("initial_state", [](const std::string& preset, const std::string& closure, int nx) {
    return to_array(qbmm::init_state(qbmm::build_preset(preset), qbmm::parse_closure(closure), nx));
  });

  m.def("simulate",
        [](const std::string& config_text) {
          const qbmm::RunConfig cfg = qbmm::parse_config(config_text);
          qbmm::SimulationResult res;
          {
            py::gil_scoped_release release;
            res = qbmm::simulate(qbmm::simulation_spec(cfg));
          }
          py::dict d;
          const auto& g = res.state;
          std::vector<double> x(static_cast<std::size_t>(g.n_cells()));
          for (int i = 0; i < g.n_cells(); ++i) x[static_cast<std::size_t>(i)] = g.x_center(i);
          d["x"] = py::array_t<double>(static_cast<py::ssize_t>(x.size()), x.data());
          d["M"] = to_array(g);
          d["time"] = g.time;
          d["steps"] = res.steps;
          d["theta_min"] = res.theta_min;
          d["min_z"] = res.worst.min_z;
          return d;
        },
        py::arg("config_text"),
        "Runs a `key = value` configuration and returns the final cell averages.");

  m.def("run", [](const std::string& config_text) {
    const qbmm::RunConfig cfg = qbmm::parse_config(config_text);
    std::ostringstream log, err;
    int status;
    {
      py::gil_scoped_release release;
      status = qbmm::run(cfg, log, err);
    }
    return py::make_tuple(status, log.str(), err.str());
  });
}
