#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <sstream>

#include "imethod/dynamics.hpp"
#include "imethod/functionals.hpp"
#include "imethod/io.hpp"
#include "imethod/multiplier.hpp"
#include "imethod/run.hpp"
#include "imethod/verification.hpp"

namespace py = pybind11;
using namespace imethod;

namespace {

using ComplexArray = py::array_t<complex, py::array::c_style | py::array::forcecast>;

Field to_field(const ComplexArray& a, double length) {
  const int dim = static_cast<int>(a.ndim());
  if (dim < 1) throw std::invalid_argument("field array needs at least one axis");
  for (int k = 1; k < dim; ++k) {
    if (a.shape(k) != a.shape(0)) throw std::invalid_argument("field array must be cubic");
  }
  Field f = Field::zeros(Grid::make(dim, static_cast<int>(a.shape(0)), length));
  std::copy(a.data(), a.data() + a.size(), f.values.begin());
  return f;
}

ComplexArray to_array(const Field& f) {
  std::vector<py::ssize_t> shape(f.grid.dim(), f.grid.points());
  ComplexArray out(shape);
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::dict energy_dict(const EnergyParts& e) {
  py::dict d;
  d["kinetic"] = e.kinetic;
  d["potential"] = e.potential;
  d["total"] = e.total();
  return d;
}

py::dict report_dict(const CheckReport& r) {
  return py::module_::import("json").attr("loads")(to_json(r).dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudospectral defocusing L2-critical NLS with I-method diagnostics.";

  m.def(
      "gaussian",
      [](int dim, int points, double length, double amplitude, double width) {
        InitialDataSpec spec;
        spec.amplitude = amplitude;
        spec.width = width;
        return to_array(synthesize_initial_data(Grid::make(dim, points, length), spec, 1.0));
      },
      py::arg("dim"), py::arg("points"), py::arg("length"), py::arg("amplitude") = 1.0,
      py::arg("width") = 1.0);

  m.def(
      "rough_field",
      [](int dim, int points, double length, double s, double delta, double amplitude,
         std::uint64_t seed) {
        return to_array(
            rough_field(Grid::make(dim, points, length), RoughDataSpec{s, delta, amplitude, seed}));
      },
      py::arg("dim"), py::arg("points"), py::arg("length"), py::arg("s"),
      py::arg("delta") = 0.05, py::arg("amplitude") = 1.0, py::arg("seed") = 0);

  m.def(
      "mass", [](const ComplexArray& u, double length) { return mass(to_field(u, length)); },
      py::arg("u"), py::arg("length"));

  m.def(
      "energy",
      [](const ComplexArray& u, double length) {
        const Field f = to_field(u, length);
        return energy_dict(energy(f, f.grid.dim()));
      },
      py::arg("u"), py::arg("length"));

  m.def(
      "modified_energy",
      [](const ComplexArray& u, double length, double N, double s) {
        const Field f = to_field(u, length);
        return energy_dict(modified_energy(f, N, s, f.grid.dim()));
      },
      py::arg("u"), py::arg("length"), py::arg("N"), py::arg("s"));

  m.def(
      "apply_i_operator",
      [](const ComplexArray& u, double length, double N, double s) {
        return to_array(apply_i_operator(to_field(u, length), N, s));
      },
      py::arg("u"), py::arg("length"), py::arg("N"), py::arg("s"));

  m.def(
      "sobolev_norm",
      [](const ComplexArray& u, double length, double s, bool homogeneous) {
        return sobolev_norm(to_field(u, length), s, homogeneous);
      },
      py::arg("u"), py::arg("length"), py::arg("s"), py::arg("homogeneous") = false);

  m.def(
      "interaction_action",
      [](const ComplexArray& u, double length) { return interaction_action(to_field(u, length)); },
      py::arg("u"), py::arg("length"));

  m.def(
      "evolve",
      [](const ComplexArray& u0, double length, double dt, double t_final, int stride) {
        StepConfig cfg;
        cfg.dt = dt;
        cfg.t_final = t_final;
        cfg.snapshot_stride = stride;
        const Field f = to_field(u0, length);
        const Trajectory traj = [&] {
          py::gil_scoped_release release;
          return evolve(f, cfg, f.grid.dim());
        }();
        py::list states;
        for (const auto& s : traj.states) states.append(to_array(s));
        return py::make_tuple(traj.times, states);
      },
      py::arg("u0"), py::arg("length"), py::arg("dt"), py::arg("t_final"), py::arg("stride") = 1,
      "Returns (times, states) at every stride-th step, both ends included.");

  m.def(
      "sweep",
      [](const ComplexArray& u0, double length, double s, std::vector<double> thresholds,
         double dt, double t_final, int stride) {
        StepConfig cfg;
        cfg.dt = dt;
        cfg.t_final = t_final;
        cfg.snapshot_stride = stride;
        const Field f = to_field(u0, length);
        const SweepResult r = [&] {
          py::gil_scoped_release release;
          return sweep_almost_conservation(f, s, thresholds, cfg, f.grid.dim());
        }();
        py::list points;
        for (const auto& p : r.points) {
          py::dict d;
          d["N"] = p.threshold;
          d["control"] = p.control;
          d["sup_increment"] = p.sup_increment;
          d["endpoint_change"] = p.endpoint_change;
          d["integrated_rate"] = p.integrated_rate;
          points.append(d);
        }
        return py::make_tuple(points, report_dict(r.report));
      },
      py::arg("u0"), py::arg("length"), py::arg("s"), py::arg("thresholds"), py::arg("dt"),
      py::arg("t_final"), py::arg("stride") = 1);

  m.def(
      "save_checkpoint",
      [](const ComplexArray& u, double length, double t, const std::filesystem::path& path) {
        save_checkpoint(to_field(u, length), t, path);
      },
      py::arg("u"), py::arg("length"), py::arg("t"), py::arg("path"));

  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        const auto cp = load_checkpoint(path);
        return py::make_tuple(to_array(cp.field), cp.field.grid.length(), cp.time);
      },
      py::arg("path"), "Returns (u, length, t).");

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config,
         std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed) {
        std::ostringstream o, e;
        int code;
        {
          py::gil_scoped_release release;
          code = execute(CliOptions{command, config, out, seed}, o, e);
        }
        return py::make_tuple(code, o.str(), e.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = py::none(),
      py::arg("seed") = py::none(), "Same as the command-line tool; returns (exit_code, stdout, stderr).");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_OSError);
  py::register_exception<SolverAbort>(m, "SolverAbort", PyExc_RuntimeError);
}
