#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wlab/dyadic_grid.hpp"
#include "wlab/io.hpp"
#include "wlab/pd_system_solver.hpp"
#include "wlab/verify.hpp"
#include "wlab/weighted_measure.hpp"

namespace py = pybind11;
using wlab::json;

namespace {
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::object& o) {
    return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// (nt, n_1, ..., n_d, d1) array of node values
py::array_t<double> node_array(const wlab::NodeField& u) {
    std::vector<py::ssize_t> shape = {u.nt()};
    for (int n : u.spec().n_nodes) shape.push_back(n);
    shape.push_back(u.d1());
    py::array_t<double> a(shape);
    // NodeField stores the first space axis slowest after time, matching C order
    std::copy(u.values().begin(), u.values().end(), a.mutable_data());
    return a;
}

py::dict solve(const py::dict& config, bool parabolic) {
    const auto S = wlab::io::parse_solve_config(from_py(config), parabolic);
    const wlab::NodeField f = wlab::io::sample_forcing(S.forcing, S.grid);
    py::dict out;
    wlab::NodeField u;
    wlab::AprioriTerms T;
    double residual = 0.0, delta = 0.0;
    {
        py::gil_scoped_release nogil;
        if (parabolic) {
            auto sol = wlab::solve_parabolic(S.A, f, S.solver);
            residual = sol.residual;
            delta = sol.ellipticity.delta;
            u = std::move(sol.u);
            T = wlab::apriori_ratio_parabolic(u, f, S.solver.norm);
        } else {
            auto sol = wlab::solve_elliptic(S.A, f, S.solver);
            residual = sol.residual;
            delta = sol.ellipticity.delta;
            u = std::move(sol.u);
            T = wlab::apriori_ratio_elliptic(u, f, S.solver.norm);
        }
    }
    out["u"] = node_array(u);
    out["f"] = node_array(f);
    out["residual"] = residual;
    out["delta"] = delta;
    py::dict t;
    t["inv_u"] = T.inv_u;
    t["u_x"] = T.u_x;
    t["u_xx"] = T.u_xx;
    t["u_t"] = T.u_t;
    t["f"] = T.f;
    t["ratio"] = T.ratio;
    out["apriori"] = t;
    return out;
}
}  // namespace

PYBIND11_MODULE(_wlab, m) {
    m.doc() = "Weighted parabolic estimates lab";
    py::register_exception<wlab::verify::UsageError>(m, "UsageError", PyExc_KeyError);
    py::register_exception<wlab::verify::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("power_integral", &wlab::power_integral, py::arg("lo"), py::arg("hi"), py::arg("e"));
    m.def("interval_weight", [](double lo, double hi, double alpha) {
        return wlab::interval_weight(wlab::HalfLineInterval(lo, hi), wlab::WeightParams(alpha));
    }, py::arg("lo"), py::arg("hi"), py::arg("alpha"));
    m.def("phi_ratio", [](double x, double r, double alpha) { return wlab::phi_ratio(x, r, wlab::WeightParams(alpha)); },
          py::arg("x"), py::arg("r"), py::arg("alpha"));
    m.def("parent_ratio", [](int level, std::int64_t i0, std::vector<std::int64_t> i, double alpha) {
        return wlab::parent_ratio(wlab::ParabolicCube{level, i0, std::move(i)}, wlab::WeightParams(alpha));
    }, py::arg("level"), py::arg("i0"), py::arg("i"), py::arg("alpha"));
    m.def("parent_ratio_bound", &wlab::parent_ratio_bound, py::arg("alpha"), py::arg("d"));
    m.def("theta_admissible", &wlab::theta_admissible, py::arg("d"), py::arg("p"), py::arg("theta"));

    m.def("suite_names", &wlab::verify::suite_names);
    m.def("experiment_names", &wlab::verify::experiment_names);
    m.def("run_suite", [](const std::string& name, const py::object& cfg) {
        const json c = cfg.is_none() ? json::object() : from_py(cfg);
        wlab::SuiteReport R;
        {
            py::gil_scoped_release nogil;
            R = wlab::verify::run_suite(name, c);
        }
        return to_py(R.to_json());
    }, py::arg("name"), py::arg("config") = py::none());
    m.def("run_experiment", [](const std::string& name, const py::object& cfg) {
        const json c = cfg.is_none() ? json::object() : from_py(cfg);
        wlab::SuiteReport R;
        {
            py::gil_scoped_release nogil;
            R = wlab::verify::run_experiment(name, c);
        }
        return to_py(R.to_json());
    }, py::arg("name"), py::arg("config") = py::none());
    m.def("solve_parabolic", [](const py::dict& c) { return solve(c, true); }, py::arg("config"),
          "Solve u_t = A u_xx + f from a solver config dict; u has shape (nt, n_1, ..., n_d, d1).");
    m.def("solve_elliptic", [](const py::dict& c) { return solve(c, false); }, py::arg("config"));
}
