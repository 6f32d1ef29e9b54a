// Python bindings: thin wrappers returning plain lists and dicts.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sphere2b/blowup.hpp"
#include "sphere2b/collision.hpp"
#include "sphere2b/integrate.hpp"
#include "sphere2b/topology.hpp"
#include "sphere2b/version.hpp"

namespace py = pybind11;
using namespace sphere2b;

namespace {

Chart chart_from(const std::string& s) {
    if (s == "1" || s == "chart1") return Chart::Chart1;
    if (s == "2" || s == "chart2") return Chart::Chart2;
    if (s == "invariant-plane") return Chart::InvariantPlane;
    throw py::value_error("chart must be 1, 2 or invariant-plane");
}

py::dict run(const std::string& system, const std::vector<double>& y0, double t0, double t1, double rtol,
             double atol, std::pair<double, double> masses, int sign, double C) {
    const auto sys = system_from_name(system);
    if (!sys) throw py::value_error("unknown system '" + system + "'");
    IntegratorConfig cfg;
    cfg.rel_tol = rtol;
    cfg.abs_tol = atol;
    Trajectory t;
    {
        py::gil_scoped_release release;
        t = integrate({*sys, {masses.first, masses.second}, sign, C}, y0, t0, t1, cfg);
    }
    std::vector<std::vector<double>> states;
    for (std::size_t i = 0; i < t.size(); ++i) states.push_back(t.state_vec(i));
    py::dict d;
    d["times"] = t.times;
    d["states"] = states;
    d["components"] = component_names(*sys);
    d["termination"] = termination_name(t.termination);
    d["H0"] = t.H0;
    d["C0"] = t.C0;
    d["t_star"] = t.terminal_event ? py::cast(t.terminal_event->t_star) : py::none();
    return d;
}

py::dict topology(double h, double C) {
    const TopologyResult r = classify_isoenergy({h, C});
    py::dict d;
    d["holes"] = r.boundary_components;
    d["label"] = topology_label_name(r.label);
    d["margin"] = r.margin;
    d["u_roots"] = r.u_roots;
    return d;
}

py::list equilibria(const std::string& chart, double C, int sign, double m1, double m2) {
    const ChartContext ctx{m1, m2, sign, C};
    py::list out;
    for (const DivisorPoint& p : find_divisor_equilibria(chart_from(chart), ctx)) {
        const EquilibriumReport r = classify_equilibrium(p, ctx);
        py::dict d;
        d["angle1"] = p.angle1;
        d["angle2"] = p.angle2;
        d["class"] = equilibrium_class_name(r.cls);
        d["full_equilibrium"] = p.full_equilibrium;
        d["eigenvalues"] = r.eigenvalues;
        d["direction"] = divisor_direction(p);
        out.append(d);
    }
    return out;
}

py::dict verify(const std::vector<double>& seed, bool negative_control) {
    VerifyOptions opts;
    opts.negative_control = negative_control;
    CollisionVerification v;
    {
        py::gil_scoped_release release;
        v = verify_collision({System::Poly}, seed, opts);
    }
    py::list recs;
    for (const CheckRecord& r : v.records) {
        py::dict d;
        d["name"] = r.name;
        d["value"] = r.value;
        d["limit"] = r.limit;
        d["pass"] = r.pass;
        recs.append(d);
    }
    py::dict d;
    d["pass"] = v.pass;
    d["xi_end"] = v.xi_end;
    d["t_star"] = v.event ? py::cast(v.event->t_star) : py::none();
    d["records"] = recs;
    return d;
}

}  // namespace

PYBIND11_MODULE(sphere2b, m) {
    m.doc() = "Two bodies on the sphere with the cotangent potential";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Sphere2bError", PyExc_ValueError);

    m.def("poly_rhs", [](const std::array<double, 5>& s) { return poly_rhs({s[0], s[1], s[2], s[3], s[4]}); });
    m.def("hamiltonian_poly",
          [](const std::array<double, 5>& s) { return hamiltonian_poly({s[0], s[1], s[2], s[3], s[4]}); });
    m.def("casimir", [](double a, double b, double c) { return casimir(a, b, c); });
    m.def("integrate", &run, py::arg("system"), py::arg("y0"), py::arg("t0"), py::arg("t1"),
          py::arg("rtol") = 1e-10, py::arg("atol") = 1e-12, py::arg("masses") = std::pair{1.0, 1.0},
          py::arg("sign") = 1, py::arg("C") = 0.0);
    m.def("classify_isoenergy", &topology, py::arg("h"), py::arg("C"));
    m.def("divisor_equilibria", &equilibria, py::arg("chart") = "1", py::arg("C") = 9.0, py::arg("sign") = 1,
          py::arg("m1") = 1.0, py::arg("m2") = 0.5);
    m.def("verify_collision", &verify, py::arg("seed"), py::arg("negative_control") = false);
    m.def("default_collision_seeds", [] {
        std::vector<std::vector<double>> out;
        for (const auto& s : default_collision_seeds())
            out.push_back({s.state.m1, s.state.m2, s.state.m3, s.state.xi, s.state.p});
        return out;
    });
}
