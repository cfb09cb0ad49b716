#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "udpp/counter_machine.hpp"
#include "udpp/exploration.hpp"
#include "udpp/reduction.hpp"
#include "udpp/text_format.hpp"

namespace py = pybind11;

namespace {

using namespace udpp;

// {(state name, color): count}
py::dict config_to_dict(const Protocol& p, const Configuration& c) {
    py::dict d;
    for (const auto& e : c.entries()) d[py::make_tuple(p.name(e.state), e.color.value)] = e.count;
    return d;
}

Configuration config_from_dict(const Protocol& p, const py::dict& d) {
    Configuration c;
    for (auto [key, value] : d) {
        auto k = key.cast<py::tuple>();
        c.add(p.state(k[0].cast<std::string>()), ColorId{k[1].cast<std::uint64_t>()}, value.cast<Count>());
    }
    return c;
}

py::list trace_steps(const Protocol& p, const Trace& t) {
    py::list steps;
    for (std::size_t i = 0; i < t.steps(); ++i) {
        const auto& f = t.fired[i];
        steps.append(py::make_tuple(f.rule.label, f.d.value, f.e.value, config_to_dict(p, t.configs[i + 1])));
    }
    return steps;
}

}  // namespace

PYBIND11_MODULE(_udpp, m) {
    m.doc() = "Population protocols with unordered data: semantics, output classification and the counter-machine reduction.";

    py::register_exception<udpp::Error>(m, "Error", PyExc_RuntimeError);

    py::class_<Protocol>(m, "Protocol")
        .def_static("parse", [](const std::string& text) { return parse_protocol(text); })
        .def("format", [](const Protocol& p) { return format_protocol(p); })
        .def_property_readonly("states", &Protocol::state_names)
        .def_property_readonly("rule_count", [](const Protocol& p) { return p.rules().size(); })
        .def("output", [](const Protocol& p, const std::string& s) { return p.output(p.state(s)); })
        .def("validate", [](const Protocol& p) { return validate_protocol(p); });

    py::class_<Configuration>(m, "Configuration")
        .def_static("parse", [](const Protocol& p, const std::string& text) { return parse_configuration(p, text); })
        .def_static("from_dict", &config_from_dict)
        .def("to_dict", [](const Configuration& c, const Protocol& p) { return config_to_dict(p, c); })
        .def("format", [](const Configuration& c, const Protocol& p) { return format_configuration(p, c); })
        .def_property_readonly("total", &Configuration::total)
        .def(py::self == py::self)
        .def("__add__", [](const Configuration& a, const Configuration& b) { return a + b; });

    m.def("active_states", [](const Protocol& p, const Configuration& c) {
        std::vector<std::string> out;
        for (auto q : active_states(c)) out.push_back(p.name(q));
        return out;
    });
    m.def("is_initial", &is_initial);
    m.def("enabled_instances", [](const Protocol& p, const Configuration& c) {
        py::list out;
        for (const auto& i : enabled_instances(p, c)) out.append(py::make_tuple(i.rule.label, i.d.value, i.e.value));
        return out;
    }, "Enabled (rule label, d, e) triples in canonical order.");
    m.def("successors", [](const Protocol& p, const Configuration& c) {
        std::vector<Configuration> out;
        for (const auto& i : enabled_instances(p, c)) out.push_back(fire(p, c, i));
        return out;
    });

    m.def("classify_output", [](const Protocol& p, const Configuration& c, std::size_t max_nodes) {
        return to_string(classify_output(p, c, {max_nodes, std::nullopt}));
    }, py::arg("protocol"), py::arg("config"), py::arg("max_nodes") = 100000);

    m.def("explore", [](const Protocol& p, const Configuration& c, std::size_t max_nodes) {
        const auto g = explore(p, c, {max_nodes, std::nullopt});
        py::dict d;
        std::vector<std::string> nodes;
        for (const auto& n : g.nodes) nodes.push_back(format_canonical(p, n));
        d["nodes"] = nodes;
        d["edges"] = g.edges;
        d["truncated"] = g.truncated;
        d["bottom_sccs"] = g.truncated ? py::object(py::none()) : py::cast(bottom_sccs(g));
        return d;
    }, py::arg("protocol"), py::arg("config"), py::arg("max_nodes") = 100000);

    m.def("check_well_specification", [](const Protocol& p, std::size_t agents, std::size_t colors, std::size_t max_nodes,
                                         unsigned workers) {
        const auto r = check_well_specification(p, agents, colors, {max_nodes, std::nullopt}, workers);
        py::list entries;
        for (const auto& e : r.entries) entries.append(py::make_tuple(format_canonical(p, e.config), to_string(e.output)));
        return py::make_tuple(to_string(r.verdict), entries);
    }, py::arg("protocol"), py::arg("max_agents"), py::arg("max_colors"), py::arg("max_nodes") = 100000,
       py::arg("workers") = 1);

    m.def("random_fair_run", [](const Protocol& p, const Configuration& c, std::uint64_t seed, std::size_t steps) {
        return trace_steps(p, random_fair_run(p, c, seed, steps));
    }, "List of (rule label, d, e, resulting configuration dict).");

    auto cmm = m.def_submodule("cm", "Two-counter machines");
    py::class_<cm::CounterMachine>(cmm, "CounterMachine")
        .def_static("parse", [](const std::string& text) { return cm::parse_machine(text); })
        .def("format", [](const cm::CounterMachine& mc) { return cm::format_machine(mc); })
        .def("__len__", &cm::CounterMachine::size);
    cmm.def("run", [](const cm::CounterMachine& mc, std::uint64_t max_steps) {
        const auto r = cm::cm_run(mc, max_steps);
        return py::make_tuple(r.halted, r.steps, py::make_tuple(r.final.pc, r.final.x, r.final.y));
    }, "(halted, steps, (pc, x, y))");
    cmm.def("next_instr", &cm::next_instr);

    m.def("compile", &reduction::compile);
    m.def("build_witness", &reduction::build_witness);
    m.def("replay_sigma", [](const cm::CounterMachine& mc, const Configuration& c0) {
        const auto p = reduction::compile(mc);
        const auto s = reduction::replay_sigma(p, mc, c0);
        py::dict d;
        d["machine_steps"] = s.machine_steps;
        d["transitions"] = s.trace.steps();
        d["fresh_colors_per_step"] = s.fresh_colors_per_step;
        d["terminal"] = config_to_dict(p, s.terminal());
        d["terminal_enabled"] = enabled_instances(p, s.terminal()).size();
        d["trace"] = format_trace(p, s.trace);
        return d;
    });
    m.def("check_observations", [](const Protocol& p, const std::string& trace_text) {
        py::list out;
        for (const auto& v : reduction::check_observations(p, parse_trace(p, trace_text)))
            out.append(py::make_tuple(v.step, v.observation, v.message));
        return out;
    });
}
