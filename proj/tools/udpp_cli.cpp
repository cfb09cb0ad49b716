// udpp: command-line driver for protocol simulation, classification and the
// counter-machine reduction.
//
// Exit codes: 0 success / consensus output, 1 input error, 2 machine still
// running, 3 no output (witness found), 4 inconclusive, 5 configuration not
// initial, 6 observation monitor violations.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "udpp/counter_machine.hpp"
#include "udpp/exploration.hpp"
#include "udpp/reduction.hpp"
#include "udpp/text_format.hpp"

namespace {

using namespace udpp;

enum Exit : int {
    kOk = 0,
    kInputError = 1,
    kStillRunning = 2,
    kNoOutput = 3,
    kInconclusive = 4,
    kNotInitial = 5,
    kMonitorViolation = 6,
};

constexpr std::uint64_t kDefaultSeed = 1;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
}

int cm_run_cmd(const std::string& file, std::uint64_t max_steps) {
    const auto m = cm::parse_machine(read_file(file));
    const auto r = cm::cm_run(m, max_steps);
    if (r.halted) {
        std::cout << "halted after " << r.steps << " steps\n";
        return kOk;
    }
    std::cout << "still running at " << cm::to_string(r.final) << " after " << r.steps << " steps\n";
    return kStillRunning;
}

int compile_cmd(const std::string& file, const std::string& out) {
    const auto m = cm::parse_machine(read_file(file));
    emit(format_protocol(reduction::compile(m)), out);
    return kOk;
}

int witness_cmd(const std::string& file, std::uint64_t k, const std::string& out) {
    const auto m = cm::parse_machine(read_file(file));
    const auto p = reduction::compile(m);
    try {
        emit(format_configuration(p, reduction::build_witness(m, k)), out);
    } catch (const reduction::NotHalting& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStillRunning;
    }
    return kOk;
}

std::string state_list(const Protocol& p, const Configuration& c) {
    std::string s;
    for (auto q : active_states(c)) s += (s.empty() ? "" : " ") + p.name(q) + "(" + std::to_string(p.output(q)) + ")";
    return s;
}

void print_certificate(const Protocol& p, const reduction::SigmaTrace& sigma) {
    const auto& terminal = sigma.terminal();
    std::cout << "machine halts after " << sigma.machine_steps << " steps\n";
    std::cout << "sigma: " << sigma.trace.steps() << " transitions\n";
    std::cout << "terminal: deadlock (" << enabled_instances(p, terminal).size() << " enabled instances)\n";
    std::cout << "terminal active states: " << state_list(p, terminal) << '\n';
    std::cout << "verdict: NoOutput (certificate: sigma)\n";
}

int replay_cmd(const std::string& file, std::optional<std::uint64_t> k, const std::string& config_path,
               const std::string& out) {
    const auto m = cm::parse_machine(read_file(file));
    const auto p = reduction::compile(m);
    Configuration c0;
    if (!config_path.empty()) {
        c0 = parse_configuration(p, read_file(config_path));
        if (!is_initial(p, c0)) {
            std::cerr << "error: configuration is not initial\n";
            return kNotInitial;
        }
    } else {
        const std::uint64_t bound = k.value_or(100000);
        const auto run = cm::cm_run(m, bound);
        if (!run.halted) {
            std::cerr << "error: machine does not halt within " << bound << " steps\n";
            return kStillRunning;
        }
        c0 = reduction::build_witness(m, k.value_or(run.steps));
    }
    const auto sigma = reduction::replay_sigma(p, m, c0);
    if (!out.empty()) write_file(out, format_trace(p, sigma.trace));
    print_certificate(p, sigma);
    return kNoOutput;
}

int simulate_cmd(const std::string& proto, const std::string& config, std::uint64_t seed, std::size_t steps,
                 const std::string& out) {
    const auto p = parse_protocol(read_file(proto));
    const auto c0 = parse_configuration(p, read_file(config));
    const auto t = random_fair_run(p, c0, seed, steps);
    emit(format_trace(p, t), out);
    if (!out.empty()) {
        std::cout << t.steps() << " steps" << (t.steps() < steps ? " (deadlock)" : "") << '\n';
    }
    return kOk;
}

void print_lasso(const Protocol& p, const Lasso& lasso, std::size_t index) {
    std::cout << "# witness " << index << ": prefix\n" << format_trace(p, lasso.prefix);
    std::cout << "# witness " << index << ": cycle (ends in a color renaming of its start)\n"
              << format_trace(p, lasso.cycle);
}

int classify_cmd(const std::string& proto, const std::string& config, const ExplorationLimits& lim,
                 const std::string& certificate, const std::string& machine_file) {
    const auto p = parse_protocol(read_file(proto));
    const auto c0 = parse_configuration(p, read_file(config));
    if (!is_initial(p, c0)) {
        std::cerr << "error: configuration is not initial\n";
        return kNotInitial;
    }
    if (c0.empty()) {
        std::cerr << "error: configuration has no agents\n";
        return kInputError;
    }

    if (certificate == "sigma") {
        if (machine_file.empty()) {
            std::cerr << "error: --certificate sigma needs --machine\n";
            return kInputError;
        }
        const auto m = cm::parse_machine(read_file(machine_file));
        const auto compiled = reduction::compile(m);
        if (format_protocol(compiled) != format_protocol(p)) {
            std::cerr << "error: protocol is not the compilation of " << machine_file << '\n';
            return kInputError;
        }
        const auto sigma = reduction::replay_sigma(p, m, c0);
        std::cout << "NoOutput\n";
        print_certificate(p, sigma);
        return kNoOutput;
    }

    const auto g = explore(p, c0, lim);
    const auto oc = classify_graph(p, g);
    std::cout << to_string(oc) << '\n';
    std::cout << "# " << g.nodes.size() << " reachable configurations up to color renaming\n";
    switch (oc.verdict) {
        case OutputClass::Verdict::Out0:
        case OutputClass::Verdict::Out1: return kOk;
        case OutputClass::Verdict::NoOutput: {
            std::size_t i = 1;
            for (const auto& lasso : no_output_witness(p, c0, g)) print_lasso(p, lasso, i++);
            return kNoOutput;
        }
        case OutputClass::Verdict::Unknown: return kInconclusive;
    }
    return kInconclusive;
}

int sweep_cmd(const std::string& proto, std::size_t agents, std::size_t colors, const ExplorationLimits& lim,
              unsigned jobs) {
    const auto p = parse_protocol(read_file(proto));
    const auto report = check_well_specification(p, agents, colors, lim, jobs);
    std::cout << format_report(p, report);
    switch (report.verdict) {
        case WellSpecReport::Verdict::NotWellSpecified: return kNoOutput;
        case WellSpecReport::Verdict::Inconclusive: return kInconclusive;
        case WellSpecReport::Verdict::WellSpecifiedUpToBounds: return kOk;
    }
    return kInconclusive;
}

int monitors_cmd(const std::string& proto, const std::string& trace_file) {
    const auto p = parse_protocol(read_file(proto));
    const auto t = parse_trace(p, read_file(trace_file));
    const auto violations = reduction::check_observations(p, t);
    for (const auto& v : violations) std::cout << "observation " << v.observation << ": " << v.message << '\n';
    std::cout << violations.size() << " violations\n";
    return violations.empty() ? kOk : kMonitorViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Population protocols with unordered data: simulation, classification and counter-machine reduction"};
    app.require_subcommand(1);
    int code = kOk;

    std::string file, proto, config, out, trace_file, machine_file, certificate = "explore";
    std::uint64_t max_steps = 100000, seed = kDefaultSeed;
    std::uint64_t k = 0;
    std::size_t steps = 1000, agents = 3, colors = 2, max_nodes = 100000, max_depth = 0;
    unsigned jobs = 1;

    auto* cm_run = app.add_subcommand("cm-run", "run a counter machine from (1, 0, 0)");
    cm_run->add_option("machine", file, "counter machine file")->required();
    cm_run->add_option("--max-steps", max_steps, "step budget")->capture_default_str();
    cm_run->callback([&] { code = cm_run_cmd(file, max_steps); });

    auto* compile = app.add_subcommand("compile", "compile a counter machine to a protocol");
    compile->add_option("machine", file)->required();
    compile->add_option("--out", out, "write to file instead of stdout");
    compile->callback([&] { code = compile_cmd(file, out); });

    auto* witness = app.add_subcommand("witness", "halting witness configuration for the compiled protocol");
    witness->add_option("machine", file)->required();
    witness->add_option("--k", k, "halting-time bound")->required();
    witness->add_option("--out", out);
    witness->callback([&] { code = witness_cmd(file, k, out); });

    auto* replay = app.add_subcommand("replay-sigma", "replay the halting run and certify a no-output deadlock");
    replay->add_option("machine", file)->required();
    auto* k_opt = replay->add_option("--k", k, "halting-time bound used for the witness");
    auto* cfg_opt = replay->add_option("--config", config, "witness configuration file");
    k_opt->excludes(cfg_opt);
    replay->add_option("--out", out, "write the trace here");
    replay->callback([&] {
        code = replay_cmd(file, k_opt->count() ? std::optional<std::uint64_t>(k) : std::nullopt, config, out);
    });

    auto* simulate = app.add_subcommand("simulate", "seeded uniformly random run");
    simulate->add_option("protocol", proto)->required();
    simulate->add_option("config", config)->required();
    simulate->add_option("--seed", seed)->capture_default_str();
    simulate->add_option("--steps", steps)->capture_default_str();
    simulate->add_option("--out", out);
    simulate->callback([&] { code = simulate_cmd(proto, config, seed, steps, out); });

    auto* classify = app.add_subcommand("classify", "output of one initial configuration");
    classify->add_option("protocol", proto)->required();
    classify->add_option("config", config)->required();
    classify->add_option("--max-nodes", max_nodes)->capture_default_str()->check(CLI::PositiveNumber);
    classify->add_option("--max-depth", max_depth, "0 for unbounded")->capture_default_str();
    classify->add_option("--certificate", certificate)->check(CLI::IsMember({"explore", "sigma"}))->capture_default_str();
    classify->add_option("--machine", machine_file, "counter machine the protocol was compiled from");
    classify->callback([&] {
        ExplorationLimits lim{max_nodes, max_depth ? std::optional<std::size_t>(max_depth) : std::nullopt};
        code = classify_cmd(proto, config, lim, certificate, machine_file);
    });

    auto* sweep = app.add_subcommand("sweep", "bounded well-specification check");
    sweep->add_option("protocol", proto)->required();
    sweep->add_option("--max-agents", agents)->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--max-colors", colors)->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--max-nodes", max_nodes)->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
    sweep->callback([&] { code = sweep_cmd(proto, agents, colors, {max_nodes, std::nullopt}, jobs); });

    auto* monitors = app.add_subcommand("monitors", "check a trace of a compiled protocol");
    monitors->add_option("protocol", proto)->required();
    monitors->add_option("trace", trace_file)->required();
    monitors->callback([&] { code = monitors_cmd(proto, trace_file); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    } catch (const udpp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return code;
}
