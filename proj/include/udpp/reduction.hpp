// Compiler from two-counter machines to population protocols with unordered
// data, the halting witness, its scripted replay and the observation monitors.
//
// Every compiled state is a pair (main, tag). The tag records the initial
// state an agent started in and is never changed by a rule. Rules are stated
// on main states and lifted to all four tag pairs; on the pair (R2, R2) the
// equality-guarded variants are replaced by the input-violation rule.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "udpp/core.hpp"
#include "udpp/counter_machine.hpp"

namespace udpp::reduction {

class NotHalting : public Error {
public:
    using Error::Error;
};

/// A scripted step was not enabled, a needed reservoir ran dry, or the final
/// configuration is not a mixed-opinion deadlock.
class StuckReplay : public Error {
public:
    using Error::Error;
};

enum class Flag : std::uint8_t { Plus, Minus, EqZero, GtZero };
enum class Tag : std::uint8_t { R1, R2 };

struct MainState {
    enum class Kind : std::uint8_t { Instr, Intermediate, Counter, Shadow, Setup, ResR1, ResR2, Sink1, Sink2, Garbage };
    Kind kind = Kind::Garbage;
    std::size_t instr = 0;               // Instr, Intermediate
    cm::Counter counter = cm::Counter::X;  // Counter, Shadow, Setup
    Flag flag = Flag::EqZero;            // Shadow

    static MainState instruction(std::size_t m) { return {Kind::Instr, m}; }
    static MainState intermediate(std::size_t m) { return {Kind::Intermediate, m}; }
    static MainState counter_of(cm::Counter c) { return {Kind::Counter, 0, c}; }
    static MainState shadow(cm::Counter c, Flag f) { return {Kind::Shadow, 0, c, f}; }
    static MainState setup(cm::Counter c) { return {Kind::Setup, 0, c}; }
    static MainState of(Kind k) { return {k}; }

    bool operator==(const MainState&) const = default;
};

struct TaggedState {
    MainState main;
    Tag tag = Tag::R1;
    bool operator==(const TaggedState&) const = default;
};

/// `i.3`, `i'.3`, `x`, `xbar.+`, `ybar.=0`, `setup.x`, `R1`, `sink2`, `garbage`.
std::string main_name(const MainState& s);
/// main_name + `@R1` / `@R2`.
std::string state_name(const TaggedState& s);
std::optional<TaggedState> parse_state_name(const std::string& name);

/// Main states of the compiled protocol for a machine, in state-table order.
std::vector<MainState> main_states(const cm::CounterMachine& m);

/// State numbering shared by the compiler and the witness builder.
class StateLayout {
public:
    explicit StateLayout(const cm::CounterMachine& m);
    StateId id(const TaggedState& s) const;
    StateId id(const MainState& main, Tag tag) const { return id({main, tag}); }
    const std::vector<MainState>& mains() const { return mains_; }

private:
    std::vector<MainState> mains_;
    std::size_t instr_count_;
};

/// Throws cm::GotoCycle when a goto chain used by the construction cycles.
Protocol compile(const cm::CounterMachine& m);

/// Number of reservoir colors used by build_witness: max(2k, k + 3).
std::size_t witness_colors(std::uint64_t k);

/// Initial configuration with colors 0..witness_colors(k)-1; each color has
/// 2k+7 agents in (R1, R1) and exactly one in (R2, R2). Throws NotHalting
/// unless the machine halts within k steps.
Configuration build_witness(const cm::CounterMachine& m, std::uint64_t k);

struct SigmaTrace {
    Trace trace;
    /// Machine steps simulated (gotos included), equal to the halting time.
    std::uint64_t machine_steps = 0;
    /// Reservoir-R2 colors consumed while simulating each machine step.
    std::vector<std::size_t> fresh_colors_per_step;
    /// Trace positions where each phase starts: setup, simulation, sink1
    /// conversion, deadlock, residual nonzero detection.
    std::vector<std::size_t> phase_starts;

    const Configuration& terminal() const { return trace.last(); }
};

/// Fires the scripted halting run from c0 and checks that it ends in a
/// deadlock holding both an output-1 and an output-0 agent.
SigmaTrace replay_sigma(const Protocol& compiled, const cm::CounterMachine& m, const Configuration& c0);
SigmaTrace replay_sigma(const cm::CounterMachine& m, const Configuration& c0);

struct ObservationViolation {
    std::size_t step;
    /// 0 for an inconsistent trace step, 1..4 for the observations.
    int observation;
    std::string message;
};

/// Checks a trace of a compiled protocol against the four invariants of a
/// violation-free simulation:
///  1. agents entering a shadow state come from R2 with a color never held
///     before by a shadow or counter agent;
///  2. agents entering or leaving a counter state, other than into sink2,
///     are paired with a shadow agent of that counter and of the same color;
///  3. sink1 loses agents only through convert-to-sink2 or cause-deadlock;
///  4. the reservoir states R1 and R2 never gain agents.
/// States are identified by their compiled names.
std::vector<ObservationViolation> check_observations(const Protocol& p, const Trace& trace);

}  // namespace udpp::reduction
