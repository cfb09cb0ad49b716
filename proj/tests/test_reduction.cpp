#include <random>

#include "doctest.h"
#include "udpp/counter_machine.hpp"
#include "udpp/exploration.hpp"
#include "udpp/reduction.hpp"
#include "udpp/text_format.hpp"

using namespace udpp;
using namespace udpp::reduction;
using cm::Counter;
using cm::CounterMachine;
using Kind = MainState::Kind;

namespace {

const CounterMachine kHalt({cm::Halt{}});
const CounterMachine kIncHalt({cm::Inc{Counter::X}, cm::Halt{}});
const CounterMachine kIncDec({cm::Inc{Counter::X}, cm::Dec{Counter::X, 4}, cm::Goto{2}, cm::Halt{}});

TaggedState decode(const Protocol& p, StateId s) { return *parse_state_name(p.name(s)); }

std::string family(const Rule& r) { return r.label.substr(0, r.label.find(':')); }

// Expected rule count, tallied per rule family by hand: a main-level rule
// lifts to 3 rules under eq, 4 under neq and 7 under any.
std::size_t expected_rule_count(const CounterMachine& m) {
    std::size_t incs = 0, decs = 0, halts = 0;
    for (const auto& i : m.instructions()) {
        incs += std::holds_alternative<cm::Inc>(i);
        decs += std::holds_alternative<cm::Dec>(i);
        halts += std::holds_alternative<cm::Halt>(i);
    }
    const std::size_t q = m.size() + decs + 17;
    return q * q          // input violation
           + 8 * 4        // counter color violation
           + 16 * 7       // control state violation
           + 2 * 7        // convert to sink1
           + q * 7        // convert to sink2
           + 3 * 7        // setup
           + 6 * 3        // increment, decrement, detect nonzero
           + incs * 2 * 7 + decs * 3 * 7 + halts * 7;
}

bool is_deadlock(const Protocol& p, const Configuration& c) { return !has_enabled_instance(p, c); }

void check_sigma(const CounterMachine& m, std::uint64_t k) {
    CAPTURE(format_machine(m));
    CAPTURE(k);
    const auto P = compile(m);
    const auto c0 = build_witness(m, k);
    REQUIRE(is_initial(P, c0));
    const auto s = replay_sigma(P, m, c0);
    CHECK(s.machine_steps == cm::cm_run(m, k).steps);
    CHECK(s.fresh_colors_per_step.size() == s.machine_steps);
    for (auto f : s.fresh_colors_per_step) CHECK(f <= 1);
    CHECK(s.trace.configs.front() == c0);
    for (std::size_t i = 0; i < s.trace.steps(); ++i) {
        CHECK(fire(P, s.trace.configs[i], s.trace.fired[i]) == s.trace.configs[i + 1]);
        CHECK(family(s.trace.fired[i].rule) != "input-violation");
    }
    const auto& t = s.terminal();
    CHECK(is_deadlock(P, t));
    CHECK(consensus(P, t) == std::nullopt);
    CHECK(check_observations(P, s.trace).empty());
}

}  // namespace

TEST_CASE("state names round trip") {
    for (const auto* m : {&kHalt, &kIncHalt, &kIncDec}) {
        const auto P = compile(*m);
        const StateLayout layout(*m);
        for (std::uint32_t i = 0; i < P.state_count(); ++i) {
            const auto s = decode(P, StateId{i});
            CHECK(state_name(s) == P.name(StateId{i}));
            CHECK(layout.id(s) == StateId{i});
        }
    }
    CHECK(main_name(MainState::shadow(Counter::Y, Flag::EqZero)) == "ybar.=0");
    CHECK(main_name(MainState::intermediate(3)) == "i'.3");
    CHECK_FALSE(parse_state_name("nonsense").has_value());
    CHECK_FALSE(parse_state_name("x@R3").has_value());
}

TEST_CASE("compile [halt]: states, initial states and outputs") {
    const auto P = compile(kHalt);
    CHECK(P.state_count() == 2 * 18);
    CHECK(validate_protocol(P).empty());
    std::set<std::string> initial;
    for (auto s : P.initial_states()) initial.insert(P.name(s));
    CHECK(initial == std::set<std::string>{"R1@R1", "R2@R2"});
    for (std::uint32_t i = 0; i < P.state_count(); ++i) {
        const auto k = decode(P, StateId{i}).main.kind;
        CHECK(P.output(StateId{i}) == ((k == Kind::ResR1 || k == Kind::ResR2) ? 1 : 0));
    }
}

TEST_CASE("rule count") {
    CHECK(compile(kHalt).rules().size() == 654);
    CHECK(compile(kIncHalt).rules().size() == 712);
    CHECK(expected_rule_count(kIncHalt) == 712);
    for (const auto* m : {&kHalt, &kIncHalt, &kIncDec}) CHECK(compile(*m).rules().size() == expected_rule_count(*m));
    CHECK(compile(kIncDec).state_count() == 2 * (4 + 1 + 17));
    CHECK_THROWS_AS(compile(CounterMachine({cm::Goto{1}})), cm::GotoCycle);
}

TEST_CASE("structural properties of compiled rules") {
    for (const auto* m : {&kHalt, &kIncHalt, &kIncDec}) {
        const auto P = compile(*m);
        std::set<std::tuple<std::string, std::string, Tag, Tag, std::string, std::string, Guard>> present;
        for (const auto& r : P.rules()) {
            const auto p1 = decode(P, r.pre_first), p2 = decode(P, r.pre_second);
            const auto q1 = decode(P, r.post_first), q2 = decode(P, r.post_second);
            // Tags never change.
            CHECK(p1.tag == q1.tag);
            CHECK(p2.tag == q2.tag);
            // Reservoirs are never refilled.
            for (const auto* q : {&q1, &q2}) CHECK((q->main.kind != Kind::ResR1 && q->main.kind != Kind::ResR2));
            // Only the input-violation rule is equality guarded on (R2, R2).
            if (p1.tag == Tag::R2 && p2.tag == Tag::R2 && r.guard == Guard::Eq) CHECK(family(r) == "input-violation");
            if (family(r) == "input-violation") {
                CHECK(p1.tag == Tag::R2);
                CHECK(p2.tag == Tag::R2);
                CHECK(r.guard == Guard::Eq);
                CHECK(q1.main.kind == Kind::Sink2);
                CHECK(q2.main.kind == Kind::Sink2);
                continue;
            }
            present.emplace(main_name(p1.main), main_name(p2.main), p1.tag, p2.tag, main_name(q1.main), main_name(q2.main),
                            r.guard);
        }
        // Lifting completeness.
        for (const auto& [a, b, t1, t2, c, d, g] : present) {
            for (Tag u1 : {Tag::R1, Tag::R2}) {
                for (Tag u2 : {Tag::R1, Tag::R2}) {
                    const bool both_r2 = u1 == Tag::R2 && u2 == Tag::R2;
                    CHECK(present.count({a, b, u1, u2, c, d, g}) == (both_r2 && g == Guard::Eq ? 0u : 1u));
                }
            }
        }
    }
}

TEST_CASE("witness") {
    CHECK(witness_colors(0) == 3);
    CHECK(witness_colors(1) == 4);
    CHECK(witness_colors(3) == 6);
    CHECK(witness_colors(10) == 20);

    const auto P = compile(kHalt);
    const auto c0 = build_witness(kHalt, 1);
    CHECK(c0.total() == 40);
    CHECK(c0.colors().size() == 4);
    CHECK(is_initial(P, c0));
    for (const auto& [color, n] : c0.color_histogram()) CHECK(n == 10);
    CHECK(c0.count(P.state("R1@R1"), ColorId{0}) == 9);
    CHECK(c0.count(P.state("R2@R2"), ColorId{3}) == 1);
    for (const auto& inst : enabled_instances(P, c0)) CHECK(family(inst.rule) != "input-violation");
    CHECK(consensus(P, c0) == 1);

    CHECK_THROWS_AS(build_witness(CounterMachine({cm::Inc{Counter::X}, cm::Goto{1}, cm::Halt{}}), 50), NotHalting);
    CHECK_THROWS_AS(build_witness(kIncDec, 3), NotHalting);
    CHECK_NOTHROW(build_witness(kIncDec, 4));
}

TEST_CASE("sigma replay ends in a mixed-opinion deadlock") {
    check_sigma(kHalt, 0);
    check_sigma(kHalt, 1);
    check_sigma(kIncHalt, 1);
    check_sigma(kIncDec, 4);
    check_sigma(kIncDec, 9);
    check_sigma(CounterMachine({cm::Inc{Counter::Y}, cm::Inc{Counter::Y}, cm::Dec{Counter::Y, 5}, cm::Goto{3}, cm::Halt{}}), 7);
    check_sigma(CounterMachine({cm::Dec{Counter::X, 3}, cm::Goto{1}, cm::Inc{Counter::X}, cm::Inc{Counter::Y},
                                cm::Dec{Counter::Y, 6}, cm::Halt{}}),
                6);
}

TEST_CASE("sigma replay on random halting machines") {
    std::mt19937_64 rng(71);
    int replayed = 0;
    for (int i = 0; i < 400 && replayed < 40; ++i) {
        const std::size_t n = 2 + rng() % 5;
        std::vector<cm::Instr> v;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const auto c = rng() % 2 ? Counter::X : Counter::Y;
            switch (rng() % 3) {
                case 0: v.emplace_back(cm::Inc{c}); break;
                case 1: v.emplace_back(cm::Dec{c, 1 + rng() % n}); break;
                default: v.emplace_back(cm::Goto{1 + rng() % n}); break;
            }
        }
        v.emplace_back(cm::Halt{});
        const CounterMachine m(v);
        const auto run = cm::cm_run(m, 30);
        if (!run.halted) continue;
        try {
            (void)compile(m);
        } catch (const cm::GotoCycle&) {
            continue;
        }
        check_sigma(m, run.steps);
        ++replayed;
    }
    CHECK(replayed >= 20);
}

TEST_CASE("sigma replay under a renaming of the witness colors") {
    const auto P = compile(kIncDec);
    const auto c0 = build_witness(kIncDec, 4);
    std::map<ColorId, ColorId> pi;
    for (auto c : c0.colors()) pi[c] = ColorId{1000 - 7 * c.value};
    const auto s = replay_sigma(P, kIncDec, rename_colors(c0, pi));
    CHECK(is_deadlock(P, s.terminal()));
    CHECK(consensus(P, s.terminal()) == std::nullopt);
}

TEST_CASE("literal 2k-color witness is too small for the setup phase") {
    // With only 2k colors and k = 1 there are two R2 agents; setup needs three.
    const auto P = compile(kHalt);
    Configuration c;
    for (std::uint64_t i = 0; i < 2; ++i) {
        c.add(P.state("R1@R1"), ColorId{i}, 9);
        c.add(P.state("R2@R2"), ColorId{i}, 1);
    }
    CHECK_THROWS_AS(replay_sigma(P, kHalt, c), StuckReplay);
}

TEST_CASE("replay rejects unsuitable inputs") {
    const auto P = compile(kHalt);
    CHECK_THROWS_AS(replay_sigma(P, kHalt, Configuration{}), StuckReplay);
    const auto loop = CounterMachine({cm::Inc{Counter::X}, cm::Goto{1}, cm::Halt{}});
    CHECK_THROWS_AS(replay_sigma(loop, build_witness(kHalt, 5)), Error);
}
