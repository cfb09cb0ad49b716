#include <random>

#include "doctest.h"
#include "udpp/exploration.hpp"
#include "udpp/reduction.hpp"
#include "udpp/text_format.hpp"

using namespace udpp;
using namespace udpp::reduction;
using cm::Counter;
using cm::CounterMachine;

namespace {

const CounterMachine kIncDec({cm::Inc{Counter::X}, cm::Dec{Counter::X, 4}, cm::Goto{2}, cm::Halt{}});

// The compiled protocol for kIncDec with one extra rule that no violation-free
// simulation would contain.
Protocol with_forged_rule(const std::string& p, const std::string& pp, const std::string& q, const std::string& qq) {
    auto d = compile(kIncDec).to_draft();
    d.rules.push_back({p, pp, ProtocolDraft::GuardSpec::Any, q, qq, "forged"});
    return Protocol::build(d);
}

// A one-step trace firing the forged rule on a two-agent configuration.
Trace forged_trace(const Protocol& P, const std::string& a, ColorId ca, const std::string& b, ColorId cb) {
    const auto c = singleton(P.state(a), ca) + singleton(P.state(b), cb);
    Trace t;
    t.configs.push_back(c);
    for (const auto& inst : enabled_instances(P, c)) {
        if (inst.rule.label == "forged") {
            t.fired.push_back(inst);
            t.configs.push_back(fire(P, c, inst));
            return t;
        }
    }
    FAIL("forged rule not enabled");
    return t;
}

std::set<int> observations(const std::vector<ObservationViolation>& v) {
    std::set<int> s;
    for (const auto& x : v) s.insert(x.observation);
    return s;
}

}  // namespace

TEST_CASE("scripted replays satisfy every observation") {
    for (std::uint64_t k : {4, 6, 12}) {
        const auto s = replay_sigma(kIncDec, build_witness(kIncDec, k));
        const auto v = check_observations(compile(kIncDec), s.trace);
        CHECK(v.empty());
    }
}

TEST_CASE("random runs from the witness satisfy every observation") {
    const auto P = compile(kIncDec);
    const auto c0 = build_witness(kIncDec, 4);
    std::size_t total_steps = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto t = random_fair_run(P, c0, seed, 400);
        total_steps += t.steps();
        const auto v = check_observations(P, t);
        CHECK_MESSAGE(v.empty(), "seed " << seed << ": " << (v.empty() ? "" : v.front().message));
    }
    CHECK(total_steps > 1000);
}

TEST_CASE("forged sink1 removal is flagged") {
    const auto P = with_forged_rule("sink1@R1", "x@R1", "R1@R1", "x@R1");
    const auto v = check_observations(P, forged_trace(P, "sink1@R1", ColorId{1}, "x@R1", ColorId{2}));
    CHECK(observations(v) == std::set<int>{3, 4});
}

TEST_CASE("counter agent moved by a foreign rule is flagged") {
    const auto P = with_forged_rule("R1@R1", "x@R1", "R1@R1", "garbage@R1");
    const auto v = check_observations(P, forged_trace(P, "R1@R1", ColorId{1}, "x@R1", ColorId{1}));
    CHECK(observations(v) == std::set<int>{2});

    // A same-colored shadow of the other counter does not count.
    const auto Q = with_forged_rule("ybar.>0@R1", "x@R1", "ybar.>0@R1", "garbage@R1");
    CHECK(observations(check_observations(Q, forged_trace(Q, "ybar.>0@R1", ColorId{4}, "x@R1", ColorId{4}))) ==
          std::set<int>{2});
}

TEST_CASE("shadow entries must be fresh R2 agents") {
    const auto P = with_forged_rule("R1@R1", "garbage@R2", "xbar.=0@R1", "garbage@R2");
    CHECK(observations(check_observations(P, forged_trace(P, "R1@R1", ColorId{1}, "garbage@R2", ColorId{2}))) ==
          std::set<int>{1});

    // An R2 agent whose color already held a shadow.
    const auto Q = with_forged_rule("R2@R2", "ybar.>0@R1", "xbar.=0@R2", "ybar.>0@R1");
    const auto v = check_observations(Q, forged_trace(Q, "R2@R2", ColorId{3}, "ybar.>0@R1", ColorId{3}));
    CHECK(observations(v) == std::set<int>{1});
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("used before") != std::string::npos);
}

TEST_CASE("inconsistent trace steps are flagged") {
    const auto P = compile(kIncDec);
    auto s = replay_sigma(P, kIncDec, build_witness(kIncDec, 4));
    s.trace.configs[3] = s.trace.configs[1];
    const auto v = check_observations(P, s.trace);
    CHECK(observations(v).count(0) == 1);
    CHECK(v.front().step == 2);
}
