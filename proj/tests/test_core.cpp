#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "udpp/core.hpp"

using namespace udpp;
using namespace udpp::testing;

namespace {

Configuration cfg(std::initializer_list<Configuration::Entry> e) { return Configuration::from_entries(e); }

}  // namespace

TEST_CASE("config_add") {
    const StateId p{0}, q{1};
    CHECK(config_add({}, {}) == Configuration{});
    CHECK(config_add(cfg({{p, red(), 2}}), cfg({{p, red(), 1}, {q, blue(), 1}})) ==
          cfg({{p, red(), 3}, {q, blue(), 1}}));

    std::mt19937_64 rng(11);
    const std::vector<StateId> states{StateId{0}, StateId{1}, StateId{2}};
    for (int i = 0; i < 100; ++i) {
        auto a = random_config(rng, states, rng() % 6, 3);
        auto b = random_config(rng, states, rng() % 6, 3);
        CHECK(a + b == b + a);
        CHECK((a + b).total() == a.total() + b.total());
    }
}

TEST_CASE("zero counts are never stored") {
    const StateId p{0};
    auto c = cfg({{p, red(), 0}, {p, blue(), 1}});
    CHECK(c.entries().size() == 1);
    c.remove(p, blue());
    CHECK(c.empty());
    CHECK(c == Configuration{});
    CHECK_THROWS_AS(c.remove(p, blue()), NotEnabled);
}

TEST_CASE("singleton") {
    const auto P = example_protocol();
    const StateId p = P.state("p"), q = P.state("q");
    CHECK(singleton(p, red()) == cfg({{p, red(), 1}}));
    CHECK(singleton(p, red()) + singleton(p, red()) == cfg({{p, red(), 2}}));
    CHECK(singleton(p, red()) + singleton(p, red()) + singleton(q, blue()) == cfg({{p, red(), 2}, {q, blue(), 1}}));
}

TEST_CASE("active_states and is_initial") {
    const auto P = example_protocol();
    const StateId p = P.state("p"), q = P.state("q");
    CHECK(active_states({}).empty());
    CHECK(active_states(cfg({{p, red(), 2}, {q, blue(), 1}})) == std::set<StateId>{p, q});
    CHECK(active_states(cfg({{q, red(), 2}, {q, blue(), 1}})) == std::set<StateId>{q});
    CHECK(is_initial(P, cfg({{p, red(), 2}, {q, blue(), 1}})));
    CHECK(is_initial(P, {}));

    const auto P2 = parse_protocol("state a\nstate b\ninit a\nout a 1\nout b 0\n");
    CHECK_FALSE(is_initial(P2, singleton(P2.state("b"), red())));
}

TEST_CASE("enabled_instances on the worked example") {
    const auto P = example_protocol();
    const StateId p = P.state("p"), q = P.state("q");
    const auto c0 = cfg({{p, red(), 2}, {q, blue(), 1}});
    const auto c1 = cfg({{p, red(), 1}, {q, red(), 1}, {q, blue(), 1}});
    const auto c2 = cfg({{q, red(), 2}, {q, blue(), 1}});

    auto at_c0 = enabled_instances(P, c0);
    REQUIRE(at_c0.size() == 1);
    CHECK(at_c0[0].rule.label == "t1");
    CHECK(at_c0[0].d == red());
    CHECK(at_c0[0].e == blue());
    CHECK(enabled_instances(P, {}).empty());

    auto at_c1 = enabled_instances(P, c1);
    REQUIRE(at_c1.size() == 1);
    CHECK(at_c1[0].rule.label == "t1");

    auto at_c2 = enabled_instances(P, c2);
    REQUIRE(at_c2.size() == 1);
    CHECK(at_c2[0].rule.label == "t2");
    CHECK(at_c2[0].d == red());
    CHECK(at_c2[0].e == red());

    CHECK(fire(P, c0, at_c0[0]) == c1);
    CHECK(fire(P, c1, at_c1[0]) == c2);
    CHECK(fire(P, c2, at_c2[0]) == c1);
}

TEST_CASE("fire rejects disabled instances") {
    const auto P = example_protocol();
    const StateId p = P.state("p");
    const auto c = cfg({{p, red(), 2}});
    TransitionInstance bogus{0, P.rules()[0], red(), blue()};
    CHECK_THROWS_AS(fire(P, c, bogus), NotEnabled);

    Rule foreign = P.rules()[0];
    foreign.post_first = p;
    CHECK_THROWS_AS(fire(P, cfg({{p, red(), 1}, {P.state("q"), blue(), 1}}), {0, foreign, red(), blue()}), NotEnabled);
}

TEST_CASE("self-pair needs two agents") {
    const auto P = parse_protocol("state a\nstate b\ninit a\nout a 0\nout b 1\nrule a a eq b b\n");
    const StateId a = P.state("a");
    CHECK(enabled_instances(P, singleton(a, red())).empty());
    CHECK(enabled_instances(P, singleton(a, red()) + singleton(a, blue())).empty());
    CHECK(enabled_instances(P, singleton(a, red()) + singleton(a, red())).size() == 1);
}

TEST_CASE("any guard desugars into eq and neq") {
    const auto P = parse_protocol("state a\nstate b\ninit a\nout a 0\nout b 1\nrule a a any b b both\n");
    REQUIRE(P.rules().size() == 2);
    CHECK(P.rules()[0].guard == Guard::Eq);
    CHECK(P.rules()[1].guard == Guard::Neq);
    CHECK(P.rules()[0].label == P.rules()[1].label);
}

TEST_CASE("validate_protocol") {
    CHECK(validate_protocol(example_protocol()).empty());

    ProtocolDraft d = example_protocol().to_draft();
    d.rules.push_back({"p", "z", ProtocolDraft::GuardSpec::Eq, "q", "q", "bad"});
    auto diags = validate_protocol(d);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("'z'") != std::string::npos);
    CHECK_THROWS_AS(Protocol::build(d), InvalidProtocol);

    ProtocolDraft dup = example_protocol().to_draft();
    dup.states.push_back("p");
    CHECK(validate_protocol(dup).size() == 1);

    ProtocolDraft partial = example_protocol().to_draft();
    partial.outputs.pop_back();
    auto pd = validate_protocol(partial);
    REQUIRE(pd.size() == 1);
    CHECK(pd[0].find("no output") != std::string::npos);
}

TEST_CASE("conservation under random fires") {
    std::mt19937_64 rng(5);
    int fired = 0;
    for (int round = 0; round < 200; ++round) {
        const auto P = random_protocol(rng, 2 + rng() % 3, 1 + rng() % 3);
        auto c = random_config(rng, all_states(P), 2 + rng() % 4, 3);
        for (int s = 0; s < 20; ++s) {
            auto en = enabled_instances(P, c);
            if (en.empty()) break;
            const auto& inst = en[rng() % en.size()];
            auto next = fire(P, c, inst);
            CHECK(next.total() == c.total());
            CHECK(next.color_histogram() == c.color_histogram());
            c = next;
            ++fired;
        }
    }
    CHECK(fired > 500);
}

TEST_CASE("color renaming commutes with enabling and firing") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 200; ++round) {
        const auto P = random_protocol(rng, 2 + rng() % 3, 1 + rng() % 3);
        const auto c = random_config(rng, all_states(P), 1 + rng() % 5, 3);
        const auto pi = random_renaming(rng, c.colors());
        const auto pc = rename_colors(c, pi);

        std::vector<TransitionInstance> mapped;
        for (const auto& inst : enabled_instances(P, c)) mapped.push_back(rename_colors(inst, pi));
        auto direct = enabled_instances(P, pc);
        auto key = [](const TransitionInstance& i) { return std::tie(i.rule_index, i.d, i.e); };
        std::sort(mapped.begin(), mapped.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
        REQUIRE(mapped == direct);
        for (const auto& inst : enabled_instances(P, c)) {
            CHECK(fire(P, pc, rename_colors(inst, pi)) == rename_colors(fire(P, c, inst), pi));
        }
    }
}

TEST_CASE("enabling is monotone") {
    std::mt19937_64 rng(23);
    for (int round = 0; round < 200; ++round) {
        const auto P = random_protocol(rng, 3, 3);
        const auto c = random_config(rng, all_states(P), 1 + rng() % 4, 2);
        const auto extra = random_config(rng, all_states(P), rng() % 3, 3);
        for (const auto& inst : enabled_instances(P, c)) CHECK(instance_enabled(c + extra, inst));
    }
}

TEST_CASE("fire is deterministic") {
    const auto P = example_protocol();
    const auto c0 = singleton(P.state("p"), red()) + singleton(P.state("p"), red()) + singleton(P.state("q"), blue());
    const auto inst = enabled_instances(P, c0).front();
    CHECK(fire(P, c0, inst) == fire(P, c0, inst));
}
