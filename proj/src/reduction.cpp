#include "udpp/reduction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <tuple>

namespace udpp::reduction {

using cm::Counter;
using Kind = MainState::Kind;

namespace {

constexpr Flag kFlags[] = {Flag::Plus, Flag::Minus, Flag::EqZero, Flag::GtZero};
constexpr Counter kCounters[] = {Counter::X, Counter::Y};

const char* flag_name(Flag f) {
    switch (f) {
        case Flag::Plus: return "+";
        case Flag::Minus: return "-";
        case Flag::EqZero: return "=0";
        case Flag::GtZero: return ">0";
    }
    return "?";
}

std::string counter_str(Counter c) { return std::string(1, cm::counter_name(c)); }

}  // namespace

std::string main_name(const MainState& s) {
    switch (s.kind) {
        case Kind::Instr: return "i." + std::to_string(s.instr);
        case Kind::Intermediate: return "i'." + std::to_string(s.instr);
        case Kind::Counter: return counter_str(s.counter);
        case Kind::Shadow: return counter_str(s.counter) + "bar." + flag_name(s.flag);
        case Kind::Setup: return "setup." + counter_str(s.counter);
        case Kind::ResR1: return "R1";
        case Kind::ResR2: return "R2";
        case Kind::Sink1: return "sink1";
        case Kind::Sink2: return "sink2";
        case Kind::Garbage: return "garbage";
    }
    return "?";
}

std::string state_name(const TaggedState& s) { return main_name(s.main) + (s.tag == Tag::R1 ? "@R1" : "@R2"); }

std::optional<TaggedState> parse_state_name(const std::string& name) {
    const auto at = name.rfind('@');
    if (at == std::string::npos) return std::nullopt;
    TaggedState ts;
    const std::string tag = name.substr(at + 1);
    if (tag == "R1") {
        ts.tag = Tag::R1;
    } else if (tag == "R2") {
        ts.tag = Tag::R2;
    } else {
        return std::nullopt;
    }
    const std::string main = name.substr(0, at);

    auto parse_index = [](const std::string& digits) -> std::optional<std::size_t> {
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
        return std::stoull(digits);
    };
    static const std::map<std::string, MainState> fixed = {
        {"x", MainState::counter_of(Counter::X)},   {"y", MainState::counter_of(Counter::Y)},
        {"setup.x", MainState::setup(Counter::X)},  {"setup.y", MainState::setup(Counter::Y)},
        {"R1", MainState::of(Kind::ResR1)},         {"R2", MainState::of(Kind::ResR2)},
        {"sink1", MainState::of(Kind::Sink1)},      {"sink2", MainState::of(Kind::Sink2)},
        {"garbage", MainState::of(Kind::Garbage)},
    };
    if (auto it = fixed.find(main); it != fixed.end()) {
        ts.main = it->second;
        return ts;
    }
    if (main.rfind("i'.", 0) == 0) {
        auto m = parse_index(main.substr(3));
        if (!m) return std::nullopt;
        ts.main = MainState::intermediate(*m);
        return ts;
    }
    if (main.rfind("i.", 0) == 0) {
        auto m = parse_index(main.substr(2));
        if (!m) return std::nullopt;
        ts.main = MainState::instruction(*m);
        return ts;
    }
    for (Counter c : kCounters) {
        for (Flag f : kFlags) {
            if (main == main_name(MainState::shadow(c, f))) {
                ts.main = MainState::shadow(c, f);
                return ts;
            }
        }
    }
    return std::nullopt;
}

std::vector<MainState> main_states(const cm::CounterMachine& m) {
    std::vector<MainState> out;
    for (std::size_t i = 1; i <= m.size(); ++i) out.push_back(MainState::instruction(i));
    for (std::size_t i = 1; i <= m.size(); ++i)
        if (std::holds_alternative<cm::Dec>(m.at(i))) out.push_back(MainState::intermediate(i));
    for (Counter c : kCounters) out.push_back(MainState::counter_of(c));
    for (Counter c : kCounters)
        for (Flag f : kFlags) out.push_back(MainState::shadow(c, f));
    for (Counter c : kCounters) out.push_back(MainState::setup(c));
    for (Kind k : {Kind::ResR1, Kind::ResR2, Kind::Sink1, Kind::Sink2, Kind::Garbage}) out.push_back(MainState::of(k));
    return out;
}

StateLayout::StateLayout(const cm::CounterMachine& m) : mains_(main_states(m)), instr_count_(m.size()) {}

StateId StateLayout::id(const TaggedState& s) const {
    std::size_t j = 0;
    if (s.main.kind == Kind::Instr && s.main.instr >= 1 && s.main.instr <= instr_count_) {
        j = s.main.instr - 1;
    } else {
        auto it = std::find(mains_.begin(), mains_.end(), s.main);
        if (it == mains_.end()) throw Error("state " + state_name(s) + " does not exist for this machine");
        j = static_cast<std::size_t>(it - mains_.begin());
    }
    return StateId{static_cast<std::uint32_t>(2 * j + (s.tag == Tag::R1 ? 0 : 1))};
}

// ---------------------------------------------------------------------------
// Compiler

namespace {

using GuardSpec = ProtocolDraft::GuardSpec;

class RuleEmitter {
public:
    explicit RuleEmitter(ProtocolDraft& draft) : draft_(draft) {}

    // Lifts a main-level rule to every tag pair, dropping the Eq variant on
    // (R2, R2), where the input-violation rule takes over.
    void lifted(const std::string& family, const MainState& p, const MainState& pp, GuardSpec g, const MainState& q,
                const MainState& qq) {
        for (Tag t1 : {Tag::R1, Tag::R2}) {
            for (Tag t2 : {Tag::R1, Tag::R2}) {
                GuardSpec guard = g;
                if (t1 == Tag::R2 && t2 == Tag::R2) {
                    if (g == GuardSpec::Eq) continue;
                    if (g == GuardSpec::Any) guard = GuardSpec::Neq;
                }
                emit(family, {p, t1}, {pp, t2}, guard, {q, t1}, {qq, t2});
            }
        }
    }

    void emit(const std::string& family, const TaggedState& p, const TaggedState& pp, GuardSpec g, const TaggedState& q,
              const TaggedState& qq) {
        draft_.rules.push_back({state_name(p), state_name(pp), g, state_name(q), state_name(qq),
                                family + ":" + state_name(p) + "," + state_name(pp)});
    }

private:
    ProtocolDraft& draft_;
};

}  // namespace

Protocol compile(const cm::CounterMachine& m) {
    const auto mains = main_states(m);
    ProtocolDraft draft;
    for (const auto& s : mains) {
        for (Tag t : {Tag::R1, Tag::R2}) {
            const std::string name = state_name({s, t});
            draft.states.push_back(name);
            const bool reservoir = s.kind == Kind::ResR1 || s.kind == Kind::ResR2;
            draft.outputs.emplace_back(name, reservoir ? 1 : 0);
        }
    }
    draft.initial = {state_name({MainState::of(Kind::ResR1), Tag::R1}), state_name({MainState::of(Kind::ResR2), Tag::R2})};

    const MainState res1 = MainState::of(Kind::ResR1), res2 = MainState::of(Kind::ResR2);
    const MainState sink1 = MainState::of(Kind::Sink1), sink2 = MainState::of(Kind::Sink2);
    const MainState garbage = MainState::of(Kind::Garbage);
    RuleEmitter out(draft);

    for (const auto& p : mains)
        for (const auto& pp : mains)
            out.emit("input-violation", {p, Tag::R2}, {pp, Tag::R2}, GuardSpec::Eq, {sink2, Tag::R2}, {sink2, Tag::R2});

    for (Counter c : kCounters)
        for (Flag b : kFlags)
            out.lifted("counter-color-violation", MainState::shadow(c, b), MainState::counter_of(c), GuardSpec::Neq, sink2,
                       sink2);

    for (Flag b : kFlags)
        for (Flag bb : kFlags)
            out.lifted("control-state-violation", MainState::shadow(Counter::X, b), MainState::shadow(Counter::X, bb),
                       GuardSpec::Any, sink2, sink2);

    for (const auto& r : {res1, res2}) out.lifted("convert-to-sink1", sink1, r, GuardSpec::Any, sink1, sink1);

    for (const auto& q : mains) out.lifted("convert-to-sink2", sink2, q, GuardSpec::Any, sink2, sink2);

    out.lifted("setup1", res1, res2, GuardSpec::Any, MainState::setup(Counter::X), sink1);
    out.lifted("setup2", MainState::setup(Counter::X), res2, GuardSpec::Any, MainState::setup(Counter::Y),
               MainState::shadow(Counter::X, Flag::EqZero));
    out.lifted("setup3", MainState::setup(Counter::Y), res2, GuardSpec::Any, MainState::instruction(cm::resolve(m, 1)),
               MainState::shadow(Counter::Y, Flag::EqZero));

    for (Counter c : kCounters) {
        const std::string cs = counter_str(c);
        out.lifted("increment-" + cs, MainState::shadow(c, Flag::Plus), res1, GuardSpec::Eq,
                   MainState::shadow(c, Flag::GtZero), MainState::counter_of(c));
        out.lifted("decrement-" + cs, MainState::shadow(c, Flag::Minus), MainState::counter_of(c), GuardSpec::Eq,
                   MainState::shadow(c, Flag::EqZero), garbage);
        out.lifted("detect-nonzero-" + cs, MainState::shadow(c, Flag::EqZero), MainState::counter_of(c), GuardSpec::Eq,
                   MainState::shadow(c, Flag::GtZero), MainState::counter_of(c));
    }

    for (std::size_t i = 1; i <= m.size(); ++i) {
        const MainState here = MainState::instruction(i);
        if (auto* inc = std::get_if<cm::Inc>(&m.at(i))) {
            for (Flag b : {Flag::EqZero, Flag::GtZero})
                out.lifted("inc", here, MainState::shadow(inc->counter, b), GuardSpec::Any,
                           MainState::instruction(cm::next_instr(m, i)), MainState::shadow(inc->counter, Flag::Plus));
        } else if (auto* dec = std::get_if<cm::Dec>(&m.at(i))) {
            const Counter c = dec->counter;
            out.lifted("dec", here, MainState::shadow(c, Flag::GtZero), GuardSpec::Any,
                       MainState::instruction(cm::next_instr(m, i)), MainState::shadow(c, Flag::Minus));
            out.lifted("zero-test1", here, MainState::shadow(c, Flag::EqZero), GuardSpec::Any, MainState::intermediate(i),
                       garbage);
            out.lifted("zero-test2", MainState::intermediate(i), res2, GuardSpec::Any,
                       MainState::instruction(cm::resolve(m, dec->target)), MainState::shadow(c, Flag::EqZero));
        } else if (std::holds_alternative<cm::Halt>(m.at(i))) {
            out.lifted("cause-deadlock", here, sink1, GuardSpec::Any, here, garbage);
        }
    }

    return Protocol::build(draft);
}

// ---------------------------------------------------------------------------
// Witness

std::size_t witness_colors(std::uint64_t k) { return static_cast<std::size_t>(std::max<std::uint64_t>(2 * k, k + 3)); }

Configuration build_witness(const cm::CounterMachine& m, std::uint64_t k) {
    const auto run = cm::cm_run(m, k);
    if (!run.halted) {
        throw NotHalting("machine does not halt within " + std::to_string(k) + " steps (still running at " +
                         cm::to_string(run.final) + ")");
    }
    const StateLayout layout(m);
    const StateId r1 = layout.id(MainState::of(Kind::ResR1), Tag::R1);
    const StateId r2 = layout.id(MainState::of(Kind::ResR2), Tag::R2);
    std::vector<Configuration::Entry> entries;
    for (std::size_t i = 0; i < witness_colors(k); ++i) {
        entries.push_back({r1, ColorId{i}, 2 * k + 7});
        entries.push_back({r2, ColorId{i}, 1});
    }
    return Configuration::from_entries(std::move(entries));
}

// ---------------------------------------------------------------------------
// Scripted replay

namespace {

class Replayer {
public:
    Replayer(const Protocol& p, const cm::CounterMachine& m, const Configuration& c0) : p_(p), m_(m), layout_(m) {
        for (std::size_t i = 0; i < p.rules().size(); ++i) {
            const Rule& r = p.rules()[i];
            by_pre_.emplace(std::make_tuple(r.pre_first.index, r.pre_second.index, r.guard), i);
        }
        out_.trace.configs.push_back(c0);
    }

    SigmaTrace run() {
        const Configuration& c0 = out_.trace.configs.front();
        if (!is_initial(p_, c0)) throw StuckReplay("start configuration is not initial");

        out_.phase_starts.push_back(steps());
        const auto [setup_agent, setup_color] = need(MainState::of(Kind::ResR1), "an R1 agent for setup1");
        const auto [sink_agent, sink_color] = need(MainState::of(Kind::ResR2), "an R2 agent for setup1");
        step(setup_agent, setup_color, sink_agent, sink_color);
        const ColorId ctl = setup_color;
        const Tag ctl_tag = tag_of(setup_agent);

        auto [sx, cx] = fresh("a fresh R2 color for setup2");
        step(layout_.id(MainState::setup(Counter::X), ctl_tag), ctl, sx, cx);
        auto [sy, cy] = fresh("a fresh R2 color for setup3");
        step(layout_.id(MainState::setup(Counter::Y), ctl_tag), ctl, sy, cy);

        simulate(ctl, ctl_tag);

        out_.phase_starts.push_back(steps());
        while (auto r2 = find(MainState::of(Kind::ResR2))) {
            auto s1 = find(MainState::of(Kind::Sink1));
            if (!s1) throw StuckReplay("sink1 is empty before the R2 reservoir is drained");
            step(s1->first, s1->second, r2->first, r2->second);
        }

        out_.phase_starts.push_back(steps());
        const TaggedState halt_state{MainState::instruction(halt_pc_), ctl_tag};
        while (auto s1 = find(MainState::of(Kind::Sink1))) step(layout_.id(halt_state), ctl, s1->first, s1->second);

        out_.phase_starts.push_back(steps());
        for (bool fired = true; fired;) {
            fired = false;
            for (const auto& inst : enabled_instances(p_, current())) {
                const auto pre = parse_state_name(p_.name(inst.rule.pre_first));
                const auto post = parse_state_name(p_.name(inst.rule.post_first));
                if (pre && post && pre->main.kind == Kind::Shadow && pre->main.flag == Flag::EqZero &&
                    post->main.kind == Kind::Shadow && post->main.flag == Flag::GtZero &&
                    parse_state_name(p_.name(inst.rule.pre_second))->main.kind == Kind::Counter) {
                    append(inst);
                    fired = true;
                    break;
                }
            }
        }

        const Configuration& terminal = current();
        if (has_enabled_instance(p_, terminal)) {
            throw StuckReplay("final configuration is not a deadlock: " + enabled_instances(p_, terminal).front().rule.label +
                              " is enabled");
        }
        if (!find(MainState::of(Kind::ResR1))) throw StuckReplay("no R1 agent left in the final configuration");
        if (terminal.state_range(layout_.id(halt_state)).first == terminal.state_range(layout_.id(halt_state)).second) {
            throw StuckReplay("no agent in the halt instruction");
        }
        return std::move(out_);
    }

private:
    using Agent = std::pair<StateId, ColorId>;

    const Configuration& current() const { return out_.trace.configs.back(); }
    std::size_t steps() const { return out_.trace.fired.size(); }

    Tag tag_of(StateId s) const { return parse_state_name(p_.name(s))->tag; }

    // Smallest-colored agent in main state `main` (either tag) satisfying pred.
    template <typename Pred>
    std::optional<Agent> find(const MainState& main, Pred pred) const {
        std::optional<Agent> best;
        for (Tag t : {Tag::R1, Tag::R2}) {
            const StateId s = layout_.id(main, t);
            auto [lo, hi] = current().state_range(s);
            for (std::size_t i = lo; i < hi; ++i) {
                const ColorId d = current().entries()[i].color;
                if (pred(d) && (!best || d < best->second)) best = Agent{s, d};
            }
        }
        return best;
    }
    std::optional<Agent> find(const MainState& main) const {
        return find(main, [](ColorId) { return true; });
    }
    Agent need(const MainState& main, const std::string& what) const {
        if (auto a = find(main)) return *a;
        throw StuckReplay("ran out of " + what);
    }
    template <typename Pred>
    Agent need(const MainState& main, Pred pred, const std::string& what) const {
        if (auto a = find(main, pred)) return *a;
        throw StuckReplay("ran out of " + what);
    }

    // An R2 agent whose color never appeared in a shadow or counter state.
    Agent fresh(const std::string& what) {
        auto a = need(MainState::of(Kind::ResR2), [&](ColorId d) { return !used_.count(d); }, what);
        used_.insert(a.second);
        ++fresh_in_step_;
        return a;
    }

    void step(StateId s1, ColorId d, StateId s2, ColorId e) {
        const Guard g = d == e ? Guard::Eq : Guard::Neq;
        auto it = by_pre_.find(std::make_tuple(s1.index, s2.index, g));
        if (it == by_pre_.end()) {
            throw StuckReplay("no rule for (" + p_.name(s1) + ", " + p_.name(s2) + ") with guard " +
                              (g == Guard::Eq ? "eq" : "neq"));
        }
        TransitionInstance inst{it->second, p_.rules()[it->second], d, e};
        if (!instance_enabled(current(), inst)) {
            throw StuckReplay("scripted step " + inst.rule.label + " (" + std::to_string(d.value) + ", " +
                              std::to_string(e.value) + ") is not enabled");
        }
        append(inst);
    }

    void append(const TransitionInstance& inst) {
        Configuration next = fire(p_, current(), inst);
        out_.trace.configs.push_back(std::move(next));
        out_.trace.fired.push_back(inst);
    }

    void simulate(ColorId ctl, Tag ctl_tag) {
        out_.phase_starts.push_back(steps());
        const Count agents = current().total();
        const std::uint64_t max_machine_steps = (2 * agents + 1) * (m_.size() + 1);

        std::map<Counter, ColorId> shadow_color;
        shadow_color[Counter::X] = find(MainState::shadow(Counter::X, Flag::EqZero))->second;
        shadow_color[Counter::Y] = find(MainState::shadow(Counter::Y, Flag::EqZero))->second;

        cm::CmConfig s;
        for (;;) {
            const cm::Instr& instr = m_.at(s.pc);
            if (std::holds_alternative<cm::Halt>(instr)) break;
            if (out_.machine_steps >= max_machine_steps) {
                throw StuckReplay("machine did not halt within " + std::to_string(max_machine_steps) + " steps");
            }
            fresh_in_step_ = 0;
            const StateId here = layout_.id(MainState::instruction(s.pc), ctl_tag);

            if (auto* inc = std::get_if<cm::Inc>(&instr)) {
                const Counter c = inc->counter;
                const ColorId sc = shadow_color[c];
                const Agent sh = need_shadow(c, {Flag::EqZero, Flag::GtZero});
                step(here, ctl, sh.first, sc);
                const Agent res = need(MainState::of(Kind::ResR1), [&](ColorId d) { return d == sc; },
                                       "R1 agents of shadow color " + std::to_string(sc.value));
                step(layout_.id(MainState::shadow(c, Flag::Plus), tag_of(sh.first)), sc, res.first, sc);
            } else if (auto* dec = std::get_if<cm::Dec>(&instr)) {
                const Counter c = dec->counter;
                const ColorId sc = shadow_color[c];
                if (s.counter(c) > 0) {
                    Agent sh = need_shadow(c, {Flag::EqZero, Flag::GtZero});
                    const Agent ctr = need(MainState::counter_of(c), [&](ColorId d) { return d == sc; },
                                           "counter agents of color " + std::to_string(sc.value));
                    if (sh.first == layout_.id(MainState::shadow(c, Flag::EqZero), tag_of(sh.first))) {
                        step(sh.first, sc, ctr.first, sc);
                        sh = need_shadow(c, {Flag::GtZero});
                    }
                    step(here, ctl, sh.first, sc);
                    step(layout_.id(MainState::shadow(c, Flag::Minus), tag_of(sh.first)), sc, ctr.first, sc);
                } else {
                    const Agent sh = need_shadow(c, {Flag::EqZero});
                    step(here, ctl, sh.first, sc);
                    const auto [r2, f] = fresh("fresh R2 colors for a zero test");
                    step(layout_.id(MainState::intermediate(s.pc), ctl_tag), ctl, r2, f);
                    shadow_color[c] = f;
                }
            }
            out_.fresh_colors_per_step.push_back(fresh_in_step_);
            s = std::get<cm::CmConfig>(cm::cm_step(m_, s));
            ++out_.machine_steps;
        }
        halt_pc_ = s.pc;
    }

    Agent need_shadow(Counter c, std::initializer_list<Flag> flags) const {
        for (Flag f : flags)
            if (auto a = find(MainState::shadow(c, f))) return *a;
        throw StuckReplay(std::string("no shadow agent for counter ") + cm::counter_name(c) + " in the expected phase");
    }

    const Protocol& p_;
    const cm::CounterMachine& m_;
    StateLayout layout_;
    std::map<std::tuple<std::uint32_t, std::uint32_t, Guard>, std::size_t> by_pre_;
    std::set<ColorId> used_;
    std::size_t fresh_in_step_ = 0;
    std::size_t halt_pc_ = 0;
    SigmaTrace out_;
};

}  // namespace

SigmaTrace replay_sigma(const Protocol& compiled, const cm::CounterMachine& m, const Configuration& c0) {
    return Replayer(compiled, m, c0).run();
}

SigmaTrace replay_sigma(const cm::CounterMachine& m, const Configuration& c0) {
    const Protocol p = compile(m);
    return replay_sigma(p, m, c0);
}

// ---------------------------------------------------------------------------
// Observation monitors

namespace {

bool is_kind(const std::optional<TaggedState>& s, Kind k) { return s && s->main.kind == k; }

}  // namespace

std::vector<ObservationViolation> check_observations(const Protocol& p, const Trace& trace) {
    std::vector<ObservationViolation> out;
    std::vector<std::optional<TaggedState>> decoded(p.state_count());
    for (std::uint32_t i = 0; i < p.state_count(); ++i) decoded[i] = parse_state_name(p.name(StateId{i}));
    auto role = [&](StateId s) -> const std::optional<TaggedState>& { return decoded.at(s.index); };
    auto holds_counter_color = [&](StateId s) { return is_kind(role(s), Kind::Shadow) || is_kind(role(s), Kind::Counter); };

    std::set<ColorId> seen;
    auto absorb = [&](const Configuration& c) {
        for (const auto& e : c.entries())
            if (holds_counter_color(e.state)) seen.insert(e.color);
    };
    if (!trace.configs.empty()) absorb(trace.configs.front());

    for (std::size_t i = 0; i < trace.fired.size() && i + 1 < trace.configs.size(); ++i) {
        const auto& inst = trace.fired[i];
        const Rule& r = inst.rule;
        auto flag = [&](int obs, const std::string& msg) {
            out.push_back({i, obs, "step " + std::to_string(i) + " (" + r.label + "): " + msg});
        };

        if (!instance_enabled(trace.configs[i], inst) || fire_rule(trace.configs[i], inst) != trace.configs[i + 1]) {
            flag(0, "successor configuration does not result from the fired rule");
        }

        const StateId pre[2] = {r.pre_first, r.pre_second};
        const StateId post[2] = {r.post_first, r.post_second};
        const ColorId color[2] = {inst.d, inst.e};

        for (int j = 0; j < 2; ++j) {
            const auto& from = role(pre[j]);
            const auto& to = role(post[j]);
            const auto& partner = role(pre[1 - j]);

            // 1. fresh shadow colors
            if (is_kind(to, Kind::Shadow) && !is_kind(from, Kind::Shadow)) {
                if (!is_kind(from, Kind::ResR2)) flag(1, "agent enters " + p.name(post[j]) + " from " + p.name(pre[j]));
                if (seen.count(color[j])) {
                    flag(1, "color " + std::to_string(color[j].value) + " entering " + p.name(post[j]) + " was used before");
                }
            }

            // 2. counter agents move only together with their shadow
            const bool into_counter = is_kind(to, Kind::Counter) && !is_kind(from, Kind::Counter);
            const bool out_of_counter = is_kind(from, Kind::Counter) && !is_kind(to, Kind::Counter);
            if ((into_counter || (out_of_counter && !is_kind(to, Kind::Sink2)))) {
                const Counter c = into_counter ? to->main.counter : from->main.counter;
                const bool paired = is_kind(partner, Kind::Shadow) && partner->main.counter == c && color[0] == color[1];
                if (!paired) {
                    flag(2, "agent " + std::string(into_counter ? "enters " : "leaves ") +
                                p.name(into_counter ? post[j] : pre[j]) + " without a same-colored shadow");
                }
            }

            // 3. sink1 is emptied only by convert-to-sink2 or cause-deadlock
            if (is_kind(from, Kind::Sink1) && !is_kind(to, Kind::Sink1)) {
                const bool convert2 = j == 1 && is_kind(role(pre[0]), Kind::Sink2) && is_kind(role(post[0]), Kind::Sink2) &&
                                      is_kind(to, Kind::Sink2);
                const bool deadlock = j == 1 && is_kind(role(pre[0]), Kind::Instr) && post[0] == pre[0] &&
                                      is_kind(to, Kind::Garbage);
                if (!convert2 && !deadlock) flag(3, "agent leaves " + p.name(pre[j]) + " for " + p.name(post[j]));
            }

            // 4. reservoirs are never refilled
            if ((is_kind(to, Kind::ResR1) || is_kind(to, Kind::ResR2)) && pre[j] != post[j]) {
                flag(4, "agent enters reservoir " + p.name(post[j]) + " from " + p.name(pre[j]));
            }
        }
        absorb(trace.configs[i + 1]);
    }
    return out;
}

}  // namespace udpp::reduction
