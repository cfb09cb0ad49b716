#include "udpp/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace udpp {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::ostringstream out;
    out << "invalid protocol:";
    for (const auto& l : lines) out << "\n  " << l;
    return out.str();
}

bool entry_key_less(const Configuration::Entry& a, const Configuration::Entry& b) {
    return std::tie(a.state, a.color) < std::tie(b.state, b.color);
}

}  // namespace

InvalidProtocol::InvalidProtocol(std::vector<std::string> diagnostics)
    : Error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

// ---------------------------------------------------------------------------
// Configuration

Configuration Configuration::from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), entry_key_less);
    Configuration c;
    for (const auto& e : entries) {
        if (e.count == 0) continue;
        if (!c.entries_.empty() && c.entries_.back().state == e.state && c.entries_.back().color == e.color) {
            c.entries_.back().count += e.count;
        } else {
            c.entries_.push_back(e);
        }
    }
    return c;
}

Count Configuration::count(StateId q, ColorId d) const {
    Entry key{q, d, 0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_key_less);
    if (it != entries_.end() && it->state == q && it->color == d) return it->count;
    return 0;
}

Count Configuration::total() const {
    return std::accumulate(entries_.begin(), entries_.end(), Count{0},
                           [](Count acc, const Entry& e) { return acc + e.count; });
}

std::map<ColorId, Count> Configuration::color_histogram() const {
    std::map<ColorId, Count> h;
    for (const auto& e : entries_) h[e.color] += e.count;
    return h;
}

std::set<ColorId> Configuration::colors() const {
    std::set<ColorId> s;
    for (const auto& e : entries_) s.insert(e.color);
    return s;
}

void Configuration::add(StateId q, ColorId d, Count n) {
    if (n == 0) return;
    Entry key{q, d, n};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_key_less);
    if (it != entries_.end() && it->state == q && it->color == d) {
        it->count += n;
    } else {
        entries_.insert(it, key);
    }
}

void Configuration::remove(StateId q, ColorId d, Count n) {
    if (n == 0) return;
    Entry key{q, d, n};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_key_less);
    if (it == entries_.end() || it->state != q || it->color != d || it->count < n) {
        throw NotEnabled("not enough agents at state #" + std::to_string(q.index) + " color " +
                         std::to_string(d.value));
    }
    it->count -= n;
    if (it->count == 0) entries_.erase(it);
}

Configuration& Configuration::operator+=(const Configuration& other) {
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
        if (b == other.entries_.end() || (a != entries_.end() && entry_key_less(*a, *b))) {
            merged.push_back(*a++);
        } else if (a == entries_.end() || entry_key_less(*b, *a)) {
            merged.push_back(*b++);
        } else {
            merged.push_back({a->state, a->color, a->count + b->count});
            ++a;
            ++b;
        }
    }
    entries_ = std::move(merged);
    return *this;
}

std::pair<std::size_t, std::size_t> Configuration::state_range(StateId q) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), q,
                               [](const Entry& e, StateId s) { return e.state < s; });
    auto hi = std::upper_bound(lo, entries_.end(), q, [](StateId s, const Entry& e) { return s < e.state; });
    return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
}

Configuration rename_colors(const Configuration& c, const std::map<ColorId, ColorId>& renaming) {
    std::vector<Configuration::Entry> out;
    out.reserve(c.entries().size());
    for (auto e : c.entries()) {
        if (auto it = renaming.find(e.color); it != renaming.end()) e.color = it->second;
        out.push_back(e);
    }
    return Configuration::from_entries(std::move(out));
}

TransitionInstance rename_colors(const TransitionInstance& inst, const std::map<ColorId, ColorId>& renaming) {
    TransitionInstance r = inst;
    if (auto it = renaming.find(inst.d); it != renaming.end()) r.d = it->second;
    if (auto it = renaming.find(inst.e); it != renaming.end()) r.e = it->second;
    return r;
}

// ---------------------------------------------------------------------------
// Protocol

std::vector<std::string> validate_protocol(const ProtocolDraft& draft) {
    std::vector<std::string> diags;
    std::set<std::string> declared;
    for (const auto& s : draft.states) {
        if (s.empty()) {
            diags.push_back("empty state identifier");
        } else if (!declared.insert(s).second) {
            diags.push_back("duplicate state '" + s + "'");
        }
    }
    for (std::size_t i = 0; i < draft.rules.size(); ++i) {
        const auto& r = draft.rules[i];
        const std::string where = r.label.empty() ? "rule #" + std::to_string(i + 1) : "rule '" + r.label + "'";
        for (const auto* s : {&r.pre_first, &r.pre_second, &r.post_first, &r.post_second}) {
            if (!declared.count(*s)) diags.push_back(where + " references undeclared state '" + *s + "'");
        }
    }
    std::set<std::string> init_seen;
    for (const auto& s : draft.initial) {
        if (!declared.count(s)) diags.push_back("initial state '" + s + "' is not declared");
        if (!init_seen.insert(s).second) diags.push_back("initial state '" + s + "' listed twice");
    }
    std::map<std::string, int> out;
    for (const auto& [s, b] : draft.outputs) {
        if (!declared.count(s)) diags.push_back("output for undeclared state '" + s + "'");
        if (b != 0 && b != 1) diags.push_back("output of '" + s + "' must be 0 or 1");
        if (!out.emplace(s, b).second) diags.push_back("output of '" + s + "' defined twice");
    }
    for (const auto& s : draft.states) {
        if (!out.count(s) && std::count(draft.states.begin(), draft.states.end(), s) == 1) {
            diags.push_back("no output defined for state '" + s + "'");
        }
    }
    return diags;
}

Protocol Protocol::build(const ProtocolDraft& draft) {
    if (auto diags = validate_protocol(draft); !diags.empty()) throw InvalidProtocol(std::move(diags));

    Protocol p;
    p.names_ = draft.states;
    for (std::uint32_t i = 0; i < p.names_.size(); ++i) p.index_.emplace(p.names_[i], StateId{i});
    p.initial_.assign(p.names_.size(), false);
    for (const auto& s : draft.initial) p.initial_[p.index_.at(s).index] = true;
    p.output_.assign(p.names_.size(), 0);
    for (const auto& [s, b] : draft.outputs) p.output_[p.index_.at(s).index] = b;

    for (std::size_t i = 0; i < draft.rules.size(); ++i) {
        const auto& r = draft.rules[i];
        Rule rule{p.index_.at(r.pre_first), p.index_.at(r.pre_second), Guard::Eq,
                  p.index_.at(r.post_first), p.index_.at(r.post_second),
                  r.label.empty() ? "rule" + std::to_string(i + 1) : r.label};
        switch (r.guard) {
            case ProtocolDraft::GuardSpec::Eq:
                p.rules_.push_back(rule);
                break;
            case ProtocolDraft::GuardSpec::Neq:
                rule.guard = Guard::Neq;
                p.rules_.push_back(rule);
                break;
            case ProtocolDraft::GuardSpec::Any:
                p.rules_.push_back(rule);
                rule.guard = Guard::Neq;
                p.rules_.push_back(rule);
                break;
        }
    }

    p.by_first_.resize(p.names_.size());
    for (std::size_t i = 0; i < p.rules_.size(); ++i) p.by_first_[p.rules_[i].pre_first.index].push_back(i);
    return p;
}

std::optional<StateId> Protocol::find_state(const std::string& name) const {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    return std::nullopt;
}

StateId Protocol::state(const std::string& name) const {
    if (auto s = find_state(name)) return *s;
    throw Error("unknown state '" + name + "'");
}

std::vector<StateId> Protocol::initial_states() const {
    std::vector<StateId> out;
    for (std::uint32_t i = 0; i < initial_.size(); ++i)
        if (initial_[i]) out.push_back(StateId{i});
    return out;
}

ProtocolDraft Protocol::to_draft() const {
    ProtocolDraft d;
    d.states = names_;
    for (const auto& r : rules_) {
        d.rules.push_back({name(r.pre_first), name(r.pre_second),
                           r.guard == Guard::Eq ? ProtocolDraft::GuardSpec::Eq : ProtocolDraft::GuardSpec::Neq,
                           name(r.post_first), name(r.post_second), r.label});
    }
    for (auto q : initial_states()) d.initial.push_back(name(q));
    for (std::uint32_t i = 0; i < names_.size(); ++i) d.outputs.emplace_back(names_[i], output_[i]);
    return d;
}

std::vector<std::string> validate_protocol(const Protocol& p) { return validate_protocol(p.to_draft()); }

// ---------------------------------------------------------------------------
// Semantics

std::set<StateId> active_states(const Configuration& c) {
    std::set<StateId> s;
    for (const auto& e : c.entries()) s.insert(e.state);
    return s;
}

bool is_initial(const Protocol& p, const Configuration& c) {
    return std::all_of(c.entries().begin(), c.entries().end(),
                       [&](const Configuration::Entry& e) { return p.is_initial_state(e.state); });
}

namespace {

template <typename Visit>
void for_each_enabled(const Protocol& p, const Configuration& c, Visit&& visit) {
    const auto& entries = c.entries();
    std::vector<bool> seen_first(p.state_count(), false);
    for (const auto& e : entries) {
        if (seen_first[e.state.index]) continue;
        seen_first[e.state.index] = true;
        auto [flo, fhi] = c.state_range(e.state);
        for (std::size_t ri : p.rules_with_first(e.state)) {
            const Rule& r = p.rules()[ri];
            auto [slo, shi] = c.state_range(r.pre_second);
            for (std::size_t i = flo; i < fhi; ++i) {
                for (std::size_t j = slo; j < shi; ++j) {
                    const auto& a = entries[i];
                    const auto& b = entries[j];
                    if (!guard_holds(r.guard, a.color, b.color)) continue;
                    if (i == j && a.count < 2) continue;
                    if (!visit(ri, a.color, b.color)) return;
                }
            }
        }
    }
}

}  // namespace

std::vector<TransitionInstance> enabled_instances(const Protocol& p, const Configuration& c) {
    std::vector<TransitionInstance> out;
    for_each_enabled(p, c, [&](std::size_t ri, ColorId d, ColorId e) {
        out.push_back({ri, p.rules()[ri], d, e});
        return true;
    });
    std::sort(out.begin(), out.end(), [](const TransitionInstance& a, const TransitionInstance& b) {
        return std::tie(a.rule_index, a.d, a.e) < std::tie(b.rule_index, b.d, b.e);
    });
    return out;
}

bool has_enabled_instance(const Protocol& p, const Configuration& c) {
    bool any = false;
    for_each_enabled(p, c, [&](std::size_t, ColorId, ColorId) {
        any = true;
        return false;
    });
    return any;
}

bool instance_enabled(const Configuration& c, const TransitionInstance& inst) {
    const Rule& r = inst.rule;
    if (!guard_holds(r.guard, inst.d, inst.e)) return false;
    if (r.pre_first == r.pre_second && inst.d == inst.e) return c.count(r.pre_first, inst.d) >= 2;
    return c.count(r.pre_first, inst.d) >= 1 && c.count(r.pre_second, inst.e) >= 1;
}

Configuration fire_rule(const Configuration& c, const TransitionInstance& inst) {
    if (!instance_enabled(c, inst)) {
        throw NotEnabled("transition '" + inst.rule.label + "' with colors (" + std::to_string(inst.d.value) +
                         ", " + std::to_string(inst.e.value) + ") is not enabled");
    }
    Configuration next = c;
    next.remove(inst.rule.pre_first, inst.d);
    next.remove(inst.rule.pre_second, inst.e);
    next.add(inst.rule.post_first, inst.d);
    next.add(inst.rule.post_second, inst.e);
    return next;
}

Configuration fire(const Protocol& p, const Configuration& c, const TransitionInstance& inst) {
    if (inst.rule_index >= p.rules().size() || !p.rules()[inst.rule_index].same_rewrite(inst.rule)) {
        throw NotEnabled("transition '" + inst.rule.label + "' does not belong to the protocol");
    }
    return fire_rule(c, inst);
}

}  // namespace udpp

std::size_t std::hash<udpp::Configuration>::operator()(const udpp::Configuration& c) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    for (const auto& e : c.entries()) {
        mix(e.state.index);
        mix(e.color.value);
        mix(e.count);
    }
    return h;
}
