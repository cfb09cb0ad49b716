// Population protocols with unordered data: states, colors, configurations,
// guarded pairwise rules and their single-step semantics.
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace udpp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A transition instance was fired at a configuration where it is not enabled.
class NotEnabled : public Error {
public:
    using Error::Error;
};

/// A draft protocol failed validation; the message lists every diagnostic.
class InvalidProtocol : public Error {
public:
    InvalidProtocol(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Index of a state inside its protocol's state table.
struct StateId {
    std::uint32_t index = 0;
    auto operator<=>(const StateId&) const = default;
};

/// An element of the data domain. Semantics only ever compares colors for
/// equality; the numeric order is used for deterministic iteration only.
struct ColorId {
    std::uint64_t value = 0;
    auto operator<=>(const ColorId&) const = default;
};

using Count = std::uint64_t;

enum class Guard : std::uint8_t { Eq, Neq };

inline bool guard_holds(Guard g, ColorId d, ColorId e) {
    return g == Guard::Eq ? d == e : d != e;
}

/// Finite-support map (state, color) -> count. Entries are kept sorted by
/// (state, color) and zero counts are never stored, so equality is structural.
class Configuration {
public:
    struct Entry {
        StateId state;
        ColorId color;
        Count count;
        bool operator==(const Entry&) const = default;
    };

    Configuration() = default;

    static Configuration singleton(StateId q, ColorId d) { return from_entries({{q, d, 1}}); }

    /// Builds a configuration from arbitrary (possibly repeated or zero) entries.
    static Configuration from_entries(std::vector<Entry> entries);

    Count count(StateId q, ColorId d) const;
    Count total() const;
    bool empty() const { return entries_.empty(); }

    /// Entries sorted by (state, color).
    const std::vector<Entry>& entries() const { return entries_; }

    /// Agents per color, summed over states.
    std::map<ColorId, Count> color_histogram() const;
    std::set<ColorId> colors() const;

    void add(StateId q, ColorId d, Count n = 1);
    /// Throws NotEnabled when fewer than n agents sit at (q, d).
    void remove(StateId q, ColorId d, Count n = 1);

    Configuration& operator+=(const Configuration& other);
    friend Configuration operator+(Configuration a, const Configuration& b) {
        a += b;
        return a;
    }

    bool operator==(const Configuration&) const = default;
    auto operator<=>(const Configuration& o) const {
        return std::lexicographical_compare_three_way(
            entries_.begin(), entries_.end(), o.entries_.begin(), o.entries_.end(),
            [](const Entry& a, const Entry& b) {
                if (auto c = a.state <=> b.state; c != 0) return c;
                if (auto c = a.color <=> b.color; c != 0) return c;
                return a.count <=> b.count;
            });
    }

    /// Index range of the entries whose state is q.
    std::pair<std::size_t, std::size_t> state_range(StateId q) const;

private:
    std::vector<Entry> entries_;
};

inline Configuration config_add(const Configuration& a, const Configuration& b) { return a + b; }
inline Configuration singleton(StateId q, ColorId d) { return Configuration::singleton(q, d); }

/// Applies a color renaming. Colors missing from the map are kept.
Configuration rename_colors(const Configuration& c, const std::map<ColorId, ColorId>& renaming);

struct Rule {
    StateId pre_first;
    StateId pre_second;
    Guard guard = Guard::Eq;
    StateId post_first;
    StateId post_second;
    std::string label;

    bool same_rewrite(const Rule& o) const {
        return pre_first == o.pre_first && pre_second == o.pre_second && guard == o.guard &&
               post_first == o.post_first && post_second == o.post_second;
    }
    bool operator==(const Rule&) const = default;
};

/// A rule together with the colors of its first and second role.
struct TransitionInstance {
    std::size_t rule_index = 0;
    Rule rule;
    ColorId d;
    ColorId e;

    bool operator==(const TransitionInstance&) const = default;
};

/// Protocol under construction, with states referenced by name. This is what
/// the text parser produces and what validate_protocol inspects.
struct ProtocolDraft {
    enum class GuardSpec { Eq, Neq, Any };
    struct RuleSpec {
        std::string pre_first, pre_second;
        GuardSpec guard = GuardSpec::Any;
        std::string post_first, post_second;
        std::string label;
    };

    std::vector<std::string> states;
    std::vector<RuleSpec> rules;
    std::vector<std::string> initial;
    std::vector<std::pair<std::string, int>> outputs;
};

/// One diagnostic per violated protocol invariant; empty iff well formed.
std::vector<std::string> validate_protocol(const ProtocolDraft& draft);

/// The 4-tuple (Q, rules, I, O). Immutable once built.
class Protocol {
public:
    /// Validates the draft and desugars `any` guards into an Eq and a Neq rule.
    /// Throws InvalidProtocol on any diagnostic.
    static Protocol build(const ProtocolDraft& draft);

    std::size_t state_count() const { return names_.size(); }
    const std::string& name(StateId q) const { return names_.at(q.index); }
    const std::vector<std::string>& state_names() const { return names_; }
    std::optional<StateId> find_state(const std::string& name) const;
    StateId state(const std::string& name) const;

    const std::vector<Rule>& rules() const { return rules_; }
    bool is_initial_state(StateId q) const { return initial_.at(q.index); }
    std::vector<StateId> initial_states() const;
    int output(StateId q) const { return output_.at(q.index); }

    /// Indices of rules whose first pre-role is q, ascending.
    const std::vector<std::size_t>& rules_with_first(StateId q) const { return by_first_.at(q.index); }

    ProtocolDraft to_draft() const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, StateId> index_;
    std::vector<Rule> rules_;
    std::vector<bool> initial_;
    std::vector<int> output_;
    std::vector<std::vector<std::size_t>> by_first_;
};

std::vector<std::string> validate_protocol(const Protocol& p);

std::set<StateId> active_states(const Configuration& c);
bool is_initial(const Protocol& p, const Configuration& c);

/// Every enabled (rule, d, e), ordered by rule index, then d, then e.
std::vector<TransitionInstance> enabled_instances(const Protocol& p, const Configuration& c);
bool has_enabled_instance(const Protocol& p, const Configuration& c);

/// True iff the instance's own rule can fire at c with colors (d, e).
bool instance_enabled(const Configuration& c, const TransitionInstance& inst);

/// c - (p_d + p'_e) + (q_d + q'_e). Throws NotEnabled if inst is not enabled at c.
Configuration fire(const Protocol& p, const Configuration& c, const TransitionInstance& inst);
/// Same, without checking that the rule belongs to a protocol.
Configuration fire_rule(const Configuration& c, const TransitionInstance& inst);

TransitionInstance rename_colors(const TransitionInstance& inst, const std::map<ColorId, ColorId>& renaming);

/// An execution prefix: configs[i+1] results from firing fired[i] at configs[i].
struct Trace {
    std::vector<Configuration> configs;
    std::vector<TransitionInstance> fired;

    const Configuration& last() const { return configs.back(); }
    std::size_t steps() const { return fired.size(); }
};

}  // namespace udpp

template <>
struct std::hash<udpp::Configuration> {
    std::size_t operator()(const udpp::Configuration& c) const noexcept;
};
