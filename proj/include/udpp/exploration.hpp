// Output classification of finite initial configurations.
//
// A fair execution over a finite reachability graph eventually stays inside
// one bottom strongly connected component and visits each of its nodes
// infinitely often. An initial configuration therefore has output b exactly
// when every node of every reachable bottom SCC has all its active states
// mapped to b. Deadlocks are treated as stuttering forever and form
// singleton bottom SCCs.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "udpp/core.hpp"

namespace udpp {

class TruncatedGraph : public Error {
public:
    using Error::Error;
};

class EmptyConfiguration : public Error {
public:
    using Error::Error;
};

/// A configuration up to color renaming: one sparse state-count vector per
/// color, sorted lexicographically.
struct CanonicalConfig {
    using ColorVector = std::vector<std::pair<StateId, Count>>;
    std::vector<ColorVector> signature;

    bool operator==(const CanonicalConfig&) const = default;
    auto operator<=>(const CanonicalConfig&) const = default;
};

CanonicalConfig canonicalize(const Configuration& c);

/// The representative of a canonical form: the i-th vector gets color i.
Configuration materialize(const CanonicalConfig& cc);

/// Compact one-token rendering, e.g. `{p:2}{q:1}`.
std::string format_canonical(const Protocol& p, const CanonicalConfig& cc);

struct ExplorationLimits {
    std::size_t max_nodes = 100000;
    std::optional<std::size_t> max_depth;
};

struct ReachGraph {
    std::vector<CanonicalConfig> nodes;
    /// Sorted, duplicate-free successor lists. Self-loops are kept.
    std::vector<std::vector<std::size_t>> edges;
    std::size_t root = 0;
    bool truncated = false;
    std::string truncation_reason;

    std::optional<std::size_t> find(const CanonicalConfig& cc) const;

private:
    friend ReachGraph explore(const Protocol&, const Configuration&, const ExplorationLimits&);
    struct Hash {
        std::size_t operator()(const CanonicalConfig& cc) const noexcept;
    };
    std::unordered_map<CanonicalConfig, std::size_t, Hash> index_;
};

/// Breadth-first closure of canonical forms from c0.
ReachGraph explore(const Protocol& p, const Configuration& c0, const ExplorationLimits& lim = {});

/// Strongly connected components of an adjacency list (iterative Tarjan),
/// each sorted ascending, in reverse topological order.
std::vector<std::vector<std::size_t>> strongly_connected_components(const std::vector<std::vector<std::size_t>>& edges);

/// Components without leaving edges. Throws TruncatedGraph on truncated graphs.
std::vector<std::vector<std::size_t>> bottom_sccs(const ReachGraph& g);

struct OutputClass {
    enum class Verdict { Out0, Out1, NoOutput, Unknown };
    Verdict verdict = Verdict::Unknown;
    /// Set for Unknown: the exceeded limit.
    std::string reason;

    bool operator==(const OutputClass&) const = default;
    static OutputClass out(int b) { return {b == 0 ? Verdict::Out0 : Verdict::Out1, {}}; }
    static OutputClass no_output() { return {Verdict::NoOutput, {}}; }
    static OutputClass unknown(std::string why) { return {Verdict::Unknown, std::move(why)}; }
};

std::string to_string(const OutputClass& oc);

/// Consensus output of a single node, if all of its active states agree.
std::optional<int> consensus(const Protocol& p, const Configuration& c);

/// Classification of an already explored graph.
OutputClass classify_graph(const Protocol& p, const ReachGraph& g);

/// Throws EmptyConfiguration for the empty configuration.
OutputClass classify_output(const Protocol& p, const Configuration& c0, const ExplorationLimits& lim = {});

/// A lasso: a concrete prefix from the initial configuration into a bottom
/// SCC, then a closed walk through every node of that component. The walk
/// ends in a color renaming of its first configuration.
struct Lasso {
    Trace prefix;
    Trace cycle;
};

/// Executions witnessing NoOutput: one lasso through a mixed bottom SCC, or
/// two lassos reaching bottom SCCs with different consensus.
std::vector<Lasso> no_output_witness(const Protocol& p, const Configuration& c0, const ReachGraph& g);

/// Every canonical configuration with exactly n agents on initial states and
/// at most k colors, sorted.
std::vector<CanonicalConfig> enumerate_initial_configs(const Protocol& p, std::size_t n, std::size_t k);

struct WellSpecReport {
    enum class Verdict { NotWellSpecified, WellSpecifiedUpToBounds, Inconclusive };
    struct Entry {
        CanonicalConfig config;
        OutputClass output;
    };
    std::vector<Entry> entries;
    Verdict verdict = Verdict::WellSpecifiedUpToBounds;

    std::optional<CanonicalConfig> first_witness() const;
};

std::string to_string(WellSpecReport::Verdict v);

/// Classifies every initial configuration with 1..max_agents agents and at
/// most max_colors colors. A NoOutput entry decides the verdict even when
/// other entries are Unknown. Configurations are classified on `workers`
/// threads; the report order does not depend on it.
WellSpecReport check_well_specification(const Protocol& p, std::size_t max_agents, std::size_t max_colors,
                                        const ExplorationLimits& lim = {}, unsigned workers = 1);

/// `<canonical-config> <verdict>` lines followed by `verdict: ...`.
std::string format_report(const Protocol& p, const WellSpecReport& r);

/// Uniformly random scheduler over enabled_instances, seeded with mt19937_64.
/// Stops at a deadlock or after max_steps fires.
Trace random_fair_run(const Protocol& p, const Configuration& c0, std::uint64_t seed, std::size_t max_steps);

}  // namespace udpp
