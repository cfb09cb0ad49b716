#include "udpp/exploration.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace udpp {

// ---------------------------------------------------------------------------
// Canonical forms

CanonicalConfig canonicalize(const Configuration& c) {
    std::map<ColorId, CanonicalConfig::ColorVector> per_color;
    for (const auto& e : c.entries()) per_color[e.color].emplace_back(e.state, e.count);
    CanonicalConfig cc;
    cc.signature.reserve(per_color.size());
    for (auto& [color, vec] : per_color) cc.signature.push_back(std::move(vec));
    std::sort(cc.signature.begin(), cc.signature.end());
    return cc;
}

Configuration materialize(const CanonicalConfig& cc) {
    std::vector<Configuration::Entry> entries;
    for (std::size_t i = 0; i < cc.signature.size(); ++i)
        for (const auto& [q, n] : cc.signature[i]) entries.push_back({q, ColorId{i}, n});
    return Configuration::from_entries(std::move(entries));
}

std::string format_canonical(const Protocol& p, const CanonicalConfig& cc) {
    if (cc.signature.empty()) return "{}";
    std::ostringstream out;
    for (const auto& vec : cc.signature) {
        out << '{';
        for (std::size_t i = 0; i < vec.size(); ++i) {
            if (i) out << ',';
            out << p.name(vec[i].first) << ':' << vec[i].second;
        }
        out << '}';
    }
    return out.str();
}

std::size_t ReachGraph::Hash::operator()(const CanonicalConfig& cc) const noexcept {
    std::size_t h = 0x84222325cbf29ce4ULL;
    auto mix = [&](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (const auto& vec : cc.signature) {
        mix(vec.size());
        for (const auto& [q, n] : vec) {
            mix(q.index);
            mix(n);
        }
    }
    return h;
}

std::optional<std::size_t> ReachGraph::find(const CanonicalConfig& cc) const {
    if (auto it = index_.find(cc); it != index_.end()) return it->second;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reachability

ReachGraph explore(const Protocol& p, const Configuration& c0, const ExplorationLimits& lim) {
    if (lim.max_nodes < 1) throw Error("max_nodes must be at least 1");
    ReachGraph g;
    std::vector<std::size_t> depth;
    auto intern = [&](CanonicalConfig cc, std::size_t d) -> std::optional<std::size_t> {
        if (auto it = g.index_.find(cc); it != g.index_.end()) return it->second;
        if (g.nodes.size() >= lim.max_nodes) return std::nullopt;
        const std::size_t id = g.nodes.size();
        g.index_.emplace(cc, id);
        g.nodes.push_back(std::move(cc));
        g.edges.emplace_back();
        depth.push_back(d);
        return id;
    };

    g.root = *intern(canonicalize(c0), 0);
    std::deque<std::size_t> queue{g.root};
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        const Configuration rep = materialize(g.nodes[u]);
        if (lim.max_depth && depth[u] >= *lim.max_depth) {
            if (has_enabled_instance(p, rep)) {
                g.truncated = true;
                g.truncation_reason = "max_depth=" + std::to_string(*lim.max_depth);
            }
            continue;
        }
        std::vector<std::size_t> succ;
        for (const auto& inst : enabled_instances(p, rep)) {
            const std::size_t before = g.nodes.size();
            auto v = intern(canonicalize(fire_rule(rep, inst)), depth[u] + 1);
            if (!v) {
                g.truncated = true;
                g.truncation_reason = "max_nodes=" + std::to_string(lim.max_nodes);
                std::sort(succ.begin(), succ.end());
                succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
                g.edges[u] = std::move(succ);
                return g;
            }
            if (g.nodes.size() > before) queue.push_back(*v);
            succ.push_back(*v);
        }
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        g.edges[u] = std::move(succ);
    }
    return g;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const std::vector<std::vector<std::size_t>>& edges) {
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    const std::size_t n = edges.size();
    std::vector<std::size_t> number(n, unvisited), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> sccs;
    std::size_t counter = 0;

    // Explicit DFS stack of (vertex, next successor position).
    std::vector<std::pair<std::size_t, std::size_t>> dfs;
    for (std::size_t start = 0; start < n; ++start) {
        if (number[start] != unvisited) continue;
        dfs.emplace_back(start, 0);
        number[start] = lowlink[start] = counter++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!dfs.empty()) {
            auto& [v, pos] = dfs.back();
            if (pos < edges[v].size()) {
                const std::size_t w = edges[v][pos++];
                if (number[w] == unvisited) {
                    number[w] = lowlink[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    dfs.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], number[w]);
                }
                continue;
            }
            const std::size_t done = v;
            dfs.pop_back();
            if (!dfs.empty()) lowlink[dfs.back().first] = std::min(lowlink[dfs.back().first], lowlink[done]);
            if (lowlink[done] == number[done]) {
                std::vector<std::size_t> scc;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    scc.push_back(w);
                } while (w != done);
                std::sort(scc.begin(), scc.end());
                sccs.push_back(std::move(scc));
            }
        }
    }
    return sccs;
}

std::vector<std::vector<std::size_t>> bottom_sccs(const ReachGraph& g) {
    if (g.truncated) throw TruncatedGraph("reachability graph is truncated (" + g.truncation_reason + ")");
    auto sccs = strongly_connected_components(g.edges);
    std::vector<std::size_t> component(g.nodes.size());
    for (std::size_t i = 0; i < sccs.size(); ++i)
        for (auto v : sccs[i]) component[v] = i;
    std::vector<std::vector<std::size_t>> bottom;
    for (std::size_t i = 0; i < sccs.size(); ++i) {
        bool closed = true;
        for (auto v : sccs[i])
            for (auto w : g.edges[v])
                if (component[w] != i) closed = false;
        if (closed) bottom.push_back(sccs[i]);
    }
    std::sort(bottom.begin(), bottom.end());
    return bottom;
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(const OutputClass& oc) {
    switch (oc.verdict) {
        case OutputClass::Verdict::Out0: return "Out0";
        case OutputClass::Verdict::Out1: return "Out1";
        case OutputClass::Verdict::NoOutput: return "NoOutput";
        case OutputClass::Verdict::Unknown: return "Unknown(" + oc.reason + ")";
    }
    return "?";
}

std::optional<int> consensus(const Protocol& p, const Configuration& c) {
    std::optional<int> b;
    for (const auto& e : c.entries()) {
        const int o = p.output(e.state);
        if (b && *b != o) return std::nullopt;
        b = o;
    }
    return b;
}

namespace {

// Consensus shared by every node of a component, if any.
std::optional<int> component_consensus(const Protocol& p, const ReachGraph& g, const std::vector<std::size_t>& scc) {
    std::optional<int> b;
    for (auto v : scc) {
        auto o = consensus(p, materialize(g.nodes[v]));
        if (!o || (b && *b != *o)) return std::nullopt;
        b = o;
    }
    return b;
}

}  // namespace

OutputClass classify_graph(const Protocol& p, const ReachGraph& g) {
    if (g.truncated) return OutputClass::unknown(g.truncation_reason);
    std::optional<int> b;
    for (const auto& scc : bottom_sccs(g)) {
        auto o = component_consensus(p, g, scc);
        if (!o || (b && *b != *o)) return OutputClass::no_output();
        b = o;
    }
    // The root node always reaches some bottom SCC, so b is set here unless
    // the configuration is empty (rejected by the caller).
    return b ? OutputClass::out(*b) : OutputClass::no_output();
}

OutputClass classify_output(const Protocol& p, const Configuration& c0, const ExplorationLimits& lim) {
    if (c0.empty()) throw EmptyConfiguration("cannot classify the empty configuration");
    return classify_graph(p, explore(p, c0, lim));
}

namespace {

// Shortest path u -> v restricted to nodes with allowed[node] (all if empty).
std::vector<std::size_t> shortest_path(const ReachGraph& g, std::size_t from, std::size_t to,
                                       const std::vector<bool>& allowed) {
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(g.nodes.size(), none);
    std::deque<std::size_t> queue{from};
    parent[from] = from;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        if (u == to) break;
        for (auto w : g.edges[u]) {
            if (parent[w] != none || (!allowed.empty() && !allowed[w])) continue;
            parent[w] = u;
            queue.push_back(w);
        }
    }
    if (parent[to] == none) throw Error("internal: no path in reachability graph");
    std::vector<std::size_t> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

// Replays a node path concretely starting at `start`.
Trace concretize(const Protocol& p, const ReachGraph& g, const Configuration& start, const std::vector<std::size_t>& path) {
    Trace t;
    t.configs.push_back(start);
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Configuration& cur = t.configs.back();
        bool stepped = false;
        for (const auto& inst : enabled_instances(p, cur)) {
            Configuration next = fire_rule(cur, inst);
            if (canonicalize(next) == g.nodes[path[i]]) {
                t.fired.push_back(inst);
                t.configs.push_back(std::move(next));
                stepped = true;
                break;
            }
        }
        if (!stepped) throw Error("internal: graph edge has no concrete instance");
    }
    return t;
}

Lasso lasso_into(const Protocol& p, const ReachGraph& g, const Configuration& c0, const std::vector<std::size_t>& scc) {
    // Entry: the component node closest to the root.
    std::vector<std::size_t> to_entry;
    for (auto v : scc) {
        auto path = shortest_path(g, g.root, v, {});
        if (to_entry.empty() || path.size() < to_entry.size()) to_entry = std::move(path);
    }
    Lasso lasso;
    lasso.prefix = concretize(p, g, c0, to_entry);
    const std::size_t entry = to_entry.back();

    std::vector<std::size_t> walk{entry};
    if (scc.size() > 1) {
        std::vector<bool> inside(g.nodes.size(), false);
        for (auto v : scc) inside[v] = true;
        for (auto v : scc) {
            if (v == entry) continue;
            auto leg = shortest_path(g, walk.back(), v, inside);
            walk.insert(walk.end(), leg.begin() + 1, leg.end());
        }
        auto back = shortest_path(g, walk.back(), entry, inside);
        walk.insert(walk.end(), back.begin() + 1, back.end());
    }
    lasso.cycle = concretize(p, g, lasso.prefix.last(), walk);
    return lasso;
}

}  // namespace

std::vector<Lasso> no_output_witness(const Protocol& p, const Configuration& c0, const ReachGraph& g) {
    const auto bottoms = bottom_sccs(g);
    std::map<int, const std::vector<std::size_t>*> by_output;
    for (const auto& scc : bottoms) {
        auto o = component_consensus(p, g, scc);
        if (!o) return {lasso_into(p, g, c0, scc)};
        by_output.emplace(*o, &scc);
    }
    if (by_output.size() == 2) return {lasso_into(p, g, c0, *by_output[0]), lasso_into(p, g, c0, *by_output[1])};
    return {};
}

// ---------------------------------------------------------------------------
// Bounded well-specification

namespace {

void vectors_with_sum(const std::vector<StateId>& states, std::size_t pos, Count remaining,
                      CanonicalConfig::ColorVector& cur, std::vector<CanonicalConfig::ColorVector>& out) {
    if (pos == states.size()) {
        if (remaining == 0) out.push_back(cur);
        return;
    }
    for (Count n = 0; n <= remaining; ++n) {
        if (n > 0) cur.emplace_back(states[pos], n);
        vectors_with_sum(states, pos + 1, remaining - n, cur, out);
        if (n > 0) cur.pop_back();
    }
}

void choose_multisets(const std::vector<CanonicalConfig::ColorVector>& vecs, const std::vector<Count>& sizes,
                      std::size_t start, Count remaining, std::size_t colors_left,
                      std::vector<CanonicalConfig::ColorVector>& cur, std::vector<CanonicalConfig>& out) {
    if (remaining == 0) {
        out.push_back(CanonicalConfig{cur});
        return;
    }
    if (colors_left == 0) return;
    for (std::size_t i = start; i < vecs.size(); ++i) {
        if (sizes[i] > remaining) continue;
        cur.push_back(vecs[i]);
        choose_multisets(vecs, sizes, i, remaining - sizes[i], colors_left - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<CanonicalConfig> enumerate_initial_configs(const Protocol& p, std::size_t n, std::size_t k) {
    if (n < 1 || k < 1) throw Error("enumerate_initial_configs needs n >= 1 and k >= 1");
    const auto init = p.initial_states();
    std::vector<CanonicalConfig::ColorVector> vecs;
    CanonicalConfig::ColorVector scratch;
    for (Count s = 1; s <= n; ++s) vectors_with_sum(init, 0, s, scratch, vecs);
    std::sort(vecs.begin(), vecs.end());
    std::vector<Count> sizes;
    for (const auto& v : vecs) {
        Count s = 0;
        for (const auto& [q, c] : v) s += c;
        sizes.push_back(s);
    }
    std::vector<CanonicalConfig> out;
    std::vector<CanonicalConfig::ColorVector> cur;
    choose_multisets(vecs, sizes, 0, n, k, cur, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<CanonicalConfig> WellSpecReport::first_witness() const {
    for (const auto& e : entries)
        if (e.output.verdict == OutputClass::Verdict::NoOutput) return e.config;
    return std::nullopt;
}

std::string to_string(WellSpecReport::Verdict v) {
    switch (v) {
        case WellSpecReport::Verdict::NotWellSpecified: return "not-well-specified";
        case WellSpecReport::Verdict::WellSpecifiedUpToBounds: return "well-specified-up-to-bounds";
        case WellSpecReport::Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

WellSpecReport check_well_specification(const Protocol& p, std::size_t max_agents, std::size_t max_colors,
                                        const ExplorationLimits& lim, unsigned workers) {
    if (max_agents < 1) throw Error("max_agents must be at least 1");
    WellSpecReport report;
    for (std::size_t n = 1; n <= max_agents; ++n)
        for (auto& cc : enumerate_initial_configs(p, n, max_colors)) report.entries.push_back({std::move(cc), {}});

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < report.entries.size();) {
            auto& e = report.entries[i];
            e.output = classify_output(p, materialize(e.config), lim);
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    bool unknown = false, no_output = false;
    for (const auto& e : report.entries) {
        unknown |= e.output.verdict == OutputClass::Verdict::Unknown;
        no_output |= e.output.verdict == OutputClass::Verdict::NoOutput;
    }
    report.verdict = no_output ? WellSpecReport::Verdict::NotWellSpecified
                     : unknown ? WellSpecReport::Verdict::Inconclusive
                               : WellSpecReport::Verdict::WellSpecifiedUpToBounds;
    return report;
}

std::string format_report(const Protocol& p, const WellSpecReport& r) {
    std::ostringstream out;
    for (const auto& e : r.entries) out << format_canonical(p, e.config) << ' ' << to_string(e.output) << '\n';
    out << "verdict: " << to_string(r.verdict) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Random scheduling

Trace random_fair_run(const Protocol& p, const Configuration& c0, std::uint64_t seed, std::size_t max_steps) {
    std::mt19937_64 rng(seed);
    Trace t;
    t.configs.push_back(c0);
    for (std::size_t step = 0; step < max_steps; ++step) {
        auto enabled = enabled_instances(p, t.configs.back());
        if (enabled.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
        const auto& inst = enabled[pick(rng)];
        t.configs.push_back(fire_rule(t.configs.back(), inst));
        t.fired.push_back(inst);
    }
    return t;
}

}  // namespace udpp
