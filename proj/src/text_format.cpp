#include "udpp/text_format.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace udpp {

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++number;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::istringstream in{std::string(raw)};
        Line line{number, {}};
        for (std::string tok; in >> tok;) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        pos = end + 1;
    }
    return lines;
}

std::uint64_t parse_uint(const Line& line, const std::string& tok, const char* what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(line.number, std::string("expected a non-negative integer ") + what + ", got '" + tok + "'");
    }
    return v;
}

void expect_arity(const Line& line, std::size_t lo, std::size_t hi) {
    const std::size_t n = line.tokens.size();
    if (n < lo || n > hi) {
        throw ParseError(line.number, "'" + line.tokens[0] + "' expects " +
                                          (lo == hi ? std::to_string(lo - 1) : std::to_string(lo - 1) + "-" + std::to_string(hi - 1)) +
                                          " arguments, got " + std::to_string(n - 1));
    }
}

StateId lookup_state(const Protocol& p, const Line& line, const std::string& name) {
    if (auto s = p.find_state(name)) return *s;
    throw ParseError(line.number, "unknown state '" + name + "'");
}

const char* guard_name(Guard g) { return g == Guard::Eq ? "eq" : "neq"; }

}  // namespace

ProtocolDraft parse_protocol_draft(std::string_view text) {
    ProtocolDraft d;
    for (const auto& line : tokenize(text)) {
        const auto& t = line.tokens;
        if (t[0] == "state") {
            expect_arity(line, 2, 2);
            d.states.push_back(t[1]);
        } else if (t[0] == "init") {
            expect_arity(line, 2, 2);
            d.initial.push_back(t[1]);
        } else if (t[0] == "out") {
            expect_arity(line, 3, 3);
            if (t[2] != "0" && t[2] != "1") throw ParseError(line.number, "output must be 0 or 1, got '" + t[2] + "'");
            d.outputs.emplace_back(t[1], t[2] == "1" ? 1 : 0);
        } else if (t[0] == "rule") {
            expect_arity(line, 6, 7);
            ProtocolDraft::RuleSpec r;
            r.pre_first = t[1];
            r.pre_second = t[2];
            if (t[3] == "eq") {
                r.guard = ProtocolDraft::GuardSpec::Eq;
            } else if (t[3] == "neq") {
                r.guard = ProtocolDraft::GuardSpec::Neq;
            } else if (t[3] == "any") {
                r.guard = ProtocolDraft::GuardSpec::Any;
            } else {
                throw ParseError(line.number, "guard must be eq, neq or any, got '" + t[3] + "'");
            }
            r.post_first = t[4];
            r.post_second = t[5];
            if (t.size() == 7) r.label = t[6];
            d.rules.push_back(std::move(r));
        } else {
            throw ParseError(line.number, "unknown directive '" + t[0] + "'");
        }
    }
    return d;
}

Protocol parse_protocol(std::string_view text) { return Protocol::build(parse_protocol_draft(text)); }

std::string format_protocol(const Protocol& p) {
    std::ostringstream out;
    for (const auto& s : p.state_names()) out << "state " << s << '\n';
    for (auto q : p.initial_states()) out << "init " << p.name(q) << '\n';
    for (std::uint32_t i = 0; i < p.state_count(); ++i) out << "out " << p.name(StateId{i}) << ' ' << p.output(StateId{i}) << '\n';
    const auto& rules = p.rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const Rule& r = rules[i];
        const char* guard = guard_name(r.guard);
        if (r.guard == Guard::Eq && i + 1 < rules.size()) {
            Rule twin = rules[i + 1];
            twin.guard = Guard::Eq;
            if (rules[i + 1].guard == Guard::Neq && twin == r) {
                guard = "any";
                ++i;
            }
        }
        out << "rule " << p.name(r.pre_first) << ' ' << p.name(r.pre_second) << ' ' << guard << ' '
            << p.name(r.post_first) << ' ' << p.name(r.post_second) << ' ' << r.label << '\n';
    }
    return out.str();
}

namespace {

void append_agent(const Protocol& p, Configuration& c, const Line& line) {
    expect_arity(line, 4, 4);
    StateId q = lookup_state(p, line, line.tokens[1]);
    ColorId d{parse_uint(line, line.tokens[2], "color")};
    Count n = parse_uint(line, line.tokens[3], "count");
    c.add(q, d, n);
}

}  // namespace

Configuration parse_configuration(const Protocol& p, std::string_view text) {
    Configuration c;
    for (const auto& line : tokenize(text)) {
        if (line.tokens[0] != "agent") throw ParseError(line.number, "expected 'agent', got '" + line.tokens[0] + "'");
        append_agent(p, c, line);
    }
    return c;
}

std::string format_configuration(const Protocol& p, const Configuration& c) {
    std::ostringstream out;
    for (const auto& e : c.entries()) out << "agent " << p.name(e.state) << ' ' << e.color.value << ' ' << e.count << '\n';
    return out.str();
}

Trace parse_trace(const Protocol& p, std::string_view text) {
    Trace t;
    Configuration current;
    bool have_block = false;
    struct PendingFire {
        std::size_t line;
        std::string label;
        ColorId d, e;
    };
    std::optional<PendingFire> pending;

    auto close_block = [&](std::size_t line_no) {
        if (!have_block) throw ParseError(line_no, "expected a configuration block");
        if (pending) {
            const Configuration& before = t.configs.back();
            const Guard g = pending->d == pending->e ? Guard::Eq : Guard::Neq;
            std::optional<TransitionInstance> found;
            for (std::size_t i = 0; i < p.rules().size(); ++i) {
                const Rule& r = p.rules()[i];
                if (r.label != pending->label || r.guard != g) continue;
                TransitionInstance inst{i, r, pending->d, pending->e};
                if (instance_enabled(before, inst) && fire_rule(before, inst) == current) {
                    found = inst;
                    break;
                }
                if (!found) found = inst;
            }
            if (!found) throw ParseError(pending->line, "no rule labelled '" + pending->label + "' with a matching guard");
            t.fired.push_back(*found);
            pending.reset();
        }
        t.configs.push_back(current);
        current = Configuration{};
        have_block = false;
    };

    std::size_t last_line = 0;
    for (const auto& line : tokenize(text)) {
        last_line = line.number;
        const auto& tok = line.tokens;
        if (tok[0] == "agent") {
            append_agent(p, current, line);
            have_block = true;
        } else if (tok[0] == "fire") {
            expect_arity(line, 4, 4);
            close_block(line.number);
            pending = PendingFire{line.number, tok[1], ColorId{parse_uint(line, tok[2], "color")},
                                  ColorId{parse_uint(line, tok[3], "color")}};
        } else {
            throw ParseError(line.number, "expected 'agent' or 'fire', got '" + tok[0] + "'");
        }
    }
    close_block(last_line + 1);
    return t;
}

std::string format_trace(const Protocol& p, const Trace& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.configs.size(); ++i) {
        if (i > 0) {
            const auto& f = t.fired[i - 1];
            out << "fire " << f.rule.label << ' ' << f.d.value << ' ' << f.e.value << '\n';
        }
        out << format_configuration(p, t.configs[i]);
    }
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << contents;
}

}  // namespace udpp
