#include "udpp/counter_machine.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "udpp/text_format.hpp"

namespace udpp::cm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe_problem(const std::vector<Instr>& instrs) {
    if (instrs.empty()) return "machine has no instructions";
    const std::size_t n = instrs.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t target = 0;
        if (auto* d = std::get_if<Dec>(&instrs[i])) target = d->target;
        if (auto* g = std::get_if<Goto>(&instrs[i])) target = g->target;
        if ((std::holds_alternative<Dec>(instrs[i]) || std::holds_alternative<Goto>(instrs[i])) &&
            (target < 1 || target > n)) {
            return "instruction " + std::to_string(i + 1) + " jumps to " + std::to_string(target) +
                   ", outside 1.." + std::to_string(n);
        }
    }
    if (std::holds_alternative<Inc>(instrs.back()) || std::holds_alternative<Dec>(instrs.back())) {
        return "last instruction (" + to_string(instrs.back()) + ") would fall through past the end";
    }
    return {};
}

}  // namespace

CounterMachine::CounterMachine(std::vector<Instr> instrs) : instrs_(std::move(instrs)) {
    if (auto problem = describe_problem(instrs_); !problem.empty()) throw InvalidMachine(problem);
}

const Instr& CounterMachine::at(std::size_t m) const {
    if (m < 1 || m > instrs_.size()) {
        throw OutOfRange("instruction index " + std::to_string(m) + " outside 1.." + std::to_string(instrs_.size()));
    }
    return instrs_[m - 1];
}

std::string to_string(const CmConfig& s) {
    return "(" + std::to_string(s.pc) + ", " + std::to_string(s.x) + ", " + std::to_string(s.y) + ")";
}

std::string to_string(const Instr& i) {
    return std::visit(overloaded{
                          [](const Inc& v) { return std::string("inc ") + counter_name(v.counter); },
                          [](const Dec& v) { return std::string("dec ") + counter_name(v.counter) + " " + std::to_string(v.target); },
                          [](const Goto& v) { return "goto " + std::to_string(v.target); },
                          [](const Halt&) { return std::string("halt"); },
                      },
                      i);
}

std::variant<CmConfig, Halted> cm_step(const CounterMachine& m, const CmConfig& s) {
    CmConfig next = s;
    return std::visit(overloaded{
                          [&](const Inc& v) -> std::variant<CmConfig, Halted> {
                              (v.counter == Counter::X ? next.x : next.y) += 1;
                              next.pc += 1;
                              return next;
                          },
                          [&](const Dec& v) -> std::variant<CmConfig, Halted> {
                              auto& c = v.counter == Counter::X ? next.x : next.y;
                              if (c > 0) {
                                  c -= 1;
                                  next.pc += 1;
                              } else {
                                  next.pc = v.target;
                              }
                              return next;
                          },
                          [&](const Goto& v) -> std::variant<CmConfig, Halted> {
                              next.pc = v.target;
                              return next;
                          },
                          [](const Halt&) -> std::variant<CmConfig, Halted> { return Halted{}; },
                      },
                      m.at(s.pc));
}

RunResult cm_run(const CounterMachine& m, std::uint64_t max_steps) {
    RunResult r;
    for (;;) {
        if (std::holds_alternative<Halt>(m.at(r.final.pc))) {
            r.halted = true;
            return r;
        }
        if (r.steps == max_steps) return r;
        r.final = std::get<CmConfig>(cm_step(m, r.final));
        ++r.steps;
    }
}

std::size_t resolve(const CounterMachine& m, std::size_t index) {
    std::set<std::size_t> visited;
    while (auto* g = std::get_if<Goto>(&m.at(index))) {
        if (!visited.insert(index).second) {
            throw GotoCycle("goto chain through instruction " + std::to_string(index) +
                            " never reaches a non-goto instruction; replace the goto loop by an inc/dec busy loop");
        }
        index = g->target;
    }
    return index;
}

std::size_t next_instr(const CounterMachine& m, std::size_t index) {
    if (index < 1 || index + 1 > m.size()) {
        throw OutOfRange("instruction " + std::to_string(index) + " has no successor in a machine of " +
                         std::to_string(m.size()) + " instructions");
    }
    return resolve(m, index + 1);
}

namespace {

Counter parse_counter(std::size_t line, const std::string& tok) {
    if (tok == "x") return Counter::X;
    if (tok == "y") return Counter::Y;
    throw ParseError(line, "expected counter x or y, got '" + tok + "'");
}

std::size_t parse_target(std::size_t line, const std::string& tok) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
        throw ParseError(line, "expected a 1-based instruction index, got '" + tok + "'");
    }
    return v;
}

}  // namespace

CounterMachine parse_machine(std::string_view text) {
    std::vector<Instr> instrs;
    std::vector<std::size_t> line_of;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        std::istringstream words(raw);
        std::vector<std::string> t;
        for (std::string w; words >> w;) t.push_back(w);
        if (t.empty()) continue;

        auto arity = [&](std::size_t n) {
            if (t.size() != n + 1) {
                throw ParseError(line_no, "'" + t[0] + "' expects " + std::to_string(n) + " argument(s), got " +
                                              std::to_string(t.size() - 1));
            }
        };
        if (t[0] == "inc") {
            arity(1);
            instrs.push_back(Inc{parse_counter(line_no, t[1])});
        } else if (t[0] == "dec") {
            arity(2);
            instrs.push_back(Dec{parse_counter(line_no, t[1]), parse_target(line_no, t[2])});
        } else if (t[0] == "goto") {
            arity(1);
            instrs.push_back(Goto{parse_target(line_no, t[1])});
        } else if (t[0] == "halt") {
            arity(0);
            instrs.push_back(Halt{});
        } else {
            throw ParseError(line_no, "unknown instruction '" + t[0] + "'");
        }
        line_of.push_back(line_no);
    }
    if (instrs.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "machine has no instructions");
    for (std::size_t i = 0; i < instrs.size(); ++i) {
        std::size_t target = 0;
        if (auto* d = std::get_if<Dec>(&instrs[i])) target = d->target;
        if (auto* g = std::get_if<Goto>(&instrs[i])) target = g->target;
        if (target > instrs.size()) {
            throw ParseError(line_of[i], "jump target " + std::to_string(target) + " outside 1.." +
                                             std::to_string(instrs.size()));
        }
    }
    if (std::holds_alternative<Inc>(instrs.back()) || std::holds_alternative<Dec>(instrs.back())) {
        throw ParseError(line_of.back(), "last instruction must be halt or goto (would fall through past the end)");
    }
    return CounterMachine(std::move(instrs));
}

std::string format_machine(const CounterMachine& m) {
    std::string out;
    for (const auto& i : m.instructions()) out += to_string(i) + "\n";
    return out;
}

}  // namespace udpp::cm
