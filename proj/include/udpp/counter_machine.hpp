// Two-counter (Minsky) machines with 1-based instruction indices.
//
// Text format, one instruction per line:  inc x|y,  dec x|y <k>,  goto <k>,  halt
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "udpp/core.hpp"

namespace udpp::cm {

enum class Counter : std::uint8_t { X, Y };

inline char counter_name(Counter c) { return c == Counter::X ? 'x' : 'y'; }

struct Inc {
    Counter counter;
    bool operator==(const Inc&) const = default;
};
/// Decrement if positive, otherwise jump to `target`.
struct Dec {
    Counter counter;
    std::size_t target;
    bool operator==(const Dec&) const = default;
};
struct Goto {
    std::size_t target;
    bool operator==(const Goto&) const = default;
};
struct Halt {
    bool operator==(const Halt&) const = default;
};

using Instr = std::variant<Inc, Dec, Goto, Halt>;

class GotoCycle : public Error {
public:
    using Error::Error;
};
class OutOfRange : public Error {
public:
    using Error::Error;
};
class InvalidMachine : public Error {
public:
    using Error::Error;
};

/// A nonempty instruction list whose jump targets are in range and whose
/// last instruction cannot fall through (halt or goto).
class CounterMachine {
public:
    explicit CounterMachine(std::vector<Instr> instrs);

    std::size_t size() const { return instrs_.size(); }
    /// 1-based.
    const Instr& at(std::size_t m) const;
    const std::vector<Instr>& instructions() const { return instrs_; }

private:
    std::vector<Instr> instrs_;
};

struct CmConfig {
    std::size_t pc = 1;
    std::uint64_t x = 0;
    std::uint64_t y = 0;

    std::uint64_t counter(Counter c) const { return c == Counter::X ? x : y; }
    bool operator==(const CmConfig&) const = default;
};

std::string to_string(const CmConfig& s);
std::string to_string(const Instr& i);

struct Halted {
    bool operator==(const Halted&) const = default;
};

/// One instruction. Goto counts as a step; reaching Halt yields Halted.
std::variant<CmConfig, Halted> cm_step(const CounterMachine& m, const CmConfig& s);

struct RunResult {
    bool halted = false;
    /// Steps taken before the halt instruction was reached (when halted).
    std::uint64_t steps = 0;
    /// Final configuration; for a halted run pc points at the halt instruction.
    CmConfig final;
};

/// Runs from (1, 0, 0) for at most max_steps steps.
RunResult cm_run(const CounterMachine& m, std::uint64_t max_steps);

/// Follows goto chains from m to the first non-goto instruction.
std::size_t resolve(const CounterMachine& m, std::size_t index);

/// resolve(m + 1): the shortcut successor used by the protocol compiler.
std::size_t next_instr(const CounterMachine& m, std::size_t index);

CounterMachine parse_machine(std::string_view text);
std::string format_machine(const CounterMachine& m);

}  // namespace udpp::cm
