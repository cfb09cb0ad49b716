// Line-based text formats for protocols, configurations and traces.
//
//   protocol:       state <id> | init <id> | out <id> <0|1>
//                   rule <p> <p'> <eq|neq|any> <q> <q'> [label]
//   configuration:  agent <state> <color> <count>
//   trace:          configuration blocks separated by  fire <label> <d> <e>
//
// '#' starts a comment. Errors carry the 1-based line number.
#pragma once

#include <string>
#include <string_view>

#include "udpp/core.hpp"

namespace udpp {

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

ProtocolDraft parse_protocol_draft(std::string_view text);
Protocol parse_protocol(std::string_view text);
/// Adjacent Eq/Neq rules sharing a rewrite and label are written back as `any`.
std::string format_protocol(const Protocol& p);

Configuration parse_configuration(const Protocol& p, std::string_view text);
std::string format_configuration(const Protocol& p, const Configuration& c);

/// Rules are looked up by label; the guard is selected by whether d equals e.
Trace parse_trace(const Protocol& p, std::string_view text);
std::string format_trace(const Protocol& p, const Trace& t);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace udpp
