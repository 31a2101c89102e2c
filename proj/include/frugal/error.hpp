#pragma once

#include <stdexcept>
#include <string>

namespace frugal {

enum class ErrorKind {
    io,            // file not readable / writable
    parse,         // malformed textual input
    decode,        // structurally wrong remote payload
    transport,     // network failure, timeout, bad HTTP status
    domain,        // value outside the mathematical domain of an operation
    argument,      // structurally invalid argument (empty list, bad range)
    precondition,  // caller skipped a required pipeline step
    config,        // invalid configuration value
    protocol,      // evaluation protocol cannot be satisfied by the data
    metric,        // metric undefined on the given labels
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* error_kind_name(ErrorKind kind);

}  // namespace frugal
