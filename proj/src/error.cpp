#include "frugal/error.hpp"

namespace frugal {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::parse: return "parse";
        case ErrorKind::decode: return "decode";
        case ErrorKind::transport: return "transport";
        case ErrorKind::domain: return "domain";
        case ErrorKind::argument: return "argument";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::config: return "config";
        case ErrorKind::protocol: return "protocol";
        case ErrorKind::metric: return "metric";
    }
    return "unknown";
}

}  // namespace frugal
