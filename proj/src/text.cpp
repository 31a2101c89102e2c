#include "frugal/text.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

namespace frugal {

std::string fmt_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string fmt_double(double value, int significant_digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value,
                             std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view text) {
    const char* ws = " \t\r\n\f\v";
    const auto begin = text.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(ws);
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(trim(line.substr(start)));
            break;
        }
        fields.emplace_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace frugal
