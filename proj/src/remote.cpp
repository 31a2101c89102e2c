// Remote record ingestion. Kept in its own translation unit so the HTTP
// client header is compiled exactly once.

#include <string>

#include "frugal/eval_data.hpp"
#include "httplib.h"

namespace frugal {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // /path?query, defaults to /
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorKind::argument, "url must start with http:// or https://");
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw Error(ErrorKind::argument, "unsupported url scheme '" + scheme + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = url;
        out.path = "/";
    } else {
        out.origin = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

}  // namespace

std::vector<EvalRecord> fetch_remote_records(const std::string& url, long timeout_ms) {
    if (timeout_ms <= 0) throw Error(ErrorKind::argument, "timeout_ms must be positive");
    const SplitUrl parts = split_url(url);

    httplib::Client client(parts.origin);
    const time_t secs = timeout_ms / 1000;
    const time_t usecs = (timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    auto res = client.Get(parts.path);
    if (!res)
        throw Error(ErrorKind::transport,
                    "request to " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error(ErrorKind::transport,
                    "request to " + url + " returned HTTP " + std::to_string(res->status));

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::decode, std::string("response is not valid JSON: ") + e.what());
    }
    return parse_records_json(doc);
}

}  // namespace frugal
