#include "cotforge/wire.hpp"

#include <httplib.h>

namespace cotforge::wire {

namespace {

// Splits "scheme://host:port/path" into the client base and request path.
struct SplitUrl {
    std::string base;
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw RemoteUnavailable("malformed endpoint url: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body) {
    const SplitUrl split = split_url(endpoint.url);

    httplib::Client client(split.base);
    client.set_connection_timeout(endpoint.timeout_s, 0);
    client.set_read_timeout(endpoint.timeout_s, 0);
    client.set_write_timeout(endpoint.timeout_s, 0);

    httplib::Headers headers;
    if (!endpoint.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint.auth_token);
    }

    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
        auto res = client.Post(split.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            last_error = std::string("invalid json response: ") + e.what();
            continue;
        }
    }
    throw RemoteUnavailable("remote call to " + endpoint.url + " failed: " + last_error);
}

} // namespace cotforge::wire
