#pragma once
// Remote provider wire protocol.
//
// Every remote operation is one HTTP POST round trip. The request body is a
// JSON document with exactly three fields:
//
//   { "task": <string>, "input": <value>, "params": <object> }
//
// Tasks used by this project:
//   "caption" : input = image id,            params = {"uri": <string>}
//               response = {"text": <string>}
//   "triples" : input = caption text,        params = {"image_id": <string>}
//               response = {"triples": [{"subject","kind","surface","object"}]}
//   "compose" : input = [question strings],  params = {}
//               response = {"text": <string>}
//   "embed"   : input = sentence,            params = {"dim": <int>}
//               response = {"values": [<float> x dim]}
//
// Authentication, when configured, is a bearer token header. Default timeout
// is 30 seconds with no retries; both are configurable.

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace cotforge::wire {

struct RemoteUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Endpoint {
    std::string url;        // e.g. "http://127.0.0.1:8080/v1/provider"
    std::string auth_token; // empty = no Authorization header
    int timeout_s = 30;
    int retries = 0;        // additional attempts after the first failure
};

// Posts `body` to the endpoint and returns the parsed JSON response.
// Throws RemoteUnavailable on connection failure, timeout, non-2xx status,
// or a response body that is not valid JSON.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body);

} // namespace cotforge::wire
