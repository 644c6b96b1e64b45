#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "litmine/http.hpp"

#include <cstdlib>
#include <thread>

namespace litmine::http {

void check_status(const Response& response) {
    const int s = response.status;
    if (s >= 200 && s < 300) {
        return;
    }
    const std::string what = "HTTP status " + std::to_string(s);
    if (s == 401 || s == 403) {
        throw TransportError(what + " (authentication failed)", false, s);
    }
    if (s == 0 || s == 408 || s == 429 || s >= 500) {
        throw TransportError(what, true, s);
    }
    throw TransportError(what + ": " + response.body.substr(0, 200), false, s);
}

HttpClientTransport::HttpClientTransport(std::string url, std::optional<std::string> bearer_token,
                                         std::chrono::seconds timeout)
    : token_(std::move(bearer_token)), timeout_(timeout) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("endpoint URL must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

Response HttpClientTransport::post_json(const std::string& body) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (token_) {
        headers.emplace("Authorization", "Bearer " + *token_);
    }
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
        throw TransportError("request to " + origin_ + path_ + " failed: " + httplib::to_string(result.error()), true);
    }
    return {result->status, result->body};
}

std::optional<std::string> token_from_env(const char* variable) {
    const char* value = std::getenv(variable);
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

RetryPolicy default_retry_policy() {
    RetryPolicy policy;
    policy.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    return policy;
}

} // namespace litmine::http
