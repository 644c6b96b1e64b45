#ifndef LITMINE_HTTP_HPP
#define LITMINE_HTTP_HPP

#include "litmine/common.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace litmine::http {

/// Failure talking to a remote service. `transient` failures are retried.
class TransportError : public Error {
  public:
    TransportError(const std::string& what, bool transient, int status = 0)
        : Error(what), transient_(transient), status_(status) {}

    bool transient() const noexcept { return transient_; }
    int status() const noexcept { return status_; }

  private:
    bool transient_;
    int status_;
};

struct Response {
    int status = 0;
    std::string body;
};

/// A single JSON endpoint. Implementations return the raw response and leave
/// status interpretation to `check_status`.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual Response post_json(const std::string& body) = 0;
};

/// Throws TransportError for non-2xx statuses: 401/403 are fatal auth failures,
/// 0 (no connection), 408, 429 and 5xx are transient, anything else is fatal.
void check_status(const Response& response);

/// cpp-httplib backed transport for `http://` and `https://` URLs.
class HttpClientTransport final : public Transport {
  public:
    HttpClientTransport(std::string url, std::optional<std::string> bearer_token,
                        std::chrono::seconds timeout = std::chrono::seconds(120));
    Response post_json(const std::string& body) override;

  private:
    std::string origin_;
    std::string path_;
    std::optional<std::string> token_;
    std::chrono::seconds timeout_;
};

/// Reads a bearer token from the environment; empty variables count as unset.
std::optional<std::string> token_from_env(const char* variable);

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    /// Injected so tests can run without wall-clock delays.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct RetryStats {
    std::size_t attempts = 0;
    std::size_t retries = 0;
    std::vector<std::string> log;
};

/// Calls `attempt` until it succeeds, retrying transient TransportErrors with
/// exponential backoff. Non-transient errors and exhaustion propagate.
template <typename Fn>
auto with_retries(Fn&& attempt, const RetryPolicy& policy, RetryStats& stats) -> decltype(attempt()) {
    auto delay = policy.initial_backoff;
    for (int round = 0;; ++round) {
        ++stats.attempts;
        try {
            return attempt();
        } catch (const TransportError& e) {
            if (!e.transient()) {
                throw;
            }
            if (round >= policy.max_retries) {
                throw TransportError("retries exhausted after " + std::to_string(round + 1) + " attempts: " + e.what(),
                                     false, e.status());
            }
            ++stats.retries;
            stats.log.push_back("retry " + std::to_string(round + 1) + " after: " + e.what());
            if (policy.sleep) {
                policy.sleep(delay);
            }
            delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * policy.multiplier));
        }
    }
}

/// Default policy using std::this_thread::sleep_for.
RetryPolicy default_retry_policy();

} // namespace litmine::http

#endif
