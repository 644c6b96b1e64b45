#ifndef LITMINE_CHAT_HPP
#define LITMINE_CHAT_HPP

#include "litmine/http.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace litmine::chat {

/// Single-turn chat completion. Implementations throw http::TransportError.
class ChatTransport {
  public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::string model() const = 0;
};

/// `{model, messages:[{role, content}]}` -> `{choices:[{message:{content}}]}`.
class HttpChatTransport final : public ChatTransport {
  public:
    HttpChatTransport(std::string url, std::string model, std::optional<std::string> bearer_token);
    std::string complete(const std::string& prompt) override;
    std::string model() const override { return model_; }

  private:
    http::HttpClientTransport http_;
    std::string model_;
};

std::string request_body(const std::string& model, const std::string& prompt);
std::string parse_completion(const std::string& body);

/// Scripted responses keyed by prompt hash (hash_hex of the prompt) or "*";
/// a prompt without its own entry gets a fresh copy of the "*" sequence.
/// Each entry is a sequence consumed in order; the last item repeats once the
/// sequence is exhausted. An item is a response string or `{"status": N}`,
/// which raises the same error an HTTP reply with that status would.
class MockChatTransport final : public ChatTransport {
  public:
    struct Item {
        std::optional<std::string> text;
        int status = 200;
    };

    MockChatTransport() = default;
    explicit MockChatTransport(const std::filesystem::path& jsonl);

    void script(const std::string& key, std::vector<Item> items);
    std::string complete(const std::string& prompt) override;
    std::string model() const override { return "mock"; }

    std::size_t calls() const;
    std::vector<std::string> prompts() const;

  private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<Item>> scripts_;
    std::vector<std::string> prompts_;
};

struct AskPolicy {
    std::size_t max_prompt_chars = 150000;
    http::RetryPolicy retry = http::default_retry_policy();
};

enum class AskStatus { ok, too_large, failed };
std::string ask_status_name(AskStatus status);

struct AskOutcome {
    AskStatus status = AskStatus::failed;
    std::string response;
    std::string prompt_hash;
    std::size_t attempts = 0;
    std::size_t retries = 0;
    std::vector<std::string> log;
    std::string error;
};

/// Sends one prompt. Oversized prompts are rejected before any call; transient
/// failures are retried per policy; fatal errors and exhaustion yield `failed`.
AskOutcome ask(ChatTransport& transport, const std::string& prompt, const AskPolicy& policy);

} // namespace litmine::chat

#endif
