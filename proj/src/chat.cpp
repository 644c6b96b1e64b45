#include "litmine/chat.hpp"

#include <json.hpp>

#include <fstream>

namespace litmine::chat {

HttpChatTransport::HttpChatTransport(std::string url, std::string model, std::optional<std::string> bearer_token)
    : http_(std::move(url), std::move(bearer_token)), model_(std::move(model)) {}

std::string request_body(const std::string& model, const std::string& prompt) {
    nlohmann::json body = {{"model", model},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    return body.dump();
}

std::string parse_completion(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw http::TransportError(std::string("malformed chat completion: ") + e.what(), false);
    }
}

std::string HttpChatTransport::complete(const std::string& prompt) {
    const auto response = http_.post_json(request_body(model_, prompt));
    http::check_status(response);
    return parse_completion(response.body);
}

MockChatTransport::MockChatTransport(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    if (!in) {
        throw Error("cannot read mock script " + jsonl.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            std::vector<Item> items;
            for (const auto& r : j.at("responses")) {
                if (r.is_string()) {
                    items.push_back({r.get<std::string>(), 200});
                } else {
                    items.push_back({std::nullopt, r.at("status").get<int>()});
                }
            }
            script(j.at("prompt_hash").get<std::string>(), std::move(items));
        } catch (const nlohmann::json::exception& e) {
            throw Error(jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void MockChatTransport::script(const std::string& key, std::vector<Item> items) {
    if (items.empty()) {
        throw Error("mock script for '" + key + "' has no responses");
    }
    std::lock_guard lock(mutex_);
    scripts_[key] = std::deque<Item>(items.begin(), items.end());
}

std::string MockChatTransport::complete(const std::string& prompt) {
    Item item;
    {
        std::lock_guard lock(mutex_);
        prompts_.push_back(prompt);
        const auto key = hash_hex(prompt);
        auto it = scripts_.find(key);
        if (it == scripts_.end()) {
            // Each prompt replays its own copy of the wildcard script, so the
            // outcome never depends on request order.
            const auto wild = scripts_.find("*");
            if (wild == scripts_.end()) {
                throw http::TransportError("mock has no script for prompt " + key, false);
            }
            it = scripts_.emplace(key, wild->second).first;
        }
        item = it->second.front();
        if (it->second.size() > 1) {
            it->second.pop_front();
        }
    }
    if (!item.text) {
        http::check_status({item.status, "scripted failure"});
        throw http::TransportError("scripted status " + std::to_string(item.status) + " without text", false);
    }
    return *item.text;
}

std::size_t MockChatTransport::calls() const {
    std::lock_guard lock(mutex_);
    return prompts_.size();
}

std::vector<std::string> MockChatTransport::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

std::string ask_status_name(AskStatus status) {
    switch (status) {
    case AskStatus::ok:
        return "ok";
    case AskStatus::too_large:
        return "too_large";
    case AskStatus::failed:
        return "failed";
    }
    return "failed";
}

AskOutcome ask(ChatTransport& transport, const std::string& prompt, const AskPolicy& policy) {
    AskOutcome out;
    out.prompt_hash = hash_hex(prompt);
    if (prompt.size() > policy.max_prompt_chars) {
        out.status = AskStatus::too_large;
        out.error = "prompt of " + std::to_string(prompt.size()) + " characters exceeds the budget of " +
                    std::to_string(policy.max_prompt_chars);
        return out;
    }
    http::RetryStats stats;
    try {
        out.response = http::with_retries([&] { return transport.complete(prompt); }, policy.retry, stats);
        out.status = AskStatus::ok;
    } catch (const http::TransportError& e) {
        out.status = AskStatus::failed;
        out.error = e.what();
    }
    out.attempts = stats.attempts;
    out.retries = stats.retries;
    out.log = std::move(stats.log);
    return out;
}

} // namespace litmine::chat
