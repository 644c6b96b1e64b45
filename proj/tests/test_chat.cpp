#include "litmine/chat.hpp"

#include <json.hpp>

#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace litmine;
using namespace litmine::chat;

namespace {

AskPolicy quiet_policy() {
    AskPolicy p;
    p.retry.sleep = nullptr;
    return p;
}

} // namespace

TEST_CASE("two transient failures then success") {
    MockChatTransport mock;
    mock.script("*", {{std::nullopt, 503}, {std::nullopt, 429}, {std::string("fine"), 200}});
    const auto r = ask(mock, "hello", quiet_policy());
    CHECK(r.status == AskStatus::ok);
    CHECK(r.response == "fine");
    CHECK(r.retries == 2);
    CHECK(r.attempts == 3);
    CHECK(r.log.size() == 2);
}

TEST_CASE("oversized prompts never reach the transport") {
    MockChatTransport mock;
    mock.script("*", {{std::string("x"), 200}});
    AskPolicy p = quiet_policy();
    p.max_prompt_chars = 4;
    const auto r = ask(mock, "too long", p);
    CHECK(r.status == AskStatus::too_large);
    CHECK(mock.calls() == 0);
}

TEST_CASE("fatal statuses are not retried and exhaustion fails") {
    MockChatTransport auth;
    auth.script("*", {{std::nullopt, 401}});
    auto r = ask(auth, "p", quiet_policy());
    CHECK(r.status == AskStatus::failed);
    CHECK(auth.calls() == 1);

    MockChatTransport down;
    down.script("*", {{std::nullopt, 500}});
    r = ask(down, "p", quiet_policy());
    CHECK(r.status == AskStatus::failed);
    CHECK(down.calls() == 4);
    CHECK(r.retries == 3);
}

TEST_CASE("mock scripts load from JSONL keyed by prompt hash") {
    const auto dir = testsupport::scratch("mock");
    {
        std::ofstream out(dir / "m.jsonl");
        out << R"({"prompt_hash":")" << hash_hex("echo") << R"(","responses":["fixture reply"]})" << "\n";
        out << R"({"prompt_hash":"*","responses":[{"status":503},"other"]})" << "\n";
    }
    MockChatTransport mock(dir / "m.jsonl");
    CHECK(ask(mock, "echo", quiet_policy()).response == "fixture reply");
    const auto r = ask(mock, "anything", quiet_policy());
    CHECK(r.response == "other");
    CHECK(r.retries == 1);
    CHECK(ask(mock, "again", quiet_policy()).response == "other");
}

TEST_CASE("chat wire format") {
    const auto body = nlohmann::json::parse(request_body("m1", "hi"));
    CHECK(body["model"] == "m1");
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "hi");
    CHECK(parse_completion(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
    CHECK_THROWS_AS(parse_completion("{}"), http::TransportError);
}
