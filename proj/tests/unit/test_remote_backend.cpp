#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "coachsim/remote_backend.hpp"

using namespace coachsim;
using namespace coachsim::reasoning;
using nlohmann::json;

namespace {

std::string completion_body(const std::string& content, int tokens) {
    json j;
    j["choices"] = json::array({json{{"message", json{{"role", "assistant"}, {"content", content}}}}});
    j["usage"] = json{{"total_tokens", tokens}};
    return j.dump();
}

/// In-process chat-completion stub with pluggable behavior.
class StubServer {
public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

BackendConfig remote_config(const std::string& endpoint, double timeout_s = 5.0, int retries = 3) {
    BackendConfig cfg;
    cfg.kind = BackendKind::RemoteChat;
    cfg.endpoint = endpoint;
    cfg.timeout_s = timeout_s;
    cfg.retry_count = retries;
    return cfg;
}

PromptBundle trivial_prompt() { return {"system text", "user text"}; }

}  // namespace

TEST_CASE("remote_send returns the stub's canned reply and token usage") {
    StubServer stub([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("messages").size() == 2);
        CHECK(body.at("temperature").get<double>() == 0.0);
        res.set_content(completion_body("Action: MAINTAIN", 42), "application/json");
    });
    const ReasoningResponse resp = remote_send(trivial_prompt(), remote_config(stub.endpoint()));
    CHECK(resp.ok);
    CHECK(resp.text == "Action: MAINTAIN");
    CHECK(resp.token_count == 42);
}

TEST_CASE("remote_send retries through two 500s and succeeds on the third attempt") {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++calls;
        if (n <= 2) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        } else {
            res.set_content(completion_body("Action: BRAKE_HARD", 7), "application/json");
        }
    });
    const ReasoningResponse resp =
        remote_send(trivial_prompt(), remote_config(stub.endpoint(), 5.0, 3));
    CHECK(resp.ok);
    CHECK(resp.text == "Action: BRAKE_HARD");
    CHECK(calls.load() == 3);
}

TEST_CASE("remote_send gives up after exhausting retries") {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 503;
    });
    const ReasoningResponse resp =
        remote_send(trivial_prompt(), remote_config(stub.endpoint(), 5.0, 2));
    CHECK(!resp.ok);
    CHECK(calls.load() == 2);
    CHECK(resp.error.find("503") != std::string::npos);
}

TEST_CASE("a timeout below the server latency reports backend-unavailable") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        res.set_content(completion_body("late", 1), "application/json");
    });
    const ReasoningResponse resp =
        remote_send(trivial_prompt(), remote_config(stub.endpoint(), 0.15, 1));
    CHECK(!resp.ok);
}

TEST_CASE("4xx responses fail without retrying") {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 401;
    });
    const ReasoningResponse resp =
        remote_send(trivial_prompt(), remote_config(stub.endpoint(), 5.0, 5));
    CHECK(!resp.ok);
    CHECK(calls.load() == 1);
}

TEST_CASE("the Authorization header carries the key from the configured env var") {
    std::string seen_auth = "unset";
    StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.has_header("Authorization") ? req.get_header_value("Authorization") : "";
        res.set_content(completion_body("ok", 1), "application/json");
    });
    BackendConfig cfg = remote_config(stub.endpoint());
    cfg.auth_env = "COACHSIM_TEST_KEY";
    setenv("COACHSIM_TEST_KEY", "sk-stub-123", 1);
    remote_send(trivial_prompt(), cfg);
    CHECK(seen_auth == "Bearer sk-stub-123");
    unsetenv("COACHSIM_TEST_KEY");
}
