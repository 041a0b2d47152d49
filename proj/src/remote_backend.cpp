#include "coachsim/remote_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace coachsim::reasoning {

using nlohmann::json;

void BackendConfig::validate() const {
    if (kind == BackendKind::RemoteChat) {
        if (endpoint.empty()) throw std::invalid_argument("remote backend requires an endpoint URL");
        if (auth_env.empty()) throw std::invalid_argument("remote backend requires an auth env var name");
    } else {
        rule_profile.validate();
    }
    if (timeout_s <= 0.0) throw std::invalid_argument("backend timeout must be > 0");
    if (retry_count < 1) throw std::invalid_argument("retry count must be >= 1");
}

double token_to_timestep(int token_count) {
    if (token_count < 0) token_count = 0;
    const double dt = 0.0015 - static_cast<double>(token_count) * 7e-7;
    return std::clamp(dt, 0.0008, 0.0015);
}

int estimate_token_count(const std::string& text) {
    std::istringstream is(text);
    std::string word;
    int n = 0;
    while (is >> word) ++n;
    return n;
}

void TranscriptLog::log_exchange(const std::string& role, const PromptBundle& prompt,
                                 const ReasoningResponse& response, const std::string& note) {
    if (!out_) return;
    *out_ << "=== " << role << " request ===\n"
          << "[system]\n" << prompt.system_text << "\n"
          << "[user]\n" << prompt.user_text << "\n"
          << "=== " << role << " response (tokens=" << response.token_count
          << (response.ok ? "" : ", FAILED: " + response.error) << ") ===\n"
          << response.text << "\n";
    if (!note.empty()) *out_ << "[note] " << note << "\n";
    *out_ << "\n";
    out_->flush();
}

void TranscriptLog::note(const std::string& text) {
    if (!out_) return;
    *out_ << "[note] " << text << "\n\n";
    out_->flush();
}

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path_prefix;
};

SplitUrl split_endpoint(const std::string& endpoint) {
    const std::size_t scheme = endpoint.find("://");
    const std::size_t path = scheme == std::string::npos ? endpoint.find('/')
                                                         : endpoint.find('/', scheme + 3);
    if (path == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path), prefix};
}

}  // namespace

ReasoningResponse remote_send(const PromptBundle& prompt, const BackendConfig& config) {
    const SplitUrl url = split_endpoint(config.endpoint);
    httplib::Client client(url.base);
    const auto sec = static_cast<time_t>(config.timeout_s);
    const auto usec = static_cast<time_t>((config.timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    httplib::Headers headers;
    const char* key = std::getenv(config.auth_env.c_str());
    if (key != nullptr && key[0] != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const json body{
        {"model", config.model},
        {"temperature", config.temperature},
        {"messages",
         json::array({json{{"role", "system"}, {"content", prompt.system_text}},
                      json{{"role", "user"}, {"content", prompt.user_text}}})},
    };
    const std::string payload = body.dump();
    const std::string path = url.path_prefix + "/chat/completions";

    std::string last_error;
    const int attempts = std::max(1, config.retry_count);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status / 100 == 2) {
            try {
                const json j = json::parse(res->body);
                ReasoningResponse out;
                out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
                if (j.contains("usage") && j["usage"].contains("total_tokens")) {
                    out.token_count = j["usage"]["total_tokens"].get<int>();
                } else {
                    out.token_count = estimate_token_count(out.text);
                }
                return out;
            } catch (const json::exception& e) {
                last_error = std::string("malformed completion payload: ") + e.what();
                continue;
            }
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status / 100 == 4) break;  // not transient
    }

    ReasoningResponse out;
    out.ok = false;
    out.error = last_error.empty() ? "backend unavailable" : last_error;
    return out;
}

}  // namespace coachsim::reasoning
