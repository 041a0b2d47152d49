#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coachsim/demonstrations.hpp"
#include "coachsim/memory.hpp"
#include "coachsim/perception.hpp"
#include "coachsim/prompts.hpp"
#include "coachsim/style_profile.hpp"

namespace coachsim::reasoning {

enum class BackendKind { RemoteChat, Rule };

struct BackendConfig {
    BackendKind kind = BackendKind::Rule;
    std::string endpoint;  // chat-completion base URL, e.g. http://host:port/v1
    std::string model = "gpt-4";
    std::string auth_env = "COACHSIM_API_KEY";  // env var NAME holding the key
    double timeout_s = 30.0;
    int retry_count = 3;
    double temperature = 0.0;
    StyleProfile rule_profile;  // rule kind only

    void validate() const;
};

struct ReasoningResponse {
    std::string text;
    int token_count = 0;
    bool ok = true;
    std::string error;  // transport diagnostics when !ok
};

/// Structured context the rule backend reasons over; the remote backend
/// only reads the rendered prompt.
struct DriverRuleContext {
    const agent::PerceptionSnapshot* snapshot = nullptr;
    const agent::ShortTermMemory* memory = nullptr;
    const std::vector<std::string>* guideline_texts = nullptr;
};

struct CoachRuleContext {
    const agent::ShortTermMemory* memory = nullptr;
    std::optional<demos::StyleTag> demo_style;
    const std::vector<std::string>* guideline_texts = nullptr;
};

class ReasoningBackend {
public:
    virtual ~ReasoningBackend() = default;
    virtual BackendKind kind() const = 0;
    virtual ReasoningResponse send_driver(const PromptBundle& prompt, const DriverRuleContext& context) = 0;
    virtual ReasoningResponse send_coach(const PromptBundle& prompt, const CoachRuleContext& context) = 0;
};

/// Per-run prompt/response log. Contents carry no wall-clock data, so rule
/// backend transcripts replay byte-identically.
class TranscriptLog {
public:
    TranscriptLog() = default;
    explicit TranscriptLog(const std::string& path) : out_(std::make_unique<std::ofstream>(path)) {}

    void log_exchange(const std::string& role, const PromptBundle& prompt,
                      const ReasoningResponse& response, const std::string& note = "");
    void note(const std::string& text);

private:
    std::unique_ptr<std::ofstream> out_;
};

/// Maps a response's token count to the paced simulator time-step:
/// dt = clamp(0.0015 - token_count * 7e-7, 0.0008, 0.0015), so 0 tokens
/// give 0.0015 s and >= 1000 tokens saturate at 0.0008 s.
double token_to_timestep(int token_count);

/// Whitespace word count, the rule backend's token estimator.
int estimate_token_count(const std::string& text);

}  // namespace coachsim::reasoning
