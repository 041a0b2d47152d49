#pragma once

#include "coachsim/backend.hpp"

namespace coachsim::reasoning {

/// Sends the prompt to a chat-completion endpoint. Retries transient
/// failures (transport errors, 5xx) up to config.retry_count attempts and
/// honors the configured timeout; 4xx responses fail immediately. Returns
/// ok=false with a diagnostic when all attempts fail.
ReasoningResponse remote_send(const PromptBundle& prompt, const BackendConfig& config);

class RemoteBackend : public ReasoningBackend {
public:
    explicit RemoteBackend(BackendConfig config) : config_(std::move(config)) { config_.validate(); }

    BackendKind kind() const override { return BackendKind::RemoteChat; }
    ReasoningResponse send_driver(const PromptBundle& prompt, const DriverRuleContext&) override {
        return remote_send(prompt, config_);
    }
    ReasoningResponse send_coach(const PromptBundle& prompt, const CoachRuleContext&) override {
        return remote_send(prompt, config_);
    }

    const BackendConfig& config() const { return config_; }

private:
    BackendConfig config_;
};

}  // namespace coachsim::reasoning
