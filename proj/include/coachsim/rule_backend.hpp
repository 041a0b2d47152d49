#pragma once

#include "coachsim/backend.hpp"

namespace coachsim::reasoning {

/// Numeric facts parsed back out of a canonical situation line.
struct ParsedSituation {
    std::optional<double> speed;
    std::optional<double> limit;
    std::optional<double> signal_red_dist;
    std::optional<double> signal_green_dist;
    std::optional<double> pedestrian_dist;
    std::optional<double> leader_dist;
    std::optional<double> leader_speed;
};

ParsedSituation parse_situation_line(const std::string& text);

/// One fired coach predicate: which rule, the human-readable reason, and
/// the offending unit's tick.
struct PredicateHit {
    std::string key;  // "signal", "pedestrian", "headway", "overspeed", "style-..."
    std::string reason;
    long tick = 0;
};

/// Scans memory oldest-first against the documented predicate table
/// (signal compliance, pedestrian proximity, headway floor, speed-limit
/// excess, then style-match rules when demos are present). Margins scale
/// with the demo style: cautious coaches judge strictly, risky ones
/// leniently. When a stored guideline covers the fired predicate, the
/// reason cites it.
std::optional<PredicateHit> first_violation(const agent::ShortTermMemory& memory,
                                            std::optional<demos::StyleTag> demo_style,
                                            const std::vector<std::string>& guideline_texts);

/// Deterministic guideline template for a Bad-evaluation reason.
std::string guideline_text_for_reason(const std::string& reason);

/// Deterministic driver decision: documented priority list
/// (signal > pedestrian > headway > speed tracking > lane choice) with
/// thresholds from the guideline-adjusted profile. Emits a labeled
/// Situation/Reasoning/Action response; token_count is its word count.
ReasoningResponse rule_send(const DriverRuleContext& context, const StyleProfile& profile,
                            const sim::DynamicsParams& dynamics);

class RuleBackend : public ReasoningBackend {
public:
    RuleBackend(StyleProfile profile, sim::DynamicsParams dynamics)
        : profile_(profile), dynamics_(dynamics) {
        profile_.validate();
    }

    BackendKind kind() const override { return BackendKind::Rule; }
    ReasoningResponse send_driver(const PromptBundle& prompt, const DriverRuleContext& context) override;
    ReasoningResponse send_coach(const PromptBundle& prompt, const CoachRuleContext& context) override;

    const StyleProfile& profile() const { return profile_; }

private:
    StyleProfile profile_;
    sim::DynamicsParams dynamics_;
};

}  // namespace coachsim::reasoning
