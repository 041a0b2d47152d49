#include "coachsim/driver_agent.hpp"

#include "coachsim/parsers.hpp"

namespace coachsim::agent {

DecisionOutcome decide_step(const PerceptionSnapshot& snapshot, const ShortTermMemory& memory,
                            const std::vector<demos::DemonstrationRecord>& demos_for_driver,
                            const std::vector<std::string>& guideline_texts,
                            reasoning::ReasoningBackend& backend,
                            reasoning::TranscriptLog* transcript) {
    const reasoning::PromptBundle prompt =
        reasoning::build_driver_prompt(snapshot, memory, demos_for_driver, guideline_texts);
    reasoning::DriverRuleContext ctx{&snapshot, &memory, &guideline_texts};
    const reasoning::ReasoningResponse resp = backend.send_driver(prompt, ctx);

    DecisionOutcome out;
    out.token_count = resp.token_count;
    out.unit.tick = snapshot.tick;

    std::optional<reasoning::ParsedDriverResponse> parsed;
    if (resp.ok) parsed = reasoning::parse_driver_response(resp.text);

    if (parsed) {
        out.unit.situation = parsed->situation;
        out.unit.reasoning = parsed->reasoning;
        out.unit.action = parsed->action;
    } else {
        out.fallback = true;
        out.unit.situation = "[fallback] " + reasoning::situation_text(snapshot);
        out.unit.reasoning = resp.ok
                                 ? "The response named no known action; defaulting to gentle deceleration."
                                 : "The reasoning backend is unavailable; defaulting to gentle deceleration.";
        out.unit.action = AtomicAction::DecelerateGentle;
    }

    if (transcript != nullptr) {
        transcript->log_exchange("driver", prompt, resp, out.fallback ? "fallback applied" : "");
    }
    return out;
}

}  // namespace coachsim::agent
