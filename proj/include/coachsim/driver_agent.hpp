#pragma once

#include "coachsim/backend.hpp"

namespace coachsim::agent {

struct DecisionOutcome {
    MemoryUnit unit;
    int token_count = 0;
    bool fallback = false;
};

/// One reasoning step: render the prompt, query the backend, parse the
/// chain-of-thought response into a memory unit. Backend failure or an
/// unparseable response falls back to DECELERATE_GENTLE with a situation
/// text flagged "[fallback]"; the run never aborts.
DecisionOutcome decide_step(const PerceptionSnapshot& snapshot, const ShortTermMemory& memory,
                            const std::vector<demos::DemonstrationRecord>& demos_for_driver,
                            const std::vector<std::string>& guideline_texts,
                            reasoning::ReasoningBackend& backend,
                            reasoning::TranscriptLog* transcript = nullptr);

inline MemoryUnit decide(const PerceptionSnapshot& snapshot, const ShortTermMemory& memory,
                         const std::vector<demos::DemonstrationRecord>& demos_for_driver,
                         const std::vector<std::string>& guideline_texts,
                         reasoning::ReasoningBackend& backend,
                         reasoning::TranscriptLog* transcript = nullptr) {
    return decide_step(snapshot, memory, demos_for_driver, guideline_texts, backend, transcript).unit;
}

}  // namespace coachsim::agent
