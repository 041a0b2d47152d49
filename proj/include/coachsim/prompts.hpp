#pragma once

#include <string>
#include <vector>

#include "coachsim/demonstrations.hpp"
#include "coachsim/memory.hpp"
#include "coachsim/perception.hpp"

namespace coachsim::reasoning {

struct PromptBundle {
    std::string system_text;
    std::string user_text;
};

/// Canonical one-line situation rendering shared by the prompt builder and
/// the rule backend, e.g.
///   "t=12: speed 4.6 m/s, limit 8.3 m/s, signal red 18.0 m ahead,
///    pedestrian in lane 7.5 m ahead, leader 12.0 m ahead at 4.0 m/s,
///    lane change left open right blocked"
/// The coach's rule predicates parse these phrases back out.
std::string situation_text(const agent::PerceptionSnapshot& snapshot);

/// Chain-of-thought driver prompt: perception, short-term memory, few-shot
/// demonstrations, guidelines, and the full action vocabulary. Identical
/// inputs yield identical bytes.
PromptBundle build_driver_prompt(const agent::PerceptionSnapshot& snapshot,
                                 const agent::ShortTermMemory& memory,
                                 const std::vector<demos::DemonstrationRecord>& demonstrations,
                                 const std::vector<std::string>& guideline_texts);

/// Coach prompt: the driver's recent memory, demonstrations as Good
/// examples, accumulated guidelines, Good/Bad instruction.
PromptBundle build_coach_prompt(const agent::ShortTermMemory& memory,
                                const std::vector<demos::DemonstrationRecord>& demonstrations,
                                const std::vector<std::string>& guideline_texts);

}  // namespace coachsim::reasoning
