#include "coachsim/prompts.hpp"

#include <cstdio>
#include <sstream>

namespace coachsim::reasoning {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string vocabulary_line() {
    std::string out;
    for (agent::AtomicAction a : agent::all_actions()) {
        if (!out.empty()) out += ", ";
        out += std::string(agent::action_token(a));
    }
    return out;
}

void render_memory(std::ostringstream& os, const agent::ShortTermMemory& memory) {
    if (memory.empty()) {
        os << "(empty)\n";
        return;
    }
    int i = 1;
    for (const agent::MemoryUnit& u : memory.units()) {
        os << "[" << i++ << "] Situation: " << u.situation << "\n"
           << "    Reasoning: " << u.reasoning << "\n"
           << "    Action: " << agent::action_token(u.action) << "\n";
    }
}

void render_demos(std::ostringstream& os, const std::vector<demos::DemonstrationRecord>& records) {
    if (records.empty()) {
        os << "(none)\n";
        return;
    }
    int i = 1;
    for (const demos::DemonstrationRecord& d : records) {
        os << "Demonstration " << i++ << ":\n"
           << "Situation: " << d.situation << "\n"
           << "Reasoning: " << d.reasoning << "\n"
           << "Action: " << agent::action_token(d.action) << "\n";
    }
}

void render_guidelines(std::ostringstream& os, const std::vector<std::string>& texts) {
    if (texts.empty()) {
        os << "(none)\n";
        return;
    }
    for (const std::string& t : texts) os << "- " << t << "\n";
}

}  // namespace

std::string situation_text(const agent::PerceptionSnapshot& s) {
    std::ostringstream os;
    os << "t=" << s.tick << ": speed " << num(s.ego_speed) << " m/s, limit " << num(s.speed_limit)
       << " m/s";
    if (s.signal != agent::SignalPhase::None) {
        os << ", signal " << (s.signal == agent::SignalPhase::Red ? "red" : "green") << " "
           << num(s.distance_to_intersection) << " m ahead";
    }
    if (s.pedestrian_gap) {
        os << ", pedestrian in lane " << num(*s.pedestrian_gap) << " m ahead";
    }
    if (s.leader_gap) {
        os << ", leader " << num(*s.leader_gap) << " m ahead at " << num(s.leader_speed) << " m/s";
    }
    os << ", lane change left " << (s.lane_change_left_feasible ? "open" : "blocked") << " right "
       << (s.lane_change_right_feasible ? "open" : "blocked");
    if (s.route_turn_hint) {
        const char* turn = *s.route_turn_hint == sim::TurnKind::Left
                               ? "left"
                               : (*s.route_turn_hint == sim::TurnKind::Right ? "right" : "straight");
        os << ", route continues " << turn << " at the next junction";
    }
    return os.str();
}

PromptBundle build_driver_prompt(const agent::PerceptionSnapshot& snapshot,
                                 const agent::ShortTermMemory& memory,
                                 const std::vector<demos::DemonstrationRecord>& demonstrations,
                                 const std::vector<std::string>& guideline_texts) {
    PromptBundle b;
    b.system_text =
        "You are the driver agent controlling a car in an urban traffic scene. "
        "Each step you receive your perception, your recent memory, optional human "
        "demonstrations to imitate, and driving guidelines to obey. "
        "Choose exactly one action from this vocabulary: " + vocabulary_line() + ".";

    std::ostringstream os;
    os << "## Perception\n" << situation_text(snapshot) << "\n\n";
    os << "## Short-term memory (oldest first)\n";
    render_memory(os, memory);
    os << "\n## Demonstrations\n";
    render_demos(os, demonstrations);
    os << "\n## Guidelines\n";
    render_guidelines(os, guideline_texts);
    os << "\n## Instruction\n"
          "Think Step by Step.\n"
          "Reply exactly in this format:\n"
          "Situation: <one sentence summary>\n"
          "Reasoning: <your step-by-step reasoning>\n"
          "Action: <one vocabulary token>\n";
    b.user_text = os.str();
    return b;
}

PromptBundle build_coach_prompt(const agent::ShortTermMemory& memory,
                                const std::vector<demos::DemonstrationRecord>& demonstrations,
                                const std::vector<std::string>& guideline_texts) {
    PromptBundle b;
    b.system_text =
        "You are a driving coach. Judge whether the driver's recent decisions align with "
        "common driving sense, the accumulated guidelines, and the style of the Good "
        "examples. Answer with a verdict of Good or Bad and the reason.";

    std::ostringstream os;
    os << "## Driver's short-term memory (oldest first)\n";
    render_memory(os, memory);
    os << "\n## Good examples\n";
    render_demos(os, demonstrations);
    os << "\n## Guidelines\n";
    render_guidelines(os, guideline_texts);
    os << "\n## Instruction\n"
          "Reply exactly in this format:\n"
          "Verdict: <Good or Bad>\n"
          "Reason: <one sentence>\n";
    b.user_text = os.str();
    return b;
}

}  // namespace coachsim::reasoning
