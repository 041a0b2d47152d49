#include "coachsim/coach_agent.hpp"

#include <algorithm>
#include <cctype>

#include "coachsim/parsers.hpp"
#include "coachsim/rule_backend.hpp"

namespace coachsim::coach {

std::string GuidelinesStore::normalize(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool last_space = true;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            if (!last_space) {
                out.push_back(' ');
                last_space = true;
            }
        } else {
            out.push_back(static_cast<char>(std::tolower(c)));
            last_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

bool GuidelinesStore::add(const Guideline& guideline) {
    const std::string key = normalize(guideline.text);
    for (const Guideline& g : items_) {
        if (normalize(g.text) == key) return false;
    }
    if (capacity_ && static_cast<int>(items_.size()) >= *capacity_) {
        items_.erase(items_.begin());
    }
    items_.push_back(guideline);
    return true;
}

std::vector<std::string> GuidelinesStore::texts() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const Guideline& g : items_) out.push_back(g.text);
    return out;
}

namespace {

std::optional<demos::StyleTag> majority_style(const std::vector<demos::DemonstrationRecord>& records) {
    if (records.empty()) return std::nullopt;
    long cautious = std::count_if(records.begin(), records.end(), [](const auto& r) {
        return r.style == demos::StyleTag::Cautious;
    });
    return 2 * cautious >= static_cast<long>(records.size()) ? demos::StyleTag::Cautious
                                                             : demos::StyleTag::Risky;
}

}  // namespace

std::optional<Evaluation> evaluate(const agent::ShortTermMemory& memory,
                                   const std::vector<demos::DemonstrationRecord>& demos_for_coach,
                                   const GuidelinesStore& guidelines,
                                   reasoning::ReasoningBackend& backend,
                                   reasoning::TranscriptLog* transcript) {
    if (memory.empty()) throw std::invalid_argument("coach evaluation requires a non-empty memory");

    const std::vector<std::string> guideline_texts = guidelines.texts();
    const reasoning::PromptBundle prompt =
        reasoning::build_coach_prompt(memory, demos_for_coach, guideline_texts);
    reasoning::CoachRuleContext ctx{&memory, majority_style(demos_for_coach), &guideline_texts};
    const reasoning::ReasoningResponse resp = backend.send_coach(prompt, ctx);

    std::optional<Evaluation> result;
    if (resp.ok) {
        if (auto parsed = reasoning::parse_coach_response(resp.text)) {
            Evaluation ev;
            ev.verdict = parsed->bad ? Verdict::Bad : Verdict::Good;
            ev.reason = parsed->reason;
            ev.tick_from = memory.units().front().tick;
            ev.tick_to = memory.units().back().tick;
            result = ev;
        }
    }
    if (transcript != nullptr) {
        transcript->log_exchange("coach", prompt, resp, result ? "" : "evaluation skipped");
    }
    return result;
}

Guideline generate_guideline(const Evaluation& evaluation, const agent::ShortTermMemory& memory,
                             reasoning::ReasoningBackend& backend,
                             reasoning::TranscriptLog* transcript) {
    if (evaluation.verdict != Verdict::Bad) {
        throw std::invalid_argument("guidelines are generated only from Bad evaluations");
    }

    Guideline g;
    g.source_evaluation_id = evaluation.id;
    g.created_tick = evaluation.tick_to;

    if (backend.kind() == reasoning::BackendKind::Rule) {
        g.text = reasoning::guideline_text_for_reason(evaluation.reason);
        return g;
    }

    reasoning::PromptBundle prompt;
    prompt.system_text =
        "You are a driving coach. Turn the critique below into one short, imperative "
        "driving guideline (a single sentence).";
    prompt.user_text = "Critique: " + evaluation.reason + "\n\nRecent decisions:\n";
    for (const agent::MemoryUnit& u : memory.units()) {
        prompt.user_text += "- " + u.situation + " -> " + std::string(agent::action_token(u.action)) + "\n";
    }
    reasoning::CoachRuleContext ctx{&memory, std::nullopt, nullptr};
    const reasoning::ReasoningResponse resp = backend.send_coach(prompt, ctx);
    if (transcript != nullptr) transcript->log_exchange("coach-guideline", prompt, resp);
    if (resp.ok && !resp.text.empty()) {
        std::string text = resp.text;
        const auto nl = text.find('\n');
        if (nl != std::string::npos) text = text.substr(0, nl);
        if (!text.empty()) {
            g.text = text;
            return g;
        }
    }
    g.text = reasoning::guideline_text_for_reason(evaluation.reason);
    return g;
}

GuidelinesStore add_guideline(GuidelinesStore store, const Guideline& guideline) {
    store.add(guideline);
    return store;
}

}  // namespace coachsim::coach
