#include "coachsim/parsers.hpp"

#include <algorithm>
#include <cctype>

namespace coachsim::reasoning {

namespace {

std::string upper(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

/// Position of `label` (e.g. "SITUATION:") in the uppercased text, or npos.
std::size_t find_label(const std::string& up, const char* label, std::size_t from = 0) {
    return up.find(label, from);
}

std::string section_after(const std::string& text, const std::string& up, const char* label) {
    const std::size_t pos = find_label(up, label);
    if (pos == std::string::npos) return {};
    const std::size_t start = pos + std::string(label).size();
    static const char* kLabels[] = {"SITUATION:", "REASONING:", "ACTION:", "VERDICT:", "REASON:"};
    std::size_t end = text.size();
    for (const char* other : kLabels) {
        const std::size_t p = up.find(other, start);
        if (p != std::string::npos && p < end) end = p;
    }
    return trim(text.substr(start, end - start));
}

bool word_at(const std::string& up, std::size_t pos, const std::string& word) {
    if (up.compare(pos, word.size(), word) != 0) return false;
    auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    if (pos > 0 && alnum(up[pos - 1])) return false;
    const std::size_t after = pos + word.size();
    if (after < up.size() && alnum(up[after])) return false;
    return true;
}

}  // namespace

std::optional<agent::AtomicAction> find_first_action_token(const std::string& text) {
    const std::string up = upper(text);
    std::size_t best_pos = std::string::npos;
    std::optional<agent::AtomicAction> best;
    for (agent::AtomicAction a : agent::all_actions()) {
        const std::string token(agent::action_token(a));
        const std::size_t p = up.find(token);
        if (p != std::string::npos && p < best_pos) {
            best_pos = p;
            best = a;
        }
    }
    return best;
}

std::optional<ParsedDriverResponse> parse_driver_response(const std::string& text) {
    const std::string up = upper(text);
    ParsedDriverResponse out;
    out.situation = section_after(text, up, "SITUATION:");
    out.reasoning = section_after(text, up, "REASONING:");
    const std::string action_section = section_after(text, up, "ACTION:");

    std::optional<agent::AtomicAction> action;
    if (!action_section.empty()) action = find_first_action_token(action_section);
    if (!action) action = find_first_action_token(text);
    if (!action) return std::nullopt;
    out.action = *action;

    // Free-form fallback: keep the whole text as reasoning.
    if (out.situation.empty() && out.reasoning.empty()) {
        out.reasoning = trim(text);
        out.situation = "(unlabeled response)";
    } else if (out.situation.empty()) {
        out.situation = "(unlabeled response)";
    } else if (out.reasoning.empty()) {
        out.reasoning = out.situation;
    }
    return out;
}

std::optional<ParsedVerdict> parse_coach_response(const std::string& text) {
    const std::string up = upper(text);
    std::size_t pos = std::string::npos;
    bool bad = false;
    for (std::size_t i = 0; i < up.size(); ++i) {
        if (word_at(up, i, "GOOD")) {
            pos = i;
            bad = false;
            break;
        }
        if (word_at(up, i, "BAD")) {
            pos = i;
            bad = true;
            break;
        }
    }
    if (pos == std::string::npos) return std::nullopt;

    ParsedVerdict v;
    v.bad = bad;
    std::string reason = section_after(text, up, "REASON:");
    if (reason.empty()) {
        std::string tail = text.substr(pos + (bad ? 3 : 4));
        std::size_t b = 0;
        while (b < tail.size() && !std::isalnum(static_cast<unsigned char>(tail[b]))) ++b;
        reason = trim(tail.substr(b));
    }
    v.reason = reason.empty() ? "unspecified" : reason;
    return v;
}

}  // namespace coachsim::reasoning
