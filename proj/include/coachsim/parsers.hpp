#pragma once

#include <optional>
#include <string>

#include "coachsim/actions.hpp"

namespace coachsim::reasoning {

struct ParsedDriverResponse {
    std::string situation;
    std::string reasoning;
    agent::AtomicAction action = agent::AtomicAction::Maintain;
};

/// Extracts labeled Situation/Reasoning sections (case-insensitive) and the
/// first vocabulary token in the Action section; free-form text falls back
/// to scanning the whole response. No vocabulary token anywhere means parse
/// failure (nullopt). Never throws.
std::optional<ParsedDriverResponse> parse_driver_response(const std::string& text);

struct ParsedVerdict {
    bool bad = false;
    std::string reason;
};

/// Finds the first standalone Good/Bad token (case-insensitive) and the
/// reason after a "Reason:" label, a dash, or whatever trails the verdict.
std::optional<ParsedVerdict> parse_coach_response(const std::string& text);

/// First vocabulary token in `text` by position; ties impossible (tokens
/// are position-distinct). Case-insensitive.
std::optional<agent::AtomicAction> find_first_action_token(const std::string& text);

}  // namespace coachsim::reasoning
