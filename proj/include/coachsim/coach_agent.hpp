#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coachsim/backend.hpp"

namespace coachsim::coach {

enum class Verdict { Good, Bad };

struct Evaluation {
    Verdict verdict = Verdict::Good;
    std::string reason;
    long tick_from = 0;
    long tick_to = 0;
    int id = -1;  // assigned by the run loop
};

struct Guideline {
    int id = -1;
    std::string text;
    int source_evaluation_id = -1;
    long created_tick = 0;
};

/// Ordered guideline repository with normalized-text dedupe and optional
/// FIFO capacity.
class GuidelinesStore {
public:
    explicit GuidelinesStore(std::optional<int> capacity = 20) : capacity_(capacity) {}

    /// Appends unless a normalized duplicate exists; evicts the oldest
    /// entry when at capacity. Returns true when the store changed.
    bool add(const Guideline& guideline);

    const std::vector<Guideline>& items() const { return items_; }
    std::vector<std::string> texts() const;
    std::size_t size() const { return items_.size(); }
    std::optional<int> capacity() const { return capacity_; }

    /// Case-fold + whitespace collapse, the dedupe key.
    static std::string normalize(const std::string& text);

private:
    std::optional<int> capacity_;
    std::vector<Guideline> items_;
};

/// Judges the driver's short-term memory. Returns nullopt when the backend
/// fails or its answer carries no verdict (the cycle is skipped, never
/// fatal). Throws std::invalid_argument on empty memory.
std::optional<Evaluation> evaluate(const agent::ShortTermMemory& memory,
                                   const std::vector<demos::DemonstrationRecord>& demos_for_coach,
                                   const GuidelinesStore& guidelines,
                                   reasoning::ReasoningBackend& backend,
                                   reasoning::TranscriptLog* transcript = nullptr);

/// Produces the guideline addressing a Bad evaluation. Deterministic with
/// the rule backend (templated from the fired predicate). Throws
/// std::invalid_argument when called on a Good evaluation.
Guideline generate_guideline(const Evaluation& evaluation, const agent::ShortTermMemory& memory,
                             reasoning::ReasoningBackend& backend,
                             reasoning::TranscriptLog* transcript = nullptr);

/// Value-semantic append used by the spec-shaped API; see GuidelinesStore::add.
GuidelinesStore add_guideline(GuidelinesStore store, const Guideline& guideline);

}  // namespace coachsim::coach
