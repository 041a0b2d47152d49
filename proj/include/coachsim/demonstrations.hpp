#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coachsim/actions.hpp"

namespace coachsim::demos {

enum class StyleTag { Cautious, Risky };

std::string style_name(StyleTag tag);
std::optional<StyleTag> style_from_name(const std::string& name);

/// A human decision in Situation/Reasoning/Action form.
struct DemonstrationRecord {
    std::string situation;
    std::string reasoning;
    agent::AtomicAction action = agent::AtomicAction::Maintain;
    std::string raw_action;  // as written in the source file
    StyleTag style = StyleTag::Cautious;
    std::string driver_id;
    std::string scenario_note;
};

struct DemoSet {
    std::vector<DemonstrationRecord> records;
    int count(StyleTag tag) const;
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Free-text action phrases accepted in demonstration files, e.g.
/// "gentle acceleration" -> ACCELERATE_GENTLE. Canonical tokens always
/// work; anything unmapped is a load error.
std::optional<agent::AtomicAction> action_from_free_text(const std::string& text);

/// Loads a JSON-lines demonstration file. Each line holds an object with
/// fields situation, reasoning, action, style, driver_id and optional
/// scenario_note. Errors name the offending record and field.
DemoSet load_demonstrations(const std::string& path);
DemoSet parse_demonstrations(const std::string& text);
std::string serialize_demonstrations(const DemoSet& set);

/// n records of the requested style (all when fewer exist), order
/// deterministic for a given seed.
std::vector<DemonstrationRecord> select_demos(const DemoSet& set, StyleTag style, int n,
                                              std::uint64_t seed);

/// Hand-written synthetic sample set used by tests and as the CLI default.
const DemoSet& builtin_sample_set();

// --- CAN-bus style classification -----------------------------------------

struct DriverStats {
    std::string driver_id;
    double mean_speed_mps = 0.0;
    double mean_throttle_pct = 0.0;
    std::optional<double> mean_brake_pct;
};

enum class StyleLabel { Risky, Cautious, Unlabeled };

struct ClassifyThresholds {
    double speed_deviation = 0.15;     // fraction of the fleet mean
    double throttle_deviation = 0.15;  // tie-breaker when speed is inconclusive
};

/// Fleet-relative classification: speed deviation beyond the threshold
/// decides; otherwise a strong throttle deviation breaks the tie.
/// Throws std::invalid_argument on a non-positive fleet mean.
StyleLabel classify_driver_style(const DriverStats& stats, const DriverStats& fleet,
                                 const ClassifyThresholds& thresholds = {});

// --- MDSI driving-style score ----------------------------------------------

struct MDSIResponse {
    std::vector<int> risky_options;
    std::vector<int> cautious_options;
    std::vector<bool> cautious_negative;  // aligned with cautious_options
    int scale_min = 0;
    int scale_max = 5;
};

/// S = sum(risky) - sum(cautious), with negative-indicator options entering
/// the cautious sum negated. Throws std::invalid_argument on out-of-scale
/// options or a mask length mismatch.
int mdsi_style_score(const MDSIResponse& resp);

struct MDSIScoredRow {
    std::string participant;
    MDSIResponse response;
    int score = 0;
};

/// Delimited MDSI table: optional "#scale,<min>,<max>" first line, then a
/// header of participant_id plus "<name>:risky|cautious|cautious_negative"
/// columns (exactly two cautious_negative). One scored row per line.
std::vector<MDSIScoredRow> load_and_score_mdsi(const std::string& path);
std::vector<MDSIScoredRow> parse_and_score_mdsi(const std::string& text);

}  // namespace coachsim::demos
