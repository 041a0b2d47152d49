#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coachsim/coach_agent.hpp"
#include "coachsim/metrics.hpp"
#include "coachsim/simulator.hpp"

namespace coachsim::experiment {

enum class Style { Cautious, Risky, NotAligned };
enum class Method { Demonstrations, Feedback, Multi };

struct Condition {
    Style style = Style::NotAligned;
    Method method = Method::Demonstrations;

    /// Two-letter code, method first: DC, DN, DR, FC, FN, FR, MC, MR.
    std::string code() const;
    static std::optional<Condition> from_code(const std::string& code);
    bool operator==(const Condition& o) const { return style == o.style && method == o.method; }
};

/// The eight realized conditions in canonical order
/// {DC, DN, DR, FC, FN, FR, MC, MR}; (NotAligned, Multi) does not exist.
std::vector<Condition> build_matrix();

struct Wiring {
    std::vector<demos::DemonstrationRecord> demos_for_driver;
    std::vector<demos::DemonstrationRecord> demos_for_coach;
    bool coach_enabled = false;
};

/// Routes style demos per alignment method: D feeds the driver only,
/// F the coach only, M both; NotAligned passes empty demo lists but keeps
/// the method's coach wiring. Throws std::invalid_argument on
/// (NotAligned, Multi).
Wiring wire_condition(const Condition& condition, const demos::DemoSet& demo_set, int demo_count,
                      std::uint64_t seed);

struct RunConfig {
    Condition condition;
    sim::ScenarioConfig scenario;
    std::uint64_t seed = 1;
    double duration_s = 400.0;
    reasoning::BackendConfig backend;
    std::string demos_path;  // empty -> built-in sample set
    int demo_count = 3;
    int memory_capacity = 5;
    int coach_cadence = 0;  // decisions between evaluations; 0 -> memory capacity
    double sensing_radius_m = 50.0;
    std::string out_dir;  // empty -> no artifacts written
};

struct RunResult {
    Condition condition;
    std::uint64_t seed = 0;
    metrics::RunLog log;
    metrics::MetricsReport report;
    std::vector<coach::Guideline> guidelines;
    int decision_count = 0;
    int fallback_count = 0;
    int evaluation_count = 0;
    int bad_evaluation_count = 0;
    std::string run_dir;  // artifact directory when out_dir was set
    std::string log_path;
    std::string transcript_path;
    std::string guidelines_path;
    std::string runconfig_path;
    std::string report_path;
};

/// Executes the perceive -> decide -> act -> remember loop at one decision
/// per simulated second, with coach evaluations every `coach_cadence`
/// decisions, second-by-second logging, and artifact persistence.
RunResult run_condition(const RunConfig& config);

struct AggregateRow {
    Condition condition;
    int run_count = 0;
    double mean_collision_rate = 0.0;
    double mean_speed = 0.0;
    double mean_throttle = 0.0;
    double mean_brake = 0.0;
    double mean_distance_m = 0.0;
};

/// Per-condition means across seeds, canonical condition order.
std::vector<AggregateRow> aggregate(const std::vector<RunResult>& results);

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> aggregate_from_csv(const std::string& text);

// RunConfig persistence (runconfig.json inside each run directory).
std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);

}  // namespace coachsim::experiment
