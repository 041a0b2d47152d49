#pragma once

#include <optional>
#include <string>
#include <vector>

namespace coachsim::metrics {

/// One second of telemetry from the agent vehicle.
struct LogRecord {
    int second = 0;  // strictly increasing, starting at 1
    double speed = 0.0;
    double throttle_pct = 0.0;
    double brake_pct = 0.0;
    int collisions_cum = 0;
    double distance_cum = 0.0;
};

using RunLog = std::vector<LogRecord>;

/// Throws std::invalid_argument when seconds are not strictly increasing
/// or a cumulative column decreases.
void validate_log(const RunLog& log);

struct CollisionRate {
    double value = 0.0;
    bool undefined = false;  // collisions present but zero distance at the last one
};

/// Collisions per meter with the distance cumulative up to the last
/// collision as denominator; 0 when the run had no collisions. Throws on
/// an empty log.
CollisionRate collision_rate(const RunLog& log);

/// Mean over strictly positive entries; nullopt when none exist.
std::optional<double> avg_excluding_zero(const std::vector<double>& series);

struct SegmentMean {
    int start_second = 0;          // first sim second covered by the window
    int sample_count = 0;          // entries contributing to the mean
    std::optional<double> mean;    // absent when the window has no support
    bool partial = false;          // final window shorter than 60 s
};

/// 60-second windows in series order; each window's zero-excluded mean.
std::vector<SegmentMean> per_minute_segments(const std::vector<double>& series);

/// Same windowing, but an explicit inclusion mask decides which entries
/// count (used for the stationary-second rule on throttle/brake).
std::vector<SegmentMean> per_minute_segments_where(const std::vector<double>& series,
                                                   const std::vector<bool>& include);

struct MetricsReport {
    CollisionRate collisions_per_meter;
    int collision_count = 0;
    std::optional<double> avg_speed;     // zero-excluded
    std::optional<double> avg_throttle;  // stationary seconds excluded
    std::optional<double> avg_brake;     // stationary seconds excluded
    std::vector<SegmentMean> speed_per_minute;
    std::vector<SegmentMean> throttle_per_minute;
    std::vector<SegmentMean> brake_per_minute;
    int duration_s = 0;
    double distance_m = 0.0;
};

/// Derives every report field from the log. Stationary seconds
/// (speed == 0) are excluded from the throttle and brake averages; for
/// speed that rule coincides with zero exclusion. Throws on an empty log.
MetricsReport build_report(const RunLog& log);

// CSV I/O. Columns, in order: second,speed,throttle_pct,brake_pct,
// collisions_cum,distance_cum. Doubles are written with six decimals, so
// identical logs produce identical bytes.
std::string log_to_csv(const RunLog& log);
RunLog log_from_csv(const std::string& text);
void write_log_csv(const RunLog& log, const std::string& path);
RunLog read_log_csv(const std::string& path);

std::string report_to_json(const MetricsReport& report);
void write_report_json(const MetricsReport& report, const std::string& path);

}  // namespace coachsim::metrics
