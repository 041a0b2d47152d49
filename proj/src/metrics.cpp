#include "coachsim/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coachsim/csv_util.hpp"

namespace coachsim::metrics {

using nlohmann::json;

void validate_log(const RunLog& log) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (i > 0) {
            if (log[i].second <= log[i - 1].second) {
                throw std::invalid_argument("log seconds must be strictly increasing");
            }
            if (log[i].collisions_cum < log[i - 1].collisions_cum ||
                log[i].distance_cum < log[i - 1].distance_cum) {
                throw std::invalid_argument("cumulative log columns must be nondecreasing");
            }
        }
    }
}

CollisionRate collision_rate(const RunLog& log) {
    if (log.empty()) throw std::invalid_argument("collision rate needs a non-empty log");
    const int total = log.back().collisions_cum;
    if (total == 0) return {0.0, false};
    // Distance cumulative up to the last collision: the first record where
    // the count reaches its final value.
    double denom = 0.0;
    for (const LogRecord& r : log) {
        if (r.collisions_cum == total) {
            denom = r.distance_cum;
            break;
        }
    }
    if (denom <= 0.0) return {0.0, true};
    return {static_cast<double>(total) / denom, false};
}

std::optional<double> avg_excluding_zero(const std::vector<double>& series) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : series) {
        if (v > 0.0) {
            sum += v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::vector<SegmentMean> per_minute_segments_where(const std::vector<double>& series,
                                                   const std::vector<bool>& include) {
    if (include.size() != series.size()) throw std::invalid_argument("mask length mismatch");
    std::vector<SegmentMean> out;
    for (std::size_t start = 0; start < series.size(); start += 60) {
        const std::size_t end = std::min(series.size(), start + 60);
        SegmentMean seg;
        seg.start_second = static_cast<int>(start) + 1;
        seg.partial = end - start < 60;
        double sum = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            if (include[i]) {
                sum += series[i];
                ++seg.sample_count;
            }
        }
        if (seg.sample_count > 0) seg.mean = sum / seg.sample_count;
        out.push_back(seg);
    }
    return out;
}

std::vector<SegmentMean> per_minute_segments(const std::vector<double>& series) {
    std::vector<bool> include(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) include[i] = series[i] > 0.0;
    return per_minute_segments_where(series, include);
}

MetricsReport build_report(const RunLog& log) {
    if (log.empty()) throw std::invalid_argument("cannot build a report from an empty log");
    validate_log(log);

    MetricsReport rep;
    rep.collisions_per_meter = collision_rate(log);
    rep.collision_count = log.back().collisions_cum;
    rep.duration_s = log.back().second;
    rep.distance_m = log.back().distance_cum;

    std::vector<double> speed, throttle, brake;
    std::vector<bool> moving;
    speed.reserve(log.size());
    for (const LogRecord& r : log) {
        speed.push_back(r.speed);
        throttle.push_back(r.throttle_pct);
        brake.push_back(r.brake_pct);
        moving.push_back(r.speed > 0.0);
    }

    rep.avg_speed = avg_excluding_zero(speed);
    double t_sum = 0.0, b_sum = 0.0;
    std::size_t n_moving = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (moving[i]) {
            t_sum += throttle[i];
            b_sum += brake[i];
            ++n_moving;
        }
    }
    if (n_moving > 0) {
        rep.avg_throttle = t_sum / static_cast<double>(n_moving);
        rep.avg_brake = b_sum / static_cast<double>(n_moving);
    }

    rep.speed_per_minute = per_minute_segments(speed);
    rep.throttle_per_minute = per_minute_segments_where(throttle, moving);
    rep.brake_per_minute = per_minute_segments_where(brake, moving);
    return rep;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string log_to_csv(const RunLog& log) {
    std::ostringstream os;
    os << "second,speed,throttle_pct,brake_pct,collisions_cum,distance_cum\n";
    for (const LogRecord& r : log) {
        os << r.second << ',' << fmt6(r.speed) << ',' << fmt6(r.throttle_pct) << ','
           << fmt6(r.brake_pct) << ',' << r.collisions_cum << ',' << fmt6(r.distance_cum) << "\n";
    }
    return os.str();
}

RunLog log_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty log CSV");
    RunLog log;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != 6) throw std::invalid_argument("log CSV expects 6 columns");
        LogRecord r;
        r.second = std::stoi(cells[0]);
        r.speed = std::stod(cells[1]);
        r.throttle_pct = std::stod(cells[2]);
        r.brake_pct = std::stod(cells[3]);
        r.collisions_cum = std::stoi(cells[4]);
        r.distance_cum = std::stod(cells[5]);
        log.push_back(r);
    }
    validate_log(log);
    return log;
}

void write_log_csv(const RunLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write log CSV to " + path);
    out << log_to_csv(log);
}

RunLog read_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read log CSV from " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return log_from_csv(ss.str());
}

namespace {

json segment_to_json(const SegmentMean& s) {
    json j{{"start_second", s.start_second}, {"sample_count", s.sample_count}, {"partial", s.partial}};
    if (s.mean) j["mean"] = *s.mean;
    else j["mean"] = nullptr;
    return j;
}

json segments_to_json(const std::vector<SegmentMean>& v) {
    json arr = json::array();
    for (const SegmentMean& s : v) arr.push_back(segment_to_json(s));
    return arr;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
    json j;
    j["collisions_per_meter"] =
        r.collisions_per_meter.undefined ? json(nullptr) : json(r.collisions_per_meter.value);
    j["collisions_per_meter_undefined"] = r.collisions_per_meter.undefined;
    j["collision_count"] = r.collision_count;
    j["avg_speed"] = r.avg_speed ? json(*r.avg_speed) : json(nullptr);
    j["avg_throttle"] = r.avg_throttle ? json(*r.avg_throttle) : json(nullptr);
    j["avg_brake"] = r.avg_brake ? json(*r.avg_brake) : json(nullptr);
    j["duration_s"] = r.duration_s;
    j["distance_m"] = r.distance_m;
    j["speed_per_minute"] = segments_to_json(r.speed_per_minute);
    j["throttle_per_minute"] = segments_to_json(r.throttle_per_minute);
    j["brake_per_minute"] = segments_to_json(r.brake_per_minute);
    return j.dump(2);
}

void write_report_json(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report to " + path);
    out << report_to_json(report) << "\n";
}

}  // namespace coachsim::metrics
