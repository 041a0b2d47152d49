#include "coachsim/demonstrations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "coachsim/csv_util.hpp"
#include "coachsim/rng.hpp"

namespace coachsim::demos {

using nlohmann::json;

std::string style_name(StyleTag tag) { return tag == StyleTag::Cautious ? "cautious" : "risky"; }

std::optional<StyleTag> style_from_name(const std::string& name) {
    if (name == "cautious") return StyleTag::Cautious;
    if (name == "risky") return StyleTag::Risky;
    return std::nullopt;
}

int DemoSet::count(StyleTag tag) const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [&](const DemonstrationRecord& r) { return r.style == tag; }));
}

namespace {

std::string normalize_phrase(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool last_space = true;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
            last_space = false;
        } else if (!last_space) {
            out.push_back(' ');
            last_space = true;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

const std::map<std::string, agent::AtomicAction>& synonym_table() {
    using A = agent::AtomicAction;
    static const std::map<std::string, agent::AtomicAction> table = {
        {"gentle acceleration", A::AccelerateGentle},
        {"accelerate gently", A::AccelerateGentle},
        {"speed up slowly", A::AccelerateGentle},
        {"hard acceleration", A::AccelerateHard},
        {"accelerate hard", A::AccelerateHard},
        {"floor it", A::AccelerateHard},
        {"maintain speed", A::Maintain},
        {"keep speed", A::Maintain},
        {"hold speed", A::Maintain},
        {"maintain", A::Maintain},
        {"gentle deceleration", A::DecelerateGentle},
        {"decelerate gently", A::DecelerateGentle},
        {"ease off", A::DecelerateGentle},
        {"slow down", A::DecelerateGentle},
        {"hard braking", A::BrakeHard},
        {"brake hard", A::BrakeHard},
        {"emergency brake", A::BrakeHard},
        {"stop and wait", A::StopAndWait},
        {"stop", A::StopAndWait},
        {"wait", A::StopAndWait},
        {"change lane left", A::ChangeLaneLeft},
        {"left lane change", A::ChangeLaneLeft},
        {"merge left", A::ChangeLaneLeft},
        {"change lane right", A::ChangeLaneRight},
        {"right lane change", A::ChangeLaneRight},
        {"merge right", A::ChangeLaneRight},
        {"turn left", A::TurnLeft},
        {"turn right", A::TurnRight},
        {"go straight", A::ProceedStraight},
        {"proceed straight", A::ProceedStraight},
        {"continue straight", A::ProceedStraight},
    };
    return table;
}

}  // namespace

std::optional<agent::AtomicAction> action_from_free_text(const std::string& text) {
    if (auto direct = agent::action_from_token(text)) return direct;
    const std::string norm = normalize_phrase(text);
    if (auto direct = agent::action_from_token(norm)) return direct;
    auto it = synonym_table().find(norm);
    if (it != synonym_table().end()) return it->second;
    return std::nullopt;
}

DemoSet parse_demonstrations(const std::string& text) {
    DemoSet set;
    std::istringstream in(text);
    std::string line;
    int index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw LoadError("record " + std::to_string(index) + ": invalid JSON: " + e.what());
        }
        DemonstrationRecord rec;
        auto need_string = [&](const char* field) {
            if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
                throw LoadError("record " + std::to_string(index) + ": missing or empty field '" + field + "'");
            }
            return j[field].get<std::string>();
        };
        rec.situation = need_string("situation");
        rec.reasoning = need_string("reasoning");
        rec.raw_action = need_string("action");
        const std::string style = need_string("style");
        rec.driver_id = need_string("driver_id");
        if (j.contains("scenario_note") && j["scenario_note"].is_string()) {
            rec.scenario_note = j["scenario_note"].get<std::string>();
        }
        auto action = action_from_free_text(rec.raw_action);
        if (!action) {
            throw LoadError("record " + std::to_string(index) + ": unmapped action '" + rec.raw_action + "'");
        }
        rec.action = *action;
        auto tag = style_from_name(style);
        if (!tag) {
            throw LoadError("record " + std::to_string(index) + ": style must be 'cautious' or 'risky', got '" + style + "'");
        }
        rec.style = *tag;
        set.records.push_back(std::move(rec));
        ++index;
    }
    return set;
}

DemoSet load_demonstrations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open demonstration file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_demonstrations(ss.str());
}

std::string serialize_demonstrations(const DemoSet& set) {
    std::ostringstream out;
    for (const DemonstrationRecord& r : set.records) {
        json j{{"situation", r.situation},
               {"reasoning", r.reasoning},
               {"action", std::string(agent::action_token(r.action))},
               {"style", style_name(r.style)},
               {"driver_id", r.driver_id}};
        if (!r.scenario_note.empty()) j["scenario_note"] = r.scenario_note;
        out << j.dump() << "\n";
    }
    return out.str();
}

std::vector<DemonstrationRecord> select_demos(const DemoSet& set, StyleTag style, int n,
                                              std::uint64_t seed) {
    std::vector<DemonstrationRecord> pool;
    for (const DemonstrationRecord& r : set.records) {
        if (r.style == style) pool.push_back(r);
    }
    if (n <= 0) return {};
    Rng rng(seed);
    for (std::size_t i = pool.size(); i > 1; --i) {  // Fisher-Yates
        const std::size_t k = static_cast<std::size_t>(rng.next_index(i));
        std::swap(pool[i - 1], pool[k]);
    }
    if (static_cast<int>(pool.size()) > n) pool.resize(static_cast<std::size_t>(n));
    return pool;
}

StyleLabel classify_driver_style(const DriverStats& stats, const DriverStats& fleet,
                                 const ClassifyThresholds& thresholds) {
    if (fleet.mean_speed_mps <= 0.0) throw std::invalid_argument("fleet mean speed must be > 0");
    const double speed_dev = (stats.mean_speed_mps - fleet.mean_speed_mps) / fleet.mean_speed_mps;
    if (speed_dev >= thresholds.speed_deviation) return StyleLabel::Risky;
    if (speed_dev <= -thresholds.speed_deviation) return StyleLabel::Cautious;
    if (fleet.mean_throttle_pct > 0.0) {
        const double t_dev = (stats.mean_throttle_pct - fleet.mean_throttle_pct) / fleet.mean_throttle_pct;
        if (t_dev >= thresholds.throttle_deviation) return StyleLabel::Risky;
        if (t_dev <= -thresholds.throttle_deviation) return StyleLabel::Cautious;
    }
    return StyleLabel::Unlabeled;
}

int mdsi_style_score(const MDSIResponse& resp) {
    if (resp.cautious_negative.size() != resp.cautious_options.size()) {
        throw std::invalid_argument("negative-indicator mask length mismatch");
    }
    auto check = [&](int v) {
        if (v < resp.scale_min || v > resp.scale_max) {
            throw std::invalid_argument("MDSI option " + std::to_string(v) + " outside scale [" +
                                        std::to_string(resp.scale_min) + ", " +
                                        std::to_string(resp.scale_max) + "]");
        }
    };
    int score = 0;
    for (int v : resp.risky_options) {
        check(v);
        score += v;
    }
    for (std::size_t i = 0; i < resp.cautious_options.size(); ++i) {
        check(resp.cautious_options[i]);
        const int v = resp.cautious_negative[i] ? -resp.cautious_options[i] : resp.cautious_options[i];
        score -= v;
    }
    return score;
}

std::vector<MDSIScoredRow> parse_and_score_mdsi(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int scale_min = 0, scale_max = 5;
    if (!std::getline(in, line)) throw std::invalid_argument("MDSI table is empty");
    if (!line.empty() && line[0] == '#') {
        const auto parts = csv::split_line(line.substr(1));
        if (parts.size() == 3 && parts[0] == "scale") {
            scale_min = std::stoi(parts[1]);
            scale_max = std::stoi(parts[2]);
        }
        if (!std::getline(in, line)) throw std::invalid_argument("MDSI table has no header");
    }
    const auto header = csv::split_line(line);
    if (header.empty() || header[0] != "participant_id") {
        throw std::invalid_argument("MDSI header must start with participant_id");
    }
    enum class Role { Risky, Cautious, CautiousNegative };
    std::vector<Role> roles;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto pos = header[i].rfind(':');
        const std::string role = pos == std::string::npos ? "" : header[i].substr(pos + 1);
        if (role == "risky") {
            roles.push_back(Role::Risky);
        } else if (role == "cautious") {
            roles.push_back(Role::Cautious);
        } else if (role == "cautious_negative") {
            roles.push_back(Role::CautiousNegative);
        } else {
            throw std::invalid_argument("MDSI column '" + header[i] + "' lacks a :risky/:cautious/:cautious_negative role");
        }
    }
    const long negatives = std::count(roles.begin(), roles.end(), Role::CautiousNegative);
    if (negatives != 2) {
        throw std::invalid_argument("MDSI header must mark exactly two cautious_negative indicators, found " +
                                    std::to_string(negatives));
    }

    std::vector<MDSIScoredRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != roles.size() + 1) {
            throw std::invalid_argument("MDSI line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(roles.size() + 1) + " cells");
        }
        MDSIScoredRow row;
        row.participant = cells[0];
        row.response.scale_min = scale_min;
        row.response.scale_max = scale_max;
        for (std::size_t i = 0; i < roles.size(); ++i) {
            const int v = std::stoi(cells[i + 1]);
            switch (roles[i]) {
                case Role::Risky:
                    row.response.risky_options.push_back(v);
                    break;
                case Role::Cautious:
                    row.response.cautious_options.push_back(v);
                    row.response.cautious_negative.push_back(false);
                    break;
                case Role::CautiousNegative:
                    row.response.cautious_options.push_back(v);
                    row.response.cautious_negative.push_back(true);
                    break;
            }
        }
        row.score = mdsi_style_score(row.response);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<MDSIScoredRow> load_and_score_mdsi(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open MDSI table " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_and_score_mdsi(ss.str());
}

const DemoSet& builtin_sample_set() {
    static const DemoSet set = [] {
        DemoSet s;
        auto add = [&](StyleTag style, const char* id, const char* situation, const char* reasoning,
                       agent::AtomicAction action) {
            DemonstrationRecord r;
            r.style = style;
            r.driver_id = id;
            r.situation = situation;
            r.reasoning = reasoning;
            r.action = action;
            r.raw_action = std::string(agent::action_token(action));
            r.scenario_note = "synthetic sample";
            s.records.push_back(r);
        };
        using A = agent::AtomicAction;
        add(StyleTag::Cautious, "sample-c1",
            "speed 5.2 m/s, limit 8.3 m/s, pedestrian in lane 16.0 m ahead",
            "A pedestrian is crossing well ahead; easing off early keeps a wide safety margin.",
            A::DecelerateGentle);
        add(StyleTag::Cautious, "sample-c1",
            "speed 4.8 m/s, limit 8.3 m/s, signal red 28.0 m ahead",
            "The light is red; starting to slow now means a smooth, gradual stop at the line.",
            A::DecelerateGentle);
        add(StyleTag::Cautious, "sample-c2",
            "speed 5.5 m/s, limit 8.3 m/s, leader 14.0 m ahead at 5.0 m/s",
            "The car ahead is a bit slow; keeping extra distance is safer than squeezing past.",
            A::DecelerateGentle);
        add(StyleTag::Cautious, "sample-c2",
            "speed 5.4 m/s, limit 8.3 m/s, clear road",
            "Traffic is calm and the pace feels comfortable below the limit, so hold it.",
            A::Maintain);
        add(StyleTag::Risky, "sample-r1",
            "speed 7.0 m/s, limit 8.3 m/s, clear road",
            "The road is open, so push hard up to the limit to keep the trip quick.",
            A::AccelerateHard);
        add(StyleTag::Risky, "sample-r1",
            "speed 7.8 m/s, limit 8.3 m/s, leader 9.0 m ahead at 6.5 m/s",
            "The left lane is open; swinging out keeps momentum instead of braking.",
            A::ChangeLaneLeft);
        add(StyleTag::Risky, "sample-r2",
            "speed 8.0 m/s, limit 8.3 m/s, signal green 20.0 m ahead",
            "The light is green now; accelerating through beats getting caught by the change.",
            A::AccelerateHard);
        add(StyleTag::Risky, "sample-r2",
            "speed 7.4 m/s, limit 8.3 m/s, leader 12.0 m ahead at 7.0 m/s",
            "The gap is workable; matching the quicker flow keeps things moving.",
            A::AccelerateGentle);
        return s;
    }();
    return set;
}

}  // namespace coachsim::demos
