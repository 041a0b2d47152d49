#include "coachsim/rule_backend.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace coachsim::reasoning {

namespace {

constexpr double kGentleDecel = 2.4;  // 30% brake at k_b = 0.08
constexpr double kReactionS = 1.0;
constexpr double kStandoffM = 4.0;

double stop_envelope(double v) { return v * v / (2.0 * kGentleDecel) + v * kReactionS + kStandoffM; }

/// Minimum gap from which matching a slower leader's speed is still
/// possible at the profile's braking style.
double brake_floor(double v, double leader_v, double decel) {
    const double dv = std::max(0.0, v - std::max(0.0, leader_v));
    return (v * v - leader_v * leader_v) / (2.0 * decel) + 3.0 + 0.3 * dv;
}

/// Anyone crossing the roadway ahead, in-lane or not.
bool crossing_ped_ahead(const agent::PerceptionSnapshot& s) {
    if (s.pedestrian_gap && *s.pedestrian_gap < 50.0) return true;
    for (const agent::NearbyEntity& ne : s.nearby) {
        if (ne.relation == agent::LaneRelation::Crossing && ne.relative_position.x > 0.0 &&
            ne.distance < 45.0) {
            return true;
        }
    }
    return false;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::optional<double> value_after(const std::string& text, const std::string& marker) {
    const std::size_t pos = text.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    const char* start = text.c_str() + pos + marker.size();
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) return std::nullopt;
    return v;
}

}  // namespace

ParsedSituation parse_situation_line(const std::string& text) {
    ParsedSituation p;
    p.speed = value_after(text, "speed ");
    p.limit = value_after(text, "limit ");
    p.signal_red_dist = value_after(text, "signal red ");
    p.signal_green_dist = value_after(text, "signal green ");
    p.pedestrian_dist = value_after(text, "pedestrian in lane ");
    p.leader_dist = value_after(text, "leader ");
    if (p.leader_dist) {
        const std::size_t pos = text.find("leader ");
        p.leader_speed = value_after(text.substr(pos), "ahead at ");
    }
    return p;
}

// --- Coach predicate table ---------------------------------------------------

namespace {

struct CoachMargins {
    double envelope_scale;      // stop-envelope multiplier for signal/pedestrian rules
    double headway_floor_s;     // minimum acceptable time headway
    double overspeed_fraction;  // speed/limit ratio that counts as speeding
};

// Margins sit strictly outside the matching driver profile's own reaction
// envelope, so a coach always has something to correct.
CoachMargins margins_for(std::optional<demos::StyleTag> style) {
    if (!style) return {1.35, 2.0, 1.10};
    return *style == demos::StyleTag::Cautious ? CoachMargins{1.75, 2.5, 1.02}
                                               : CoachMargins{0.75, 1.0, 1.35};
}

std::optional<std::string> covering_guideline(const std::string& predicate_key,
                                              const std::vector<std::string>& guidelines) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    const std::string needle = predicate_key == "signal"     ? "signal"
                               : predicate_key == "pedestrian" ? "pedestrian"
                               : predicate_key == "headway"    ? "distance"
                               : predicate_key == "overspeed"  ? "limit"
                                                               : "";
    if (needle.empty()) return std::nullopt;
    for (const std::string& g : guidelines) {
        if (lower(g).find(needle) != std::string::npos) return g;
    }
    return std::nullopt;
}

}  // namespace

std::optional<PredicateHit> first_violation(const agent::ShortTermMemory& memory,
                                            std::optional<demos::StyleTag> demo_style,
                                            const std::vector<std::string>& guideline_texts) {
    const CoachMargins m = margins_for(demo_style);
    for (const agent::MemoryUnit& u : memory.units()) {
        const ParsedSituation s = parse_situation_line(u.situation);
        const double v = s.speed.value_or(0.0);
        const agent::AtomicAction a = u.action;
        std::optional<PredicateHit> hit;

        if (s.signal_red_dist && v > 1.0 && *s.signal_red_dist < stop_envelope(v) * m.envelope_scale &&
            (agent::is_acceleration(a) || a == agent::AtomicAction::Maintain)) {
            hit = PredicateHit{"signal",
                               "keeps speed toward a red signal " + num(*s.signal_red_dist) + " m ahead",
                               u.tick};
        } else if (s.pedestrian_dist && agent::is_acceleration(a) &&
                   *s.pedestrian_dist < stop_envelope(v) * m.envelope_scale) {
            hit = PredicateHit{"pedestrian",
                               "accelerates while a pedestrian is only " + num(*s.pedestrian_dist) +
                                   " m ahead within stopping distance",
                               u.tick};
        } else if (s.leader_dist && v > 1.0 && *s.leader_dist / v < m.headway_floor_s &&
                   !agent::is_deceleration(a) && a != agent::AtomicAction::ChangeLaneLeft &&
                   a != agent::AtomicAction::ChangeLaneRight) {
            hit = PredicateHit{"headway",
                               "does not yield although the leader is " + num(*s.leader_dist) +
                                   " m ahead (" + num(*s.leader_dist / v) + " s headway)",
                               u.tick};
        } else if (s.limit && agent::is_acceleration(a) && v > *s.limit * m.overspeed_fraction) {
            hit = PredicateHit{"overspeed",
                               "accelerates at " + num(v) + " m/s beyond the " + num(*s.limit) +
                                   " m/s limit",
                               u.tick};
        } else if (demo_style == demos::StyleTag::Cautious) {
            if (a == agent::AtomicAction::AccelerateHard) {
                hit = PredicateHit{"style-hard",
                                   "uses a hard maneuver that deviates from the cautious demonstration style",
                                   u.tick};
            } else if (s.limit && v > 0.8 * *s.limit) {
                hit = PredicateHit{"style-pace",
                                   "cruises at " + num(v) + " m/s, above the comfortable cautious pace",
                                   u.tick};
            }
        } else if (demo_style == demos::StyleTag::Risky) {
            const bool hazard = s.signal_red_dist.has_value() || s.pedestrian_dist.has_value() ||
                                (s.leader_dist && v > 0.5 && *s.leader_dist / v < 2.5);
            if (!hazard && agent::is_deceleration(a)) {
                hit = PredicateHit{"style-timid",
                                   "slows without any hazard, deviating from the risky demonstration style",
                                   u.tick};
            } else if (!hazard && s.limit && v < 0.8 * *s.limit &&
                       a != agent::AtomicAction::AccelerateHard) {
                hit = PredicateHit{"style-slow",
                                   "stays below the traffic pace without reason, deviating from the "
                                   "risky demonstration style",
                                   u.tick};
            }
        }

        if (hit) {
            std::string reason = "unit at t=" + std::to_string(u.tick) + " " + hit->reason;
            if (auto g = covering_guideline(hit->key, guideline_texts)) {
                reason += ", violating the guideline '" + *g + "'";
            }
            hit->reason = reason;
            return hit;
        }
    }
    return std::nullopt;
}

std::string guideline_text_for_reason(const std::string& reason) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    const std::string r = lower(reason);
    auto has = [&](const char* phrase) { return r.find(phrase) != std::string::npos; };
    if (has("pedestrian")) return "Reduce speed when pedestrians are within stopping distance ahead.";
    if (has("red signal")) return "Begin braking early when approaching a red signal.";
    if (has("leader") || has("headway")) return "Keep a larger following distance behind the leading vehicle.";
    if (has("beyond the") && has("limit")) return "Do not accelerate beyond the posted speed limit.";
    if (has("hard maneuver")) return "Prefer gentle acceleration and smooth maneuvers.";
    if (has("cautious pace")) return "Keep cruising speed comfortably below the limit.";
    if (has("slows without")) return "Avoid unnecessary braking; keep momentum.";
    if (has("below the traffic pace")) return "Accelerate assertively up to the traffic flow speed.";
    return "Drive attentively and respect the traffic rules.";
}

// --- Driver decision ---------------------------------------------------------

ReasoningResponse rule_send(const DriverRuleContext& context, const StyleProfile& profile,
                            const sim::DynamicsParams& dynamics) {
    const agent::PerceptionSnapshot& s = *context.snapshot;
    static const std::vector<std::string> kNoGuidelines;
    const std::vector<std::string>& guidelines =
        context.guideline_texts != nullptr ? *context.guideline_texts : kNoGuidelines;
    const EffectiveProfile eff = apply_guidelines(profile, guidelines);

    const double v = s.ego_speed;
    const double target = s.speed_limit * eff.base.speed_fraction;
    const double bias = eff.base.hard_action_bias;
    const bool hard = bias >= 0.5;
    // Low-bias drivers react early and brake gently for a long stretch;
    // high-bias drivers wait and then stop over a short, firm zone.
    const double react_scale = 1.65 - 0.9 * bias;
    const double zone_decel = kGentleDecel + 3.2 * bias;
    const double hard_zone = v * v / (2.0 * zone_decel) + 3.0;

    using A = agent::AtomicAction;
    A action = A::Maintain;
    std::string why;

    const double sig_d = s.distance_to_intersection;
    const bool leader_closer_than_signal = s.leader_gap && *s.leader_gap < sig_d;
    const double settle_band = eff.base.gap_acceptance_m + 4.0 + 8.0 * (1.0 - bias);

    // High-bias drivers skip anticipatory braking: they coast to the hard
    // zone and stop firmly; low-bias drivers ease off across the outer band.
    const double signal_react = hard ? std::max(4.0, hard_zone)
                                     : stop_envelope(v) * eff.signal_margin_scale * react_scale;
    if (s.signal == agent::SignalPhase::Red && !leader_closer_than_signal && sig_d < signal_react) {
        if (sig_d <= std::max(4.0, hard_zone)) {
            action = v <= 1.0 ? A::StopAndWait : A::BrakeHard;
            why = v <= 1.0 ? "Holding at the red signal until it turns green."
                           : "The red signal is inside the stopping distance; braking hard to stop at the line.";
        } else {
            action = A::DecelerateGentle;
            why = "A red signal lies " + num(sig_d) + " m ahead; easing off now allows a smooth stop.";
        }
    } else if (s.signal == agent::SignalPhase::Green && bias < 0.35 && v > 0.75 * target &&
               sig_d < v * 2.5 && !leader_closer_than_signal) {
        action = A::DecelerateGentle;
        why = "Covering the brake through the junction ahead even though the signal is green.";
    } else if (s.pedestrian_gap &&
               *s.pedestrian_gap < (hard ? v * v / (2.0 * zone_decel) + 4.0
                                         : stop_envelope(v) * eff.pedestrian_margin_scale * react_scale)) {
        if (*s.pedestrian_gap < eff.base.gap_acceptance_m) {
            action = v <= 0.5 ? A::StopAndWait : A::BrakeHard;
            why = "A pedestrian is only " + num(*s.pedestrian_gap) + " m ahead in the lane; stopping for them.";
        } else {
            action = hard ? A::BrakeHard : A::DecelerateGentle;
            why = "A pedestrian occupies the lane " + num(*s.pedestrian_gap) +
                  " m ahead; slowing preserves the safety margin.";
        }
    } else if (s.leader_gap &&
               (*s.leader_gap < eff.base.gap_acceptance_m ||
                (s.leader_speed < v - 1.0 && *s.leader_gap < brake_floor(v, s.leader_speed, zone_decel)) ||
                (s.leader_speed < 1.0 && *s.leader_gap < settle_band) ||
                (v > 0.5 && *s.leader_gap / v < eff.base.headway_threshold_s * (hard ? 2.0 : 1.0)))) {
        const bool physics_floor =
            s.leader_speed < v - 1.0 && *s.leader_gap < brake_floor(v, s.leader_speed, zone_decel);
        if (*s.leader_gap < eff.base.gap_acceptance_m) {
            action = v <= 0.5 ? A::StopAndWait : A::BrakeHard;
            why = v <= 0.5 ? "Holding behind the stopped vehicle ahead until the gap opens."
                           : "The gap to the leader has collapsed to " + num(*s.leader_gap) +
                                 " m; braking hard.";
        } else if (physics_floor) {
            action = A::BrakeHard;
            why = "Closing fast on slow traffic " + num(*s.leader_gap) + " m ahead; braking hard.";
        } else if (s.leader_speed < 1.0 && *s.leader_gap < settle_band) {
            // Queue tail: settle behind it instead of creep-and-brake cycles.
            action = v <= 0.5 ? A::StopAndWait : A::DecelerateGentle;
            why = "The vehicle ahead is stationary; settling in behind the queue.";
        } else if (hard && (s.lane_change_left_feasible || s.lane_change_right_feasible)) {
            action = s.lane_change_left_feasible ? A::ChangeLaneLeft : A::ChangeLaneRight;
            why = "The leader is slowing the pace and the adjacent lane is open; changing lanes keeps momentum.";
        } else if (v > 0.5 && *s.leader_gap / v < eff.base.headway_threshold_s) {
            action = A::DecelerateGentle;
            why = "The leader is " + num(*s.leader_gap) + " m ahead, below the " +
                  num(eff.base.headway_threshold_s) + " s headway threshold; easing off restores spacing.";
        } else {
            action = A::Maintain;
            why = "Pacing the vehicle ahead until the adjacent lane opens.";
        }
    } else if (bias < 0.35 && v > 0.45 * target && crossing_ped_ahead(s)) {
        action = A::DecelerateGentle;
        why = "A pedestrian is on the roadway ahead; shedding speed well in advance.";
    } else if (v > target + (hard ? std::max(1.0, 0.25 * target) : 0.3)) {
        action = A::DecelerateGentle;
        why = "Speed exceeds the target of " + num(target) + " m/s; easing off.";
    } else if (v < target - 0.3) {
        const double gentle_ss = dynamics.steady_state_speed(25.0);
        const bool need_hard = (hard && target - v > 2.0) ||
                               (target > gentle_ss - 0.2 && v > gentle_ss - 1.0);
        if (need_hard) {
            action = A::AccelerateHard;
            why = "The road ahead is clear and speed is well below the target of " + num(target) +
                  " m/s; accelerating firmly.";
        } else if (s.leader_gap && s.leader_speed > v + 0.5) {
            action = A::AccelerateGentle;
            why = s.lane_change_left_feasible || s.lane_change_right_feasible
                      ? "The vehicle ahead is faster; matching its speed by gentle acceleration."
                      : "Given the rather faster speed of the vehicle ahead and inability to change "
                        "lanes, match the speed by gentle acceleration.";
        } else {
            action = A::AccelerateGentle;
            why = "The road ahead is clear and speed is below the target of " + num(target) +
                  " m/s; accelerating gently.";
        }
    } else if (s.route_turn_hint && s.distance_to_intersection < 15.0 &&
               s.signal != agent::SignalPhase::Red) {
        if (*s.route_turn_hint == sim::TurnKind::Left) {
            action = A::TurnLeft;
            why = "The planned route turns left at the junction ahead.";
        } else if (*s.route_turn_hint == sim::TurnKind::Right) {
            action = A::TurnRight;
            why = "The planned route turns right at the junction ahead.";
        } else {
            action = A::ProceedStraight;
            why = "The planned route continues straight through the junction.";
        }
    } else {
        action = A::Maintain;
        why = "Conditions are stable; holding the current speed.";
    }

    std::ostringstream os;
    os << "Situation: " << situation_text(s) << "\n"
       << "Reasoning: " << why << "\n"
       << "Action: " << agent::action_token(action) << "\n";
    ReasoningResponse resp;
    resp.text = os.str();
    resp.token_count = estimate_token_count(resp.text);
    return resp;
}

ReasoningResponse RuleBackend::send_driver(const PromptBundle&, const DriverRuleContext& context) {
    return rule_send(context, profile_, dynamics_);
}

ReasoningResponse RuleBackend::send_coach(const PromptBundle&, const CoachRuleContext& context) {
    static const std::vector<std::string> kNoGuidelines;
    const std::vector<std::string>& guidelines =
        context.guideline_texts != nullptr ? *context.guideline_texts : kNoGuidelines;
    const auto hit = first_violation(*context.memory, context.demo_style, guidelines);
    ReasoningResponse resp;
    std::ostringstream os;
    if (hit) {
        os << "Verdict: Bad\nReason: " << hit->reason << "\n";
    } else {
        os << "Verdict: Good\nReason: The recent decisions align with driving sense, the guidelines, "
              "and the demonstrated style.\n";
    }
    resp.text = os.str();
    resp.token_count = estimate_token_count(resp.text);
    return resp;
}

}  // namespace coachsim::reasoning
