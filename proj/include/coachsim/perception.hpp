#pragma once

#include <optional>
#include <vector>

#include "coachsim/simulator.hpp"

namespace coachsim::agent {

enum class SignalPhase { None, Green, Red };

enum class LaneRelation {
    SameLaneAhead,
    SameLaneBehind,
    LeftLane,
    RightLane,
    Oncoming,
    Crossing,
    Other,
};

struct NearbyEntity {
    int id = -1;
    sim::EntityKind kind = sim::EntityKind::NpcVehicle;
    Vec2 relative_position;  // ego frame: x forward, y left
    double distance = 0.0;
    double relative_speed = 0.0;  // other minus ego
    LaneRelation relation = LaneRelation::Other;
};

struct PerceptionSnapshot {
    long tick = 0;
    double ego_speed = 0.0;
    double ego_heading = 0.0;
    double speed_limit = 0.0;
    SignalPhase signal = SignalPhase::None;
    double distance_to_intersection = 0.0;
    std::vector<NearbyEntity> nearby;  // distance ascending
    bool lane_change_left_feasible = false;
    bool lane_change_right_feasible = false;

    // Derived hazards shared with the rule backend and prompt rendering.
    std::optional<double> leader_gap;
    double leader_speed = 0.0;
    std::optional<double> pedestrian_gap;
    std::optional<sim::TurnKind> route_turn_hint;
};

struct AgentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Snapshot of the world around the ego. Entities beyond `radius` are
/// dropped; the rest come back sorted nearest first. Throws AgentError
/// when the ego id is missing.
PerceptionSnapshot perceive(const sim::WorldState& world, int ego_id, double radius_m = 50.0);

}  // namespace coachsim::agent
