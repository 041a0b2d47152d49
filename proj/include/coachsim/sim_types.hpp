#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coachsim/geometry.hpp"
#include "coachsim/rng.hpp"
#include "coachsim/road_network.hpp"

namespace coachsim::sim {

enum class EntityKind { EgoVehicle, NpcVehicle, Pedestrian };

enum class LaneCommand { Keep, ShiftLeft, ShiftRight };
enum class TurnCommand { None, Left, Right };

struct ControlInput {
    double throttle_pct = 0.0;  // [0, 100]
    double brake_pct = 0.0;     // [0, 100]
    LaneCommand lane_command = LaneCommand::Keep;
    TurnCommand turn_command = TurnCommand::None;

    /// Clamps to bounds and applies brake-wins arbitration.
    ControlInput arbitrated() const;
};

struct EntityState {
    int id = -1;
    EntityKind kind = EntityKind::NpcVehicle;
    Vec2 position;
    double heading = 0.0;  // rad
    double speed = 0.0;    // m/s, >= 0
    int lane_id = -1;      // vehicles only
    double length = 4.5;   // bounding box, m
    double width = 2.0;
    Vec2 destination;

    Obb box() const { return Obb{position, heading, length, width}; }
};

/// Vehicle navigation state: arclength progress, lane-change blending,
/// route to destination, per-approach red-light decision.
struct VehicleNav {
    double s = 0.0;
    int blend_from_lane = -1;
    double blend_elapsed = 0.0;
    std::vector<int> route;  // lane ids, front == current lane
    int dest_lane = -1;
    double dest_s = 0.0;
    int red_decision_intersection = -1;
    bool runs_red = false;
};

enum class PedMode { Walking, Waiting, Jaywalking };

struct PedNav {
    int edge = -1;
    double s = 0.0;
    int dir = 1;  // +1 walks node_a -> node_b
    PedMode mode = PedMode::Walking;
    double walk_speed = 1.4;
    Vec2 cross_from;
    Vec2 cross_to;
    double cross_progress = 0.0;  // [0, 1]
    int cross_land_edge = -1;     // sidewalk reached when the crossing completes
    int blocked_ticks = 0;        // consecutive ticks a vehicle blocked the path
    Vec2 push_offset;             // collision displacement, decays
};

struct Entity {
    EntityState state;
    VehicleNav nav;
    PedNav ped;
};

/// First-order longitudinal model constants:
///   v' = clamp(v + (k_t * throttle - k_b * brake - drag_c * v) * dt,
///              0, lane_cap * cap_tolerance)
/// Defaults calibrated so 23.09% throttle settles at ~6.40 m/s.
struct DynamicsParams {
    double k_t = 0.166308;
    double k_b = 0.08;
    double drag_c = 0.6;
    double cap_tolerance = 1.5;

    double steady_state_speed(double throttle_pct) const { return k_t * throttle_pct / drag_c; }
    double hold_throttle(double speed) const;
};

struct AggressionParams {
    double lane_change_prob = 0.01;     // per second
    double red_light_run_prob = 0.05;   // per approach
    double jaywalk_prob = 0.001;        // per second
    double desired_speed_multiplier = 1.0;
};

struct ScenarioConfig {
    MapSpec map;
    std::string map_path;  // optional; overrides `map` when non-empty
    int npc_vehicle_count = 60;
    int npc_pedestrian_count = 60;
    AggressionParams aggression;
    int ego_start_lane = 0;
    double ego_start_s = 5.0;
    std::uint64_t seed = 1;
    double dt = 0.1;
    double max_duration_s = 400.0;
    DynamicsParams dynamics;
    double collision_cooldown_s = 4.0;

    void validate() const;  // throws std::invalid_argument
};

struct CollisionEvent {
    long tick = 0;
    int entity_a = -1;  // entity_a < entity_b
    int entity_b = -1;
};

struct WorldState {
    long tick = 0;
    double sim_time = 0.0;
    RoadNetwork net;
    std::vector<Entity> entities;  // index 0 is the ego vehicle
    Rng rng;
    std::vector<CollisionEvent> collisions;
    double ego_distance = 0.0;
    ScenarioConfig config;

    // Transient per-tick lookup caches, rebuilt on demand.
    mutable std::map<int, std::vector<std::pair<double, int>>> lane_occupancy;
    mutable std::vector<int> roadway_pedestrians;
    mutable long cache_tick = -1;

    const Entity& ego() const { return entities.front(); }
    Entity& ego() { return entities.front(); }
    void refresh_caches() const;

    /// Canonical JSON snapshot; identical states serialize identically.
    std::string serialize() const;
    static WorldState deserialize(const std::string& text);
};

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace coachsim::sim
