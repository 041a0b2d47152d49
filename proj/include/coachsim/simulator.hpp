#pragma once

#include "coachsim/sim_types.hpp"

namespace coachsim::sim {

/// Builds the world: road network, ego at its fixed start, NPCs spawned
/// collision-free with sampled destinations. Identical config + seed gives
/// an identical world. Throws ScenarioError when spawning is impossible.
WorldState load_scenario(const ScenarioConfig& config);

/// Advances every entity by one tick: NPC policies run in id order, then
/// dynamics, lane transitions, arrivals/destination resampling, collision
/// detection and separation. The ego follows `ego_control`.
void step(WorldState& world, const ControlInput& ego_control, double dt);

/// Longitudinal speed update and travel distance for one tick.
struct LongitudinalUpdate {
    double new_speed = 0.0;
    double advance = 0.0;  // mean-speed * dt
};
LongitudinalUpdate advance_speed(double speed, const ControlInput& control, double dt,
                                 const DynamicsParams& params, double lane_speed_cap);

/// Spec-shaped wrapper: advances the entity along its heading.
EntityState apply_longitudinal_dynamics(const EntityState& state, const ControlInput& control,
                                        double dt, const DynamicsParams& params,
                                        double lane_speed_cap);

/// All overlapping oriented-box pairs this tick, each pair reported once
/// with entity_a < entity_b. Pure.
std::vector<CollisionEvent> detect_collisions(const WorldState& world);

/// Car-following control toward desired speed with signal, pedestrian,
/// turn-yield and leader constraints; stochastic lane changes and
/// red-light running per the aggression knobs. Deterministic given rng.
/// Records the once-per-approach red-light decision on the entity.
ControlInput npc_vehicle_policy(const WorldState& world, Entity& entity,
                                const AggressionParams& aggression, Rng& rng);

struct WalkCommand {
    double speed_mps = 0.0;
    int next_edge = -1;       // chosen at a node, -1 to continue
    bool start_jaywalk = false;
    bool wait = false;        // hold at a crossing waiting for red
};

WalkCommand npc_pedestrian_policy(const WorldState& world, const Entity& entity,
                                  const AggressionParams& aggression, Rng& rng);

/// Scenario-crafting helpers: bind an entity to a lane position or a
/// pedestrian edge and refresh its pose.
void place_on_lane(WorldState& world, Entity& entity, int lane_id, double s);
void place_on_ped_edge(WorldState& world, Entity& entity, int edge_id, double s, int dir);

/// Forward hazards along an entity's travel direction, used by both the
/// NPC policy and ego perception.
struct ForwardHazards {
    std::optional<double> leader_gap;    // bumper-to-bumper, m
    double leader_speed = 0.0;
    std::optional<double> pedestrian_gap;
    std::optional<double> red_signal_gap;  // to the stop line, m
};
ForwardHazards forward_hazards(const WorldState& world, const Entity& entity,
                               double lookahead_m = 60.0);

}  // namespace coachsim::sim
