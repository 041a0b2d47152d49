#include "coachsim/perception.hpp"

#include <algorithm>
#include <cmath>

namespace coachsim::agent {

using sim::Entity;
using sim::EntityKind;
using sim::Lane;
using sim::PedMode;
using sim::WorldState;

namespace {

LaneRelation classify_relation(const WorldState& world, const Entity& ego, const Entity& other) {
    if (other.state.kind == EntityKind::Pedestrian) {
        const bool on_crossing = other.ped.edge >= 0 &&
                                 world.net.ped_edges[static_cast<std::size_t>(other.ped.edge)].is_crossing &&
                                 other.ped.mode == PedMode::Walking;
        if (other.ped.mode == PedMode::Jaywalking || on_crossing) return LaneRelation::Crossing;
        return LaneRelation::Other;
    }
    const Lane& ego_lane = world.net.lane(ego.state.lane_id);
    if (other.state.lane_id == ego.state.lane_id) {
        return other.nav.s >= ego.nav.s ? LaneRelation::SameLaneAhead : LaneRelation::SameLaneBehind;
    }
    if (other.state.lane_id == ego_lane.left_lane) return LaneRelation::LeftLane;
    if (other.state.lane_id == ego_lane.right_lane) return LaneRelation::RightLane;
    const Lane& other_lane = world.net.lane(other.state.lane_id);
    if (!ego_lane.is_connector && !other_lane.is_connector && other_lane.road_id == ego_lane.road_id) {
        const double dh = std::cos(other.state.heading - ego.state.heading);
        if (dh < -0.5) return LaneRelation::Oncoming;
    }
    return LaneRelation::Other;
}

bool adjacent_lane_clear(const WorldState& world, const Entity& ego, int lane_id) {
    if (lane_id < 0) return false;
    auto it = world.lane_occupancy.find(lane_id);
    if (it == world.lane_occupancy.end()) return true;
    for (const auto& [s, idx] : it->second) {
        if (world.entities[static_cast<std::size_t>(idx)].state.id == ego.state.id) continue;
        if (std::fabs(s - ego.nav.s) < 8.0) return false;
    }
    return true;
}

}  // namespace

PerceptionSnapshot perceive(const sim::WorldState& world, int ego_id, double radius_m) {
    const Entity* ego = nullptr;
    for (const Entity& e : world.entities) {
        if (e.state.id == ego_id) {
            ego = &e;
            break;
        }
    }
    if (ego == nullptr) throw AgentError("ego entity " + std::to_string(ego_id) + " not found");
    world.refresh_caches();

    PerceptionSnapshot snap;
    snap.tick = world.tick;
    snap.ego_speed = ego->state.speed;
    snap.ego_heading = ego->state.heading;

    const Lane& lane = world.net.lane(ego->state.lane_id);
    snap.speed_limit = lane.speed_limit;
    snap.distance_to_intersection = lane.is_connector ? 0.0 : std::max(0.0, lane.length - ego->nav.s);
    if (!lane.is_connector && lane.signal_group >= 0 && lane.end_intersection >= 0) {
        const auto& in = world.net.intersections[static_cast<std::size_t>(lane.end_intersection)];
        snap.signal = world.net.signal_green(in.signal_id, lane.signal_group, world.sim_time)
                          ? SignalPhase::Green
                          : SignalPhase::Red;
    }

    const Vec2 u{std::cos(ego->state.heading), std::sin(ego->state.heading)};
    const Vec2 l{-u.y, u.x};
    for (const Entity& other : world.entities) {
        if (other.state.id == ego_id) continue;
        const Vec2 d = other.state.position - ego->state.position;
        const double dist = d.norm();
        if (dist > radius_m) continue;
        NearbyEntity ne;
        ne.id = other.state.id;
        ne.kind = other.state.kind;
        ne.relative_position = {d.dot(u), d.dot(l)};
        ne.distance = dist;
        ne.relative_speed = other.state.speed - ego->state.speed;
        ne.relation = classify_relation(world, *ego, other);
        snap.nearby.push_back(ne);
    }
    std::sort(snap.nearby.begin(), snap.nearby.end(), [](const NearbyEntity& a, const NearbyEntity& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
    });

    snap.lane_change_left_feasible = lane.left_lane >= 0 && adjacent_lane_clear(world, *ego, lane.left_lane);
    snap.lane_change_right_feasible = lane.right_lane >= 0 && adjacent_lane_clear(world, *ego, lane.right_lane);

    const sim::ForwardHazards hz = sim::forward_hazards(world, *ego);
    snap.leader_gap = hz.leader_gap;
    snap.leader_speed = hz.leader_speed;
    snap.pedestrian_gap = hz.pedestrian_gap;

    if (ego->nav.route.size() >= 2 && ego->nav.route[0] == ego->state.lane_id) {
        const Lane& next = world.net.lane(ego->nav.route[1]);
        if (next.is_connector) snap.route_turn_hint = next.turn;
    }
    return snap;
}

}  // namespace coachsim::agent
