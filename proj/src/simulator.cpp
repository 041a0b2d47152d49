#include "coachsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace coachsim::sim {

namespace {

constexpr double kLaneChangeBlendS = 2.0;
constexpr double kMinGapM = 2.5;
constexpr double kStopMarginM = 3.0;
constexpr double kVehicleLen = 4.5;
constexpr double kVehicleWidth = 2.0;
constexpr double kPedSize = 0.5;

Vec2 heading_unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

double smoothstep01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

bool is_vehicle(const Entity& e) { return e.state.kind != EntityKind::Pedestrian; }

/// Stopping speed profile: fastest speed from which a comfortable
/// deceleration still stops within `gap`.
double stop_profile(double gap, double a_comf) {
    return gap <= 0.0 ? 0.0 : std::sqrt(2.0 * a_comf * gap);
}

}  // namespace

ControlInput ControlInput::arbitrated() const {
    ControlInput out = *this;
    out.throttle_pct = std::clamp(out.throttle_pct, 0.0, 100.0);
    out.brake_pct = std::clamp(out.brake_pct, 0.0, 100.0);
    if (out.brake_pct > 0.0) out.throttle_pct = 0.0;  // brake wins
    return out;
}

double DynamicsParams::hold_throttle(double speed) const {
    if (k_t <= 0.0) return 0.0;
    return std::clamp(drag_c * speed / k_t, 0.0, 100.0);
}

void ScenarioConfig::validate() const {
    if (npc_vehicle_count < 0 || npc_pedestrian_count < 0) throw std::invalid_argument("NPC counts must be >= 0");
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(aggression.lane_change_prob) || !prob_ok(aggression.red_light_run_prob) || !prob_ok(aggression.jaywalk_prob)) {
        throw std::invalid_argument("aggression probabilities must lie in [0, 1]");
    }
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    if (max_duration_s <= 0.0) throw std::invalid_argument("max duration must be > 0");
    if (dynamics.k_t <= 0.0 || dynamics.k_b <= 0.0 || dynamics.drag_c < 0.0 || dynamics.cap_tolerance <= 0.0) {
        throw std::invalid_argument("dynamics constants must be positive");
    }
}

void WorldState::refresh_caches() const {
    if (cache_tick == tick) return;
    lane_occupancy.clear();
    roadway_pedestrians.clear();
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const Entity& e = entities[i];
        if (is_vehicle(e)) {
            lane_occupancy[e.state.lane_id].emplace_back(e.nav.s, static_cast<int>(i));
            if (e.nav.blend_from_lane >= 0) {
                lane_occupancy[e.nav.blend_from_lane].emplace_back(e.nav.s, static_cast<int>(i));
            }
        } else {
            const bool on_crossing = e.ped.edge >= 0 &&
                                     net.ped_edges[static_cast<std::size_t>(e.ped.edge)].is_crossing &&
                                     e.ped.mode == PedMode::Walking;
            if (e.ped.mode == PedMode::Jaywalking || on_crossing) {
                roadway_pedestrians.push_back(static_cast<int>(i));
            }
        }
    }
    for (auto& [lane, vec] : lane_occupancy) std::sort(vec.begin(), vec.end());
    cache_tick = tick;
}

LongitudinalUpdate advance_speed(double speed, const ControlInput& control, double dt,
                                 const DynamicsParams& params, double lane_speed_cap) {
    const ControlInput c = control.arbitrated();
    const double accel = params.k_t * c.throttle_pct - params.k_b * c.brake_pct - params.drag_c * speed;
    double v = speed + accel * dt;
    v = std::clamp(v, 0.0, lane_speed_cap * params.cap_tolerance);
    return {v, 0.5 * (speed + v) * dt};
}

EntityState apply_longitudinal_dynamics(const EntityState& state, const ControlInput& control,
                                        double dt, const DynamicsParams& params,
                                        double lane_speed_cap) {
    const LongitudinalUpdate upd = advance_speed(state.speed, control, dt, params, lane_speed_cap);
    EntityState out = state;
    out.speed = upd.new_speed;
    out.position = state.position + heading_unit(state.heading) * upd.advance;
    return out;
}

ForwardHazards forward_hazards(const WorldState& world, const Entity& entity, double lookahead_m) {
    world.refresh_caches();
    ForwardHazards hz;
    const EntityState& st = entity.state;
    const Lane& lane = world.net.lane(st.lane_id);

    auto consider_leader = [&](double gap, double speed) {
        if (gap < 0.0) gap = 0.0;
        if (!hz.leader_gap || gap < *hz.leader_gap) {
            hz.leader_gap = gap;
            hz.leader_speed = speed;
        }
    };

    auto scan_lane = [&](int lane_id, double s_offset) {
        auto it = world.lane_occupancy.find(lane_id);
        if (it == world.lane_occupancy.end()) return;
        for (const auto& [s_other, idx] : it->second) {
            const Entity& other = world.entities[static_cast<std::size_t>(idx)];
            if (other.state.id == st.id) continue;
            const double ahead = (s_other + s_offset) - entity.nav.s;
            if (ahead <= 0.0 || ahead > lookahead_m) continue;
            consider_leader(ahead - 0.5 * (st.length + other.state.length), other.state.speed);
        }
    };
    scan_lane(st.lane_id, 0.0);
    if (entity.nav.blend_from_lane >= 0) scan_lane(entity.nav.blend_from_lane, 0.0);
    if (entity.nav.route.size() >= 2 && entity.nav.route[0] == st.lane_id) {
        scan_lane(entity.nav.route[1], lane.length);
    }

    // Pedestrians currently on the roadway, projected onto the travel ray.
    // A nearly stopped vehicle only yields to pedestrians in its swept path;
    // the wide cone is for traffic at speed.
    const Vec2 u = heading_unit(st.heading);
    const double ped_lat_limit = st.speed <= 1.0 ? 1.4 : 2.3;
    for (int idx : world.roadway_pedestrians) {
        const Entity& ped = world.entities[static_cast<std::size_t>(idx)];
        const Vec2 d = ped.state.position - st.position;
        const double forward = d.dot(u);
        const double lateral = std::fabs(-d.x * u.y + d.y * u.x);
        if (forward <= 0.0 || forward > lookahead_m || lateral > ped_lat_limit) continue;
        const double gap = forward - 0.5 * st.length - 0.5 * kPedSize;
        if (!hz.pedestrian_gap || gap < *hz.pedestrian_gap) hz.pedestrian_gap = std::max(0.0, gap);
    }

    // Near and inside intersections the lane graph alone misses crossing
    // traffic; a forward cone catches whatever is physically in the way.
    const bool near_box = lane.is_connector || lane.length - entity.nav.s < 18.0;
    if (near_box) {
        for (const Entity& other : world.entities) {
            if (other.state.id == st.id || other.state.kind == EntityKind::Pedestrian) continue;
            if (other.state.lane_id == st.lane_id) continue;  // same-lane scan covers these
            const Vec2 d = other.state.position - st.position;
            const double forward = d.dot(u);
            const double lateral = std::fabs(-d.x * u.y + d.y * u.x);
            if (forward <= 0.0 || forward > 25.0 || lateral > 2.2) continue;
            const double cross = std::cos(other.state.heading - st.heading);
            // Box priority: against a stalled crossing vehicle, whoever is
            // further through their connector proceeds (ties to lower id),
            // so nose-to-nose standoffs always resolve.
            if (lane.is_connector && other.state.speed < 0.5 && std::fabs(cross) < 0.7) {
                const Lane& other_lane = world.net.lane(other.state.lane_id);
                if (other_lane.is_connector && other_lane.length > 0.0 && lane.length > 0.0) {
                    const double my_frac = entity.nav.s / lane.length;
                    const double other_frac = other.nav.s / other_lane.length;
                    if (my_frac > other_frac + 0.05 ||
                        (std::fabs(my_frac - other_frac) <= 0.05 && st.id < other.state.id)) {
                        continue;
                    }
                }
            }
            const double along_speed = other.state.speed * std::max(0.0, cross);
            consider_leader(forward - 0.5 * (st.length + other.state.length), along_speed);
        }
    }

    if (!lane.is_connector && lane.signal_group >= 0 && lane.end_intersection >= 0) {
        const Intersection& in = world.net.intersections[static_cast<std::size_t>(lane.end_intersection)];
        if (!world.net.signal_green(in.signal_id, lane.signal_group, world.sim_time)) {
            hz.red_signal_gap = std::max(0.0, lane.length - entity.nav.s);
        }
    }
    return hz;
}

ControlInput npc_vehicle_policy(const WorldState& world, Entity& entity,
                                const AggressionParams& aggression, Rng& rng) {
    world.refresh_caches();
    const EntityState& st = entity.state;
    VehicleNav& nav = entity.nav;
    const Lane& lane = world.net.lane(st.lane_id);
    const DynamicsParams& dyn = world.config.dynamics;
    const double mult = std::max(0.1, aggression.desired_speed_multiplier);
    const double a_comf = 2.0 * mult;
    const double headway_s = 1.5 / mult;
    const double v = st.speed;

    const ForwardHazards hz = forward_hazards(world, entity);

    double v_target = lane.speed_limit * mult;

    // Slow into an upcoming turn connector.
    if (!lane.is_connector && nav.route.size() >= 2 && nav.route[0] == st.lane_id) {
        const Lane& next = world.net.lane(nav.route[1]);
        if (next.is_connector && next.turn != TurnKind::Straight) {
            const double dist = std::max(0.0, lane.length - nav.s);
            const double entry = next.speed_limit * mult;
            v_target = std::min(v_target, std::sqrt(entry * entry + 2.0 * a_comf * dist));
        }
    }

    if (hz.leader_gap) {
        const double desired_gap = kMinGapM + v * headway_s;
        v_target = std::min(v_target, std::max(0.0, hz.leader_speed + (*hz.leader_gap - desired_gap) / 1.2));
    }
    if (hz.pedestrian_gap) {
        const double margin = 3.0 / mult;
        v_target = std::min(v_target, stop_profile(*hz.pedestrian_gap - margin, a_comf));
    }

    if (hz.red_signal_gap) {
        // One run/stop decision per red approach.
        bool runs = nav.runs_red && nav.red_decision_intersection == lane.end_intersection;
        if (nav.red_decision_intersection != lane.end_intersection && *hz.red_signal_gap < 30.0) {
            nav.red_decision_intersection = lane.end_intersection;
            nav.runs_red = rng.bernoulli(aggression.red_light_run_prob);
            runs = nav.runs_red;
        }
        if (!runs) {
            v_target = std::min(v_target, stop_profile(*hz.red_signal_gap - kStopMarginM, a_comf));
        }
    }

    // Yield before a left turn while oncoming traffic approaches the box.
    if (!lane.is_connector && nav.route.size() >= 2 && nav.route[0] == st.lane_id &&
        lane.end_intersection >= 0) {
        const Lane& next = world.net.lane(nav.route[1]);
        const double dist_to_line = lane.length - nav.s;
        if (next.is_connector && next.turn == TurnKind::Left && dist_to_line < 15.0) {
            const double horizon = 20.0 / mult;
            const Vec2 my_u = heading_unit(st.heading);
            const Intersection& in = world.net.intersections[static_cast<std::size_t>(lane.end_intersection)];
            bool oncoming = false;
            for (int lid : in.incoming_lanes) {
                const Lane& other = world.net.lane(lid);
                if (other.signal_group != lane.signal_group) continue;
                const Vec2 ou = heading_unit(other.heading_at(0.0));
                if (ou.dot(my_u) > -0.5) continue;
                auto it = world.lane_occupancy.find(lid);
                if (it == world.lane_occupancy.end()) continue;
                for (const auto& [s_other, idx] : it->second) {
                    const Entity& oe = world.entities[static_cast<std::size_t>(idx)];
                    if (oe.state.speed > 0.5 && other.length - s_other < horizon) {
                        oncoming = true;
                        break;
                    }
                }
                if (oncoming) break;
            }
            if (oncoming) v_target = std::min(v_target, stop_profile(dist_to_line - 1.0, a_comf));
        }
    }

    ControlInput ci;

    // Stochastic lane change; abrupt, but not into an occupied slot.
    if (nav.blend_from_lane < 0 && !lane.is_connector &&
        (lane.left_lane >= 0 || lane.right_lane >= 0) &&
        rng.bernoulli(aggression.lane_change_prob * world.config.dt)) {
        int target;
        if (lane.left_lane >= 0 && lane.right_lane >= 0) {
            target = rng.bernoulli(0.5) ? lane.left_lane : lane.right_lane;
        } else {
            target = lane.left_lane >= 0 ? lane.left_lane : lane.right_lane;
        }
        const double clearance = 6.0 / mult;
        bool open = true;
        auto it = world.lane_occupancy.find(target);
        if (it != world.lane_occupancy.end()) {
            for (const auto& [s_other, idx] : it->second) {
                if (world.entities[static_cast<std::size_t>(idx)].state.id != st.id &&
                    std::fabs(s_other - nav.s) < clearance) {
                    open = false;
                    break;
                }
            }
        }
        if (open) {
            ci.lane_command = target == lane.left_lane ? LaneCommand::ShiftLeft : LaneCommand::ShiftRight;
        }
    }

    const bool emergency = (hz.leader_gap && *hz.leader_gap < 1.5 && v > 0.5) ||
                           (hz.pedestrian_gap && *hz.pedestrian_gap < 2.0 && v > 0.5);
    const double dv = v_target - v;
    if (emergency) {
        ci.brake_pct = 100.0;
    } else if (dv >= -0.15) {
        ci.throttle_pct = std::clamp(dyn.hold_throttle(v_target) + 20.0 * dv, 0.0, 100.0);
    } else {
        ci.brake_pct = std::clamp(-dv * 25.0, 0.0, 100.0);
    }
    return ci;
}

WalkCommand npc_pedestrian_policy(const WorldState& world, const Entity& entity,
                                  const AggressionParams& aggression, Rng& rng) {
    const PedNav& ped = entity.ped;
    WalkCommand cmd;
    cmd.speed_mps = ped.walk_speed;
    if (ped.edge < 0) return cmd;
    const PedEdge& edge = world.net.ped_edges[static_cast<std::size_t>(ped.edge)];

    auto crossing_allowed = [&](const PedEdge& e) {
        return !world.net.signal_green(e.cross_signal_id, e.cross_signal_group, world.sim_time);
    };

    if (ped.mode == PedMode::Jaywalking) return cmd;
    if (ped.mode == PedMode::Waiting) {
        cmd.wait = !crossing_allowed(edge);
        return cmd;
    }

    const bool at_end = (ped.dir > 0 && ped.s >= edge.length - 1e-9) ||
                        (ped.dir < 0 && ped.s <= 1e-9);
    if (at_end) {
        const int node = ped.dir > 0 ? edge.node_b : edge.node_a;
        const auto& incident = world.net.ped_adjacency[static_cast<std::size_t>(node)];
        std::vector<int> candidates;
        for (int eid : incident) {
            if (eid != ped.edge) candidates.push_back(eid);
        }
        if (candidates.empty()) candidates.push_back(ped.edge);
        cmd.next_edge = candidates[static_cast<std::size_t>(rng.next_index(candidates.size()))];
        return cmd;
    }

    // Mid-block jaywalk across the adjacent road.
    if (!edge.is_crossing && edge.road_id >= 0 && ped.s > 1.0 && ped.s < edge.length - 1.0 &&
        rng.bernoulli(aggression.jaywalk_prob * world.config.dt)) {
        cmd.start_jaywalk = true;
    }
    return cmd;
}

namespace {

void sample_vehicle_destination(WorldState& world, Entity& e) {
    std::vector<int> approach;
    for (const Lane& ln : world.net.lanes) {
        if (!ln.is_connector && ln.id != e.state.lane_id) approach.push_back(ln.id);
    }
    const Lane& dest = world.net.lane(approach[static_cast<std::size_t>(world.rng.next_index(approach.size()))]);
    const double s = world.rng.uniform(0.15, 0.85) * dest.length;
    e.nav.dest_lane = dest.id;
    e.nav.dest_s = s;
    e.state.destination = dest.point_at(s);
}

void recompute_route(WorldState& world, Entity& e) {
    e.nav.route = world.net.route(e.state.lane_id, e.nav.dest_lane);
}

int choose_successor(const WorldState& world, const Entity& e, TurnCommand turn) {
    const Lane& lane = world.net.lane(e.state.lane_id);
    if (lane.successors.empty()) return -1;
    if (lane.is_connector) return lane.successors.front();
    if (turn != TurnCommand::None) {
        const TurnKind want = turn == TurnCommand::Left ? TurnKind::Left : TurnKind::Right;
        for (int sid : lane.successors) {
            if (world.net.lane(sid).turn == want) return sid;
        }
    }
    if (e.nav.route.size() >= 2 && e.nav.route[0] == lane.id) {
        const int next = e.nav.route[1];
        for (int sid : lane.successors) {
            if (sid == next) return sid;
        }
    }
    for (int sid : lane.successors) {
        if (world.net.lane(sid).turn == TurnKind::Straight) return sid;
    }
    return lane.successors.front();
}

void place_vehicle(Entity& e, const RoadNetwork& net) {
    const Lane& lane = net.lane(e.state.lane_id);
    Vec2 pos = lane.point_at(e.nav.s);
    double heading = lane.heading_at(e.nav.s);
    if (e.nav.blend_from_lane >= 0) {
        const Lane& from = net.lane(e.nav.blend_from_lane);
        const double w = smoothstep01(e.nav.blend_elapsed / kLaneChangeBlendS);
        const Vec2 a = from.point_at(std::min(e.nav.s, from.length));
        pos = a + (pos - a) * w;
    }
    e.state.position = pos;
    e.state.heading = heading;
}

void place_pedestrian(Entity& e, const RoadNetwork& net) {
    const PedNav& ped = e.ped;
    Vec2 pos;
    if (ped.mode == PedMode::Jaywalking) {
        pos = ped.cross_from + (ped.cross_to - ped.cross_from) * ped.cross_progress;
        const Vec2 d = ped.cross_to - ped.cross_from;
        if (d.norm() > 1e-9) e.state.heading = std::atan2(d.y, d.x);
    } else {
        const PedEdge& edge = net.ped_edges[static_cast<std::size_t>(ped.edge)];
        pos = edge.point_at(ped.s, net.ped_nodes);
        const Vec2& a = net.ped_nodes[static_cast<std::size_t>(edge.node_a)].pos;
        const Vec2& b = net.ped_nodes[static_cast<std::size_t>(edge.node_b)].pos;
        const Vec2 d = (b - a) * static_cast<double>(ped.dir);
        if (d.norm() > 1e-9 && ped.mode == PedMode::Walking) e.state.heading = std::atan2(d.y, d.x);
    }
    e.state.position = pos + ped.push_offset;
}

void move_vehicle(WorldState& world, Entity& e, const ControlInput& control, double dt) {
    const bool is_ego = e.state.kind == EntityKind::EgoVehicle;
    VehicleNav& nav = e.nav;
    const Lane* lane = &world.net.lane(e.state.lane_id);

    // Lane change start: adjacent lane must exist; one blend at a time.
    if (control.lane_command != LaneCommand::Keep && nav.blend_from_lane < 0 && !lane->is_connector) {
        const int target = control.lane_command == LaneCommand::ShiftLeft ? lane->left_lane : lane->right_lane;
        if (target >= 0) {
            nav.blend_from_lane = e.state.lane_id;
            nav.blend_elapsed = 0.0;
            e.state.lane_id = target;
            lane = &world.net.lane(target);
            recompute_route(world, e);
        }
    }

    const LongitudinalUpdate upd = advance_speed(e.state.speed, control, dt, world.config.dynamics, lane->speed_limit);
    e.state.speed = upd.new_speed;
    nav.s += upd.advance;
    if (is_ego) world.ego_distance += upd.advance;

    if (nav.blend_from_lane >= 0) {
        nav.blend_elapsed += dt;
        if (nav.blend_elapsed >= kLaneChangeBlendS) {
            nav.blend_from_lane = -1;
        } else {
            // Bail out of the change while the target slot collapses.
            auto it = world.lane_occupancy.find(e.state.lane_id);
            if (it != world.lane_occupancy.end()) {
                for (const auto& [s_other, idx] : it->second) {
                    const Entity& other = world.entities[static_cast<std::size_t>(idx)];
                    if (other.state.id != e.state.id && std::fabs(s_other - nav.s) < 3.5) {
                        e.state.lane_id = nav.blend_from_lane;
                        nav.blend_from_lane = -1;
                        nav.blend_elapsed = 0.0;
                        recompute_route(world, e);
                        break;
                    }
                }
            }
        }
    }

    int guard = 0;
    while (nav.s > lane->length && guard++ < 4) {
        // NPCs that decided to stop hold at a red stop line.
        if (!is_ego && !lane->is_connector && lane->signal_group >= 0 && lane->end_intersection >= 0) {
            const Intersection& in = world.net.intersections[static_cast<std::size_t>(lane->end_intersection)];
            const bool green = world.net.signal_green(in.signal_id, lane->signal_group, world.sim_time);
            const bool runs = nav.runs_red && nav.red_decision_intersection == lane->end_intersection;
            if (!green && !runs) {
                nav.s = lane->length;
                e.state.speed = 0.0;
                break;
            }
        }
        const int next = choose_successor(world, e, control.turn_command);
        if (next < 0) {
            nav.s = lane->length;
            e.state.speed = 0.0;
            break;
        }
        // Do-not-block-the-box: hold at the line while the exit is choked.
        if (!lane->is_connector) {
            const Lane& conn = world.net.lane(next);
            if (conn.is_connector && !conn.successors.empty()) {
                const Lane& out = world.net.lane(conn.successors.front());
                bool blocked = false;
                auto it = world.lane_occupancy.find(out.id);
                if (it != world.lane_occupancy.end()) {
                    for (const auto& [s_other, idx] : it->second) {
                        const Entity& other = world.entities[static_cast<std::size_t>(idx)];
                        if (other.state.id != e.state.id && other.state.speed < 0.5 &&
                            s_other < e.state.length + other.state.length + 3.0) {
                            blocked = true;
                            break;
                        }
                    }
                }
                if (blocked) {
                    nav.s = lane->length;
                    e.state.speed = 0.0;
                    break;
                }
            }
        }
        nav.blend_from_lane = -1;  // finish any blend at the boundary
        nav.s -= lane->length;
        e.state.lane_id = next;
        lane = &world.net.lane(next);
        if (!nav.route.empty() && nav.route.size() >= 2 && nav.route[1] == next) {
            nav.route.erase(nav.route.begin());
        } else {
            recompute_route(world, e);
        }
    }

    // Arrival: resample the destination and reroute.
    const bool arrived = (e.state.lane_id == nav.dest_lane && std::fabs(nav.s - nav.dest_s) < 4.0) ||
                         distance(e.state.position, e.state.destination) < 6.0;
    if (arrived) {
        sample_vehicle_destination(world, e);
        recompute_route(world, e);
    }

    place_vehicle(e, world.net);
}

/// Moving traffic close to the walking direction pauses a crossing
/// pedestrian; a stopped vehicle only blocks when its body actually sits
/// on the next stretch of path (pedestrians cross in front of stopped cars).
bool crossing_blocked(const WorldState& world, const Vec2& pos, const Vec2& dir) {
    const double path_heading = std::atan2(dir.y, dir.x);
    const Obb path_box{pos + dir * 1.2, path_heading, 2.4, 0.8};
    for (const Entity& other : world.entities) {
        if (other.state.kind == EntityKind::Pedestrian) continue;
        if (other.state.speed > 0.3) {
            const Vec2 d = other.state.position - pos;
            const double forward = d.dot(dir);
            const double lateral = std::fabs(-d.x * dir.y + d.y * dir.x);
            if (forward > 0.0 && forward < 3.0 + 0.5 * other.state.length && lateral < 2.4) return true;
        } else {
            Obb inflated = other.state.box();
            inflated.length += 0.5;
            inflated.width += 0.5;
            if (obb_overlap(path_box, inflated)) return true;
        }
    }
    return false;
}

void move_pedestrian(WorldState& world, Entity& e, const WalkCommand& cmd, double dt) {
    PedNav& ped = e.ped;
    const auto& edges = world.net.ped_edges;

    // Collision pushes fade out as the pedestrian rejoins the path.
    const double decay = std::max(0.0, 1.0 - dt / 1.5);
    ped.push_offset = ped.push_offset * decay;

    if (cmd.start_jaywalk && ped.mode == PedMode::Walking) {
        const PedEdge& edge = edges[static_cast<std::size_t>(ped.edge)];
        ped.cross_from = edge.point_at(ped.s, world.net.ped_nodes);
        ped.cross_to = ped.cross_from + edge.across_dir * edge.across_dist;
        ped.cross_progress = 0.0;
        ped.cross_land_edge = edge.partner_edge >= 0 ? edge.partner_edge : ped.edge;
        ped.blocked_ticks = 0;
        ped.mode = PedMode::Jaywalking;
    }

    const int escape_ticks = static_cast<int>(std::ceil(5.0 / dt));

    switch (ped.mode) {
        case PedMode::Jaywalking: {
            const double dist = (ped.cross_to - ped.cross_from).norm();
            const Vec2 dir = (ped.cross_to - ped.cross_from).normalized();
            if (crossing_blocked(world, e.state.position, dir)) {
                if (++ped.blocked_ticks >= escape_ticks) {
                    // Abandon the crossing: walk back the way we came.
                    std::swap(ped.cross_from, ped.cross_to);
                    ped.cross_progress = 1.0 - ped.cross_progress;
                    ped.cross_land_edge = ped.cross_land_edge == ped.edge &&
                                                  edges[static_cast<std::size_t>(ped.edge)].partner_edge >= 0
                                              ? edges[static_cast<std::size_t>(ped.edge)].partner_edge
                                              : ped.edge;
                    ped.blocked_ticks = 0;
                }
                break;
            }
            ped.blocked_ticks = 0;
            ped.cross_progress += dist > 0.0 ? cmd.speed_mps * dt / dist : 1.0;
            if (ped.cross_progress >= 1.0) {
                ped.mode = PedMode::Walking;
                ped.cross_progress = 0.0;
                if (ped.cross_land_edge >= 0) ped.edge = ped.cross_land_edge;
                ped.cross_land_edge = -1;
            }
            break;
        }
        case PedMode::Waiting:
            if (!cmd.wait) ped.mode = PedMode::Walking;
            break;
        case PedMode::Walking: {
            if (cmd.next_edge >= 0 && cmd.next_edge != ped.edge) {
                const PedEdge& cur = edges[static_cast<std::size_t>(ped.edge)];
                const int node = ped.dir > 0 ? cur.node_b : cur.node_a;
                const PedEdge& next = edges[static_cast<std::size_t>(cmd.next_edge)];
                ped.edge = cmd.next_edge;
                if (next.node_a == node) {
                    ped.dir = 1;
                    ped.s = 0.0;
                } else {
                    ped.dir = -1;
                    ped.s = next.length;
                }
                if (next.is_crossing &&
                    world.net.signal_green(next.cross_signal_id, next.cross_signal_group, world.sim_time)) {
                    ped.mode = PedMode::Waiting;
                    break;
                }
            } else if (cmd.next_edge == ped.edge) {
                ped.dir = -ped.dir;  // dead end: turn around
            }
            const PedEdge& edge = edges[static_cast<std::size_t>(ped.edge)];
            if (edge.is_crossing) {
                const Vec2& a = world.net.ped_nodes[static_cast<std::size_t>(edge.node_a)].pos;
                const Vec2& b = world.net.ped_nodes[static_cast<std::size_t>(edge.node_b)].pos;
                const Vec2 dir = ((b - a) * static_cast<double>(ped.dir)).normalized();
                if (crossing_blocked(world, e.state.position, dir)) {
                    if (++ped.blocked_ticks >= escape_ticks) {
                        ped.dir = -ped.dir;
                        ped.blocked_ticks = 0;
                    }
                    break;
                }
                ped.blocked_ticks = 0;
            }
            ped.s += ped.dir * cmd.speed_mps * dt;
            ped.s = std::clamp(ped.s, 0.0, edge.length);
            break;
        }
    }
    place_pedestrian(e, world.net);
}

void separate_pair(WorldState& world, Entity& a, Entity& b, const Vec2& mtv_a) {
    const bool a_veh = is_vehicle(a), b_veh = is_vehicle(b);
    if (a_veh && b_veh) {
        if (a.state.lane_id == b.state.lane_id) {
            Entity& follower = a.nav.s <= b.nav.s ? a : b;
            Entity& leader = a.nav.s <= b.nav.s ? b : a;
            const double want = 0.5 * (a.state.length + b.state.length) + 0.6;
            follower.nav.s = std::max(0.0, std::min(follower.nav.s, leader.nav.s - want));
            follower.state.speed = 0.0;
        } else if (a.nav.blend_from_lane >= 0 || b.nav.blend_from_lane >= 0) {
            Entity& blender = a.nav.blend_from_lane >= 0 ? a : b;
            blender.state.lane_id = blender.nav.blend_from_lane;  // abort the change
            blender.nav.blend_from_lane = -1;
            blender.nav.blend_elapsed = 0.0;
            recompute_route(world, blender);
        } else {
            const Lane& lane_a = world.net.lane(a.state.lane_id);
            const Lane& lane_b = world.net.lane(b.state.lane_id);
            if (lane_a.is_connector && lane_b.is_connector) {
                // Crossing-connector knot: squeeze the further-progressed
                // vehicle forward out of the box.
                const double fa = lane_a.length > 0.0 ? a.nav.s / lane_a.length : 0.0;
                const double fb = lane_b.length > 0.0 ? b.nav.s / lane_b.length : 0.0;
                Entity& winner = fa >= fb ? a : b;
                winner.nav.s += mtv_a.norm() + 0.5;
            } else {
                Entity& mover = a.state.id < b.state.id ? a : b;
                mover.nav.s = std::max(0.0, mover.nav.s - (mtv_a.norm() + 0.5));
            }
        }
        a.state.speed *= 0.3;
        b.state.speed *= 0.3;
        place_vehicle(a, world.net);
        place_vehicle(b, world.net);
    } else if (a_veh != b_veh) {
        Entity& ped = a_veh ? b : a;
        Entity& veh = a_veh ? a : b;
        Vec2 push = a_veh ? Vec2{-mtv_a.x, -mtv_a.y} : mtv_a;
        ped.ped.push_offset = ped.ped.push_offset + push * 1.2;
        veh.state.speed *= 0.3;
        place_pedestrian(ped, world.net);
    } else {
        a.ped.push_offset = a.ped.push_offset + mtv_a * 0.6;
        b.ped.push_offset = b.ped.push_offset - mtv_a * 0.6;
        place_pedestrian(a, world.net);
        place_pedestrian(b, world.net);
    }
}

}  // namespace

void place_on_lane(WorldState& world, Entity& entity, int lane_id, double s) {
    entity.state.lane_id = lane_id;
    entity.nav.s = std::clamp(s, 0.0, world.net.lane(lane_id).length);
    entity.nav.blend_from_lane = -1;
    place_vehicle(entity, world.net);
    world.cache_tick = -1;
}

void place_on_ped_edge(WorldState& world, Entity& entity, int edge_id, double s, int dir) {
    entity.ped.edge = edge_id;
    entity.ped.s = std::clamp(s, 0.0, world.net.ped_edges[static_cast<std::size_t>(edge_id)].length);
    entity.ped.dir = dir >= 0 ? 1 : -1;
    entity.ped.mode = PedMode::Walking;
    place_pedestrian(entity, world.net);
    world.cache_tick = -1;
}

std::vector<CollisionEvent> detect_collisions(const WorldState& world) {
    struct Extent {
        double min_x, max_x, min_y, max_y;
        int idx;
    };
    std::vector<Extent> extents;
    extents.reserve(world.entities.size());
    for (std::size_t i = 0; i < world.entities.size(); ++i) {
        const Obb box = world.entities[i].state.box();
        const Vec2 half = box.aabb_half();
        extents.push_back({box.center.x - half.x, box.center.x + half.x,
                           box.center.y - half.y, box.center.y + half.y, static_cast<int>(i)});
    }
    std::sort(extents.begin(), extents.end(), [](const Extent& a, const Extent& b) {
        return a.min_x < b.min_x || (a.min_x == b.min_x && a.idx < b.idx);
    });

    std::vector<CollisionEvent> events;
    for (std::size_t i = 0; i < extents.size(); ++i) {
        for (std::size_t j = i + 1; j < extents.size() && extents[j].min_x <= extents[i].max_x; ++j) {
            if (extents[j].min_y > extents[i].max_y || extents[j].max_y < extents[i].min_y) continue;
            const Entity& a = world.entities[static_cast<std::size_t>(extents[i].idx)];
            const Entity& b = world.entities[static_cast<std::size_t>(extents[j].idx)];
            if (obb_overlap(a.state.box(), b.state.box())) {
                const int lo = std::min(a.state.id, b.state.id);
                const int hi = std::max(a.state.id, b.state.id);
                events.push_back({world.tick, lo, hi});
            }
        }
    }
    std::sort(events.begin(), events.end(), [](const CollisionEvent& a, const CollisionEvent& b) {
        return a.entity_a < b.entity_a || (a.entity_a == b.entity_a && a.entity_b < b.entity_b);
    });
    return events;
}

WorldState load_scenario(const ScenarioConfig& config) {
    config.validate();
    WorldState world;
    world.config = config;
    world.net = build_grid_network(config.map);
    world.rng = Rng(config.seed);

    std::vector<int> approach_lanes;
    for (const Lane& ln : world.net.lanes) {
        if (!ln.is_connector) approach_lanes.push_back(ln.id);
    }
    if (approach_lanes.empty()) throw ScenarioError("map has no drivable approach lanes");

    std::map<int, std::vector<double>> occupied;  // lane -> spawn s positions
    auto fits = [&](int lane_id, double s) {
        for (double other : occupied[lane_id]) {
            if (std::fabs(other - s) < 9.0) return false;
        }
        return true;
    };

    // Ego at its fixed start.
    Entity ego;
    ego.state.id = 0;
    ego.state.kind = EntityKind::EgoVehicle;
    ego.state.lane_id = config.ego_start_lane;
    ego.state.length = kVehicleLen;
    ego.state.width = kVehicleWidth;
    if (config.ego_start_lane < 0 || config.ego_start_lane >= static_cast<int>(world.net.lanes.size()) ||
        world.net.lane(config.ego_start_lane).is_connector) {
        throw ScenarioError("ego start lane invalid");
    }
    ego.nav.s = std::clamp(config.ego_start_s, 0.0, world.net.lane(config.ego_start_lane).length);
    occupied[ego.state.lane_id].push_back(ego.nav.s);
    world.entities.push_back(ego);
    sample_vehicle_destination(world, world.entities[0]);
    recompute_route(world, world.entities[0]);
    place_vehicle(world.entities[0], world.net);

    for (int n = 0; n < config.npc_vehicle_count; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const int lane_id = approach_lanes[static_cast<std::size_t>(world.rng.next_index(approach_lanes.size()))];
            const Lane& lane = world.net.lane(lane_id);
            if (lane.length < 20.0) continue;
            const double s = world.rng.uniform(3.0, lane.length - 8.0);
            if (!fits(lane_id, s)) continue;
            Entity e;
            e.state.id = static_cast<int>(world.entities.size());
            e.state.kind = EntityKind::NpcVehicle;
            e.state.lane_id = lane_id;
            e.state.length = kVehicleLen;
            e.state.width = kVehicleWidth;
            e.nav.s = s;
            occupied[lane_id].push_back(s);
            world.entities.push_back(e);
            Entity& ref = world.entities.back();
            sample_vehicle_destination(world, ref);
            recompute_route(world, ref);
            place_vehicle(ref, world.net);
            placed = true;
        }
        if (!placed) throw ScenarioError("insufficient free space to spawn NPC vehicles");
    }

    std::vector<int> walk_edges;
    for (const PedEdge& e : world.net.ped_edges) {
        if (!e.is_crossing && e.length > 4.0) walk_edges.push_back(e.id);
    }
    std::map<int, std::vector<double>> ped_occupied;
    for (int n = 0; n < config.npc_pedestrian_count; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const int edge_id = walk_edges.empty()
                                    ? -1
                                    : walk_edges[static_cast<std::size_t>(world.rng.next_index(walk_edges.size()))];
            if (edge_id < 0) break;
            const PedEdge& edge = world.net.ped_edges[static_cast<std::size_t>(edge_id)];
            const double s = world.rng.uniform(0.5, edge.length - 0.5);
            bool ok = true;
            for (double other : ped_occupied[edge_id]) {
                if (std::fabs(other - s) < 1.2) ok = false;
            }
            if (!ok) continue;
            Entity e;
            e.state.id = static_cast<int>(world.entities.size());
            e.state.kind = EntityKind::Pedestrian;
            e.state.length = kPedSize;
            e.state.width = kPedSize;
            e.ped.edge = edge_id;
            e.ped.s = s;
            e.ped.dir = world.rng.bernoulli(0.5) ? 1 : -1;
            e.ped.walk_speed = world.rng.uniform(1.2, 1.6);
            ped_occupied[edge_id].push_back(s);
            world.entities.push_back(e);
            Entity& ref = world.entities.back();
            const int target_node = ref.ped.dir > 0 ? edge.node_b : edge.node_a;
            ref.state.destination = world.net.ped_nodes[static_cast<std::size_t>(target_node)].pos;
            place_pedestrian(ref, world.net);
            placed = true;
        }
        if (!placed) throw ScenarioError("insufficient free space to spawn pedestrians");
    }

    return world;
}

void step(WorldState& world, const ControlInput& ego_control, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    world.refresh_caches();

    const std::size_t n = world.entities.size();
    std::vector<ControlInput> vehicle_controls(n);
    std::vector<WalkCommand> walk_commands(n);
    for (std::size_t i = 0; i < n; ++i) {
        Entity& e = world.entities[i];
        if (e.state.kind == EntityKind::EgoVehicle) {
            vehicle_controls[i] = ego_control.arbitrated();
        } else if (e.state.kind == EntityKind::NpcVehicle) {
            vehicle_controls[i] = npc_vehicle_policy(world, e, world.config.aggression, world.rng).arbitrated();
        } else {
            walk_commands[i] = npc_pedestrian_policy(world, e, world.config.aggression, world.rng);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        Entity& e = world.entities[i];
        if (is_vehicle(e)) {
            move_vehicle(world, e, vehicle_controls[i], dt);
        } else {
            move_pedestrian(world, e, walk_commands[i], dt);
        }
    }

    // Detect, log impacts (per-pair cooldown, real closing speed), separate.
    const long cooldown_ticks = static_cast<long>(std::ceil(world.config.collision_cooldown_s / dt));
    std::map<std::pair<int, int>, long> last_logged;
    for (const CollisionEvent& ev : world.collisions) {
        last_logged[{ev.entity_a, ev.entity_b}] = ev.tick;
    }
    for (const CollisionEvent& ev : detect_collisions(world)) {
        Entity& a = world.entities[static_cast<std::size_t>(ev.entity_a)];
        Entity& b = world.entities[static_cast<std::size_t>(ev.entity_b)];
        // Grinding contact between (nearly) resting bodies is not an impact.
        const Vec2 vel_a = heading_unit(a.state.heading) * a.state.speed;
        const Vec2 vel_b = heading_unit(b.state.heading) * b.state.speed;
        const Vec2 axis = (b.state.position - a.state.position).normalized();
        const double closing = (vel_a - vel_b).dot(axis);
        auto it = last_logged.find({ev.entity_a, ev.entity_b});
        const bool fresh = it == last_logged.end() || world.tick - it->second >= cooldown_ticks;
        if (fresh && closing > 1.0) world.collisions.push_back(ev);
        Vec2 mtv;
        if (obb_overlap(a.state.box(), b.state.box(), &mtv)) {
            separate_pair(world, a, b, mtv);
        }
    }

    world.tick += 1;
    world.sim_time += dt;
    world.cache_tick = -1;
}

}  // namespace coachsim::sim
