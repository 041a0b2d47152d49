#include "coachsim/world_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace coachsim {

// Vec2 lives in the root namespace; ADL needs its converters beside it.
void to_json(nlohmann::json& j, const Vec2& v) { j = nlohmann::json{{"x", v.x}, {"y", v.y}}; }
void from_json(const nlohmann::json& j, Vec2& v) {
    j.at("x").get_to(v.x);
    j.at("y").get_to(v.y);
}

}  // namespace coachsim

namespace coachsim::sim {

using nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(EntityKind, {
    {EntityKind::EgoVehicle, "ego-vehicle"},
    {EntityKind::NpcVehicle, "npc-vehicle"},
    {EntityKind::Pedestrian, "pedestrian"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(PedMode, {
    {PedMode::Walking, "walking"},
    {PedMode::Waiting, "waiting"},
    {PedMode::Jaywalking, "jaywalking"},
})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MapSpec, grid_rows, grid_cols, block_m,
                                                lanes_per_direction, lane_width_m, speed_limit_mps,
                                                connector_speed_limit_mps, signal_green_s,
                                                stagger_signals)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AggressionParams, lane_change_prob,
                                                red_light_run_prob, jaywalk_prob,
                                                desired_speed_multiplier)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DynamicsParams, k_t, k_b, drag_c, cap_tolerance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScenarioConfig, map, map_path, npc_vehicle_count,
                                                npc_pedestrian_count, aggression, ego_start_lane,
                                                ego_start_s, seed, dt, max_duration_s, dynamics,
                                                collision_cooldown_s)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(VehicleNav, s, blend_from_lane, blend_elapsed,
                                                route, dest_lane, dest_s,
                                                red_decision_intersection, runs_red)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PedNav, edge, s, dir, mode, walk_speed, cross_from,
                                                cross_to, cross_progress, cross_land_edge,
                                                blocked_ticks, push_offset)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EntityState, id, kind, position, heading, speed,
                                                lane_id, length, width, destination)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Entity, state, nav, ped)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CollisionEvent, tick, entity_a, entity_b)

std::string WorldState::serialize() const {
    json j;
    j["tick"] = tick;
    j["sim_time"] = sim_time;
    j["config"] = config;
    j["rng"] = rng.serialize();
    j["ego_distance"] = ego_distance;
    j["collisions"] = collisions;
    j["entities"] = entities;
    return j.dump(2);
}

WorldState WorldState::deserialize(const std::string& text) {
    const json j = json::parse(text);
    WorldState w;
    w.config = j.at("config").get<ScenarioConfig>();
    w.net = build_grid_network(w.config.map);
    w.tick = j.at("tick").get<long>();
    w.sim_time = j.at("sim_time").get<double>();
    w.rng = Rng::deserialize(j.at("rng").get<std::string>());
    w.ego_distance = j.at("ego_distance").get<double>();
    w.collisions = j.at("collisions").get<std::vector<CollisionEvent>>();
    w.entities = j.at("entities").get<std::vector<Entity>>();
    return w;
}

ScenarioConfig scenario_config_from_json_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario config: invalid JSON: ") + e.what());
    }
    ScenarioConfig cfg;
    try {
        cfg = j.get<ScenarioConfig>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario config: bad field: ") + e.what());
    }
    if (!cfg.map_path.empty()) {
        std::filesystem::path p(cfg.map_path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        std::ifstream in(p);
        if (!in) throw std::runtime_error("scenario config: cannot open map file " + p.string());
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            cfg.map = json::parse(ss.str()).get<MapSpec>();
        } catch (const json::exception& e) {
            throw std::runtime_error(std::string("map spec: ") + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_config_from_json_text(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string scenario_config_to_json_text(const ScenarioConfig& config) {
    return json(config).dump(2);
}

}  // namespace coachsim::sim
