#include "coachsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "coachsim/csv_util.hpp"
#include "coachsim/driver_agent.hpp"
#include "coachsim/remote_backend.hpp"
#include "coachsim/rule_backend.hpp"
#include "coachsim/world_io.hpp"

namespace coachsim::experiment {

using nlohmann::json;

std::string Condition::code() const {
    const char m = method == Method::Demonstrations ? 'D' : (method == Method::Feedback ? 'F' : 'M');
    const char s = style == Style::Cautious ? 'C' : (style == Style::Risky ? 'R' : 'N');
    return std::string{m, s};
}

std::optional<Condition> Condition::from_code(const std::string& code) {
    if (code.size() != 2) return std::nullopt;
    Condition c;
    switch (code[0]) {
        case 'D': c.method = Method::Demonstrations; break;
        case 'F': c.method = Method::Feedback; break;
        case 'M': c.method = Method::Multi; break;
        default: return std::nullopt;
    }
    switch (code[1]) {
        case 'C': c.style = Style::Cautious; break;
        case 'N': c.style = Style::NotAligned; break;
        case 'R': c.style = Style::Risky; break;
        default: return std::nullopt;
    }
    if (c.method == Method::Multi && c.style == Style::NotAligned) return std::nullopt;
    return c;
}

std::vector<Condition> build_matrix() {
    std::vector<Condition> out;
    const Method methods[] = {Method::Demonstrations, Method::Feedback, Method::Multi};
    const Style styles[] = {Style::Cautious, Style::NotAligned, Style::Risky};
    for (Method m : methods) {
        for (Style s : styles) {
            if (m == Method::Multi && s == Style::NotAligned) continue;
            out.push_back({s, m});
        }
    }
    return out;
}

Wiring wire_condition(const Condition& condition, const demos::DemoSet& demo_set, int demo_count,
                      std::uint64_t seed) {
    if (condition.method == Method::Multi && condition.style == Style::NotAligned) {
        throw std::invalid_argument("the (NotAligned, Multi) condition does not exist");
    }
    Wiring w;
    w.coach_enabled = condition.method != Method::Demonstrations;
    if (condition.style == Style::NotAligned) return w;

    const demos::StyleTag tag =
        condition.style == Style::Cautious ? demos::StyleTag::Cautious : demos::StyleTag::Risky;
    const auto selection = demos::select_demos(demo_set, tag, demo_count, seed);
    if (condition.method == Method::Demonstrations || condition.method == Method::Multi) {
        w.demos_for_driver = selection;
    }
    if (condition.method == Method::Feedback || condition.method == Method::Multi) {
        w.demos_for_coach = selection;
    }
    return w;
}

namespace {

reasoning::StyleProfile profile_for_wiring(const Condition& condition, const Wiring& wiring) {
    // The alignment pathway decides the rule profile: the driver behaves in
    // the demonstrated style only when demos are wired to it.
    if (!wiring.demos_for_driver.empty()) {
        return condition.style == Style::Cautious ? reasoning::cautious_profile()
                                                  : reasoning::risky_profile();
    }
    return reasoning::neutral_profile();
}

std::unique_ptr<reasoning::ReasoningBackend> make_backend(const RunConfig& cfg,
                                                          const reasoning::StyleProfile& profile) {
    if (cfg.backend.kind == reasoning::BackendKind::Rule) {
        return std::make_unique<reasoning::RuleBackend>(profile, cfg.scenario.dynamics);
    }
    return std::make_unique<reasoning::RemoteBackend>(cfg.backend);
}

int ego_collisions(const sim::WorldState& world) {
    int n = 0;
    for (const sim::CollisionEvent& ev : world.collisions) {
        if (ev.entity_a == 0 || ev.entity_b == 0) ++n;
    }
    return n;
}

void write_guidelines_file(const std::vector<coach::Guideline>& guidelines, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write guidelines to " + path);
    for (const coach::Guideline& g : guidelines) {
        json j{{"id", g.id},
               {"text", g.text},
               {"source_evaluation_id", g.source_evaluation_id},
               {"created_tick", g.created_tick}};
        out << j.dump() << "\n";
    }
}

}  // namespace

RunResult run_condition(const RunConfig& config) {
    if (config.duration_s <= 0.0) throw std::invalid_argument("run duration must be > 0");
    const double dt = config.scenario.dt;
    const double tps = 1.0 / dt;
    const int ticks_per_sec = static_cast<int>(std::lround(tps));
    if (ticks_per_sec < 1 || std::fabs(tps - ticks_per_sec) > 1e-9) {
        throw std::invalid_argument("scenario dt must divide one second evenly");
    }

    const demos::DemoSet demo_set =
        config.demos_path.empty() ? demos::builtin_sample_set()
                                  : demos::load_demonstrations(config.demos_path);
    const Wiring wiring = wire_condition(config.condition, demo_set, config.demo_count, config.seed);

    sim::ScenarioConfig scenario = config.scenario;
    scenario.seed = config.seed;
    scenario.max_duration_s = config.duration_s;
    sim::WorldState world = sim::load_scenario(scenario);

    RunResult result;
    result.condition = config.condition;
    result.seed = config.seed;

    std::string run_dir;
    std::unique_ptr<reasoning::TranscriptLog> transcript;
    if (!config.out_dir.empty()) {
        run_dir = (std::filesystem::path(config.out_dir) /
                   (config.condition.code() + "_seed" + std::to_string(config.seed)))
                      .string();
        std::filesystem::create_directories(run_dir);
        result.run_dir = run_dir;
        result.transcript_path = run_dir + "/transcript.txt";
        transcript = std::make_unique<reasoning::TranscriptLog>(result.transcript_path);

        RunConfig persisted = config;
        persisted.scenario = scenario;
        result.runconfig_path = run_dir + "/runconfig.json";
        std::ofstream rc(result.runconfig_path);
        rc << run_config_to_json(persisted) << "\n";
    }

    const reasoning::StyleProfile profile = profile_for_wiring(config.condition, wiring);
    auto backend = make_backend(config, profile);

    agent::ShortTermMemory memory(config.memory_capacity);
    coach::GuidelinesStore guidelines;
    const int cadence = config.coach_cadence > 0 ? config.coach_cadence : config.memory_capacity;

    const int duration = static_cast<int>(std::lround(config.duration_s));
    int evaluation_id = 0;
    for (int sec = 0; sec < duration; ++sec) {
        const agent::PerceptionSnapshot snapshot =
            agent::perceive(world, 0, config.sensing_radius_m);
        const agent::DecisionOutcome outcome =
            agent::decide_step(snapshot, memory, wiring.demos_for_driver, guidelines.texts(),
                               *backend, transcript.get());
        memory.push(outcome.unit);
        ++result.decision_count;
        if (outcome.fallback) ++result.fallback_count;

        if (config.backend.kind == reasoning::BackendKind::RemoteChat && transcript) {
            // Wall-clock pacing between decisions; recorded, not slept,
            // since the sim runs offline.
            const double pace = reasoning::token_to_timestep(outcome.token_count);
            transcript->note("pace dt = " + std::to_string(pace) + " s");
        }

        if (wiring.coach_enabled && result.decision_count % cadence == 0 && !memory.empty()) {
            const auto evaluation =
                coach::evaluate(memory, wiring.demos_for_coach, guidelines, *backend, transcript.get());
            if (evaluation) {
                ++result.evaluation_count;
                coach::Evaluation ev = *evaluation;
                ev.id = evaluation_id++;
                if (ev.verdict == coach::Verdict::Bad) {
                    ++result.bad_evaluation_count;
                    coach::Guideline g =
                        coach::generate_guideline(ev, memory, *backend, transcript.get());
                    g.id = static_cast<int>(guidelines.size());
                    guidelines.add(g);
                }
            }
        }

        const sim::ControlInput control = agent::action_to_control(
            outcome.unit.action, world.ego().state.speed, scenario.dynamics);
        for (int t = 0; t < ticks_per_sec; ++t) {
            sim::ControlInput tick_control = control;
            if (t > 0) {
                // Lane and turn commands are one-shot per decision.
                tick_control.lane_command = sim::LaneCommand::Keep;
                tick_control.turn_command = sim::TurnCommand::None;
            }
            sim::step(world, tick_control, dt);
        }

        metrics::LogRecord rec;
        rec.second = sec + 1;
        rec.speed = world.ego().state.speed;
        const sim::ControlInput arb = control.arbitrated();
        rec.throttle_pct = arb.throttle_pct;
        rec.brake_pct = arb.brake_pct;
        rec.collisions_cum = ego_collisions(world);
        rec.distance_cum = world.ego_distance;
        result.log.push_back(rec);
    }

    result.report = metrics::build_report(result.log);
    result.guidelines = guidelines.items();

    if (!run_dir.empty()) {
        result.log_path = run_dir + "/log.csv";
        metrics::write_log_csv(result.log, result.log_path);
        result.guidelines_path = run_dir + "/guidelines.jsonl";
        write_guidelines_file(result.guidelines, result.guidelines_path);
        result.report_path = run_dir + "/report.json";
        metrics::write_report_json(result.report, result.report_path);
    }
    return result;
}

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& results) {
    std::vector<AggregateRow> rows;
    for (const Condition& cond : build_matrix()) {
        AggregateRow row;
        row.condition = cond;
        double rate = 0.0, speed = 0.0, throttle = 0.0, brake = 0.0, dist = 0.0;
        int n_rate = 0, n_speed = 0, n_throttle = 0, n_brake = 0;
        for (const RunResult& r : results) {
            if (!(r.condition == cond)) continue;
            ++row.run_count;
            dist += r.report.distance_m;
            if (!r.report.collisions_per_meter.undefined) {
                rate += r.report.collisions_per_meter.value;
                ++n_rate;
            }
            if (r.report.avg_speed) {
                speed += *r.report.avg_speed;
                ++n_speed;
            }
            if (r.report.avg_throttle) {
                throttle += *r.report.avg_throttle;
                ++n_throttle;
            }
            if (r.report.avg_brake) {
                brake += *r.report.avg_brake;
                ++n_brake;
            }
        }
        if (row.run_count == 0) continue;
        row.mean_collision_rate = n_rate > 0 ? rate / n_rate : 0.0;
        row.mean_speed = n_speed > 0 ? speed / n_speed : 0.0;
        row.mean_throttle = n_throttle > 0 ? throttle / n_throttle : 0.0;
        row.mean_brake = n_brake > 0 ? brake / n_brake : 0.0;
        row.mean_distance_m = dist / row.run_count;
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << "condition,run_count,mean_collision_rate,mean_speed,mean_throttle,mean_brake,mean_distance_m\n";
    for (const AggregateRow& r : rows) {
        os << r.condition.code() << ',' << r.run_count << ',' << fmt6(r.mean_collision_rate) << ','
           << fmt6(r.mean_speed) << ',' << fmt6(r.mean_throttle) << ',' << fmt6(r.mean_brake) << ','
           << fmt6(r.mean_distance_m) << "\n";
    }
    return os.str();
}

std::vector<AggregateRow> aggregate_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty aggregate CSV");
    std::vector<AggregateRow> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != 7) throw std::invalid_argument("aggregate CSV expects 7 columns");
        AggregateRow r;
        const auto cond = Condition::from_code(cells[0]);
        if (!cond) throw std::invalid_argument("unknown condition code " + cells[0]);
        r.condition = *cond;
        r.run_count = std::stoi(cells[1]);
        r.mean_collision_rate = std::stod(cells[2]);
        r.mean_speed = std::stod(cells[3]);
        r.mean_throttle = std::stod(cells[4]);
        r.mean_brake = std::stod(cells[5]);
        r.mean_distance_m = std::stod(cells[6]);
        rows.push_back(r);
    }
    return rows;
}

NLOHMANN_JSON_SERIALIZE_ENUM(reasoning::BackendKind, {
    {reasoning::BackendKind::Rule, "rule"},
    {reasoning::BackendKind::RemoteChat, "remote-chat"},
})

std::string run_config_to_json(const RunConfig& config) {
    json j;
    j["condition"] = config.condition.code();
    j["scenario"] = json::parse(sim::scenario_config_to_json_text(config.scenario));
    j["seed"] = config.seed;
    j["duration_s"] = config.duration_s;
    j["backend"] = json{{"kind", config.backend.kind},
                        {"endpoint", config.backend.endpoint},
                        {"model", config.backend.model},
                        {"auth_env", config.backend.auth_env},
                        {"timeout_s", config.backend.timeout_s},
                        {"retry_count", config.backend.retry_count},
                        {"temperature", config.backend.temperature}};
    j["demos_path"] = config.demos_path;
    j["demo_count"] = config.demo_count;
    j["memory_capacity"] = config.memory_capacity;
    j["coach_cadence"] = config.coach_cadence;
    j["sensing_radius_m"] = config.sensing_radius_m;
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
    const json j = json::parse(text);
    RunConfig cfg;
    const auto cond = Condition::from_code(j.at("condition").get<std::string>());
    if (!cond) throw std::invalid_argument("runconfig has an unknown condition code");
    cfg.condition = *cond;
    cfg.scenario = sim::scenario_config_from_json_text(j.at("scenario").dump());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.duration_s = j.at("duration_s").get<double>();
    const json& b = j.at("backend");
    cfg.backend.kind = b.at("kind").get<reasoning::BackendKind>();
    cfg.backend.endpoint = b.at("endpoint").get<std::string>();
    cfg.backend.model = b.at("model").get<std::string>();
    cfg.backend.auth_env = b.at("auth_env").get<std::string>();
    cfg.backend.timeout_s = b.at("timeout_s").get<double>();
    cfg.backend.retry_count = b.at("retry_count").get<int>();
    cfg.backend.temperature = b.at("temperature").get<double>();
    cfg.demos_path = j.at("demos_path").get<std::string>();
    cfg.demo_count = j.at("demo_count").get<int>();
    cfg.memory_capacity = j.at("memory_capacity").get<int>();
    cfg.coach_cadence = j.at("coach_cadence").get<int>();
    cfg.sensing_radius_m = j.at("sensing_radius_m").get<double>();
    return cfg;
}

}  // namespace coachsim::experiment
