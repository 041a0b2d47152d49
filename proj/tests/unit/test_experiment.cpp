#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "coachsim/experiment.hpp"

using namespace coachsim;
using namespace coachsim::experiment;

namespace {

RunConfig quick_config(const std::string& code, std::uint64_t seed, double duration = 60.0) {
    RunConfig cfg;
    cfg.condition = *Condition::from_code(code);
    cfg.seed = seed;
    cfg.duration_s = duration;
    cfg.scenario.npc_vehicle_count = 12;
    cfg.scenario.npc_pedestrian_count = 8;
    cfg.scenario.aggression.lane_change_prob = 0.05;
    cfg.scenario.aggression.red_light_run_prob = 0.3;
    cfg.scenario.aggression.jaywalk_prob = 0.02;
    cfg.scenario.aggression.desired_speed_multiplier = 1.2;
    return cfg;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("coachsim_runs_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("the condition matrix is exactly the eight realized cells, in order") {
    const auto matrix = build_matrix();
    REQUIRE(matrix.size() == 8);
    const std::vector<std::string> want{"DC", "DN", "DR", "FC", "FN", "FR", "MC", "MR"};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(matrix[i].code() == want[i]);
    // Stable across calls.
    const auto again = build_matrix();
    for (std::size_t i = 0; i < matrix.size(); ++i) CHECK(matrix[i] == again[i]);
    // Every style appears with D and F; Multi only with C and R.
    int multi = 0;
    for (const auto& c : matrix) {
        if (c.method == Method::Multi) {
            ++multi;
            CHECK(c.style != Style::NotAligned);
        }
    }
    CHECK(multi == 2);
}

TEST_CASE("condition codes round-trip and MN is rejected") {
    for (const auto& c : build_matrix()) {
        const auto parsed = Condition::from_code(c.code());
        REQUIRE(parsed.has_value());
        CHECK(*parsed == c);
    }
    CHECK(!Condition::from_code("MN").has_value());
    CHECK(!Condition::from_code("XC").has_value());
    CHECK(!Condition::from_code("D").has_value());
}

TEST_CASE("wiring routes demonstrations per method") {
    const demos::DemoSet& set = demos::builtin_sample_set();
    SUBCASE("Demonstrations: driver only, coach disabled") {
        const Wiring w = wire_condition(*Condition::from_code("DC"), set, 3, 1);
        CHECK(w.demos_for_driver.size() == 3);
        CHECK(w.demos_for_coach.empty());
        CHECK(!w.coach_enabled);
        for (const auto& d : w.demos_for_driver) CHECK(d.style == demos::StyleTag::Cautious);
    }
    SUBCASE("Feedback: coach only, coach enabled") {
        const Wiring w = wire_condition(*Condition::from_code("FR"), set, 3, 1);
        CHECK(w.demos_for_driver.empty());
        CHECK(w.demos_for_coach.size() == 3);
        CHECK(w.coach_enabled);
    }
    SUBCASE("Multi: both sides") {
        const Wiring w = wire_condition(*Condition::from_code("MR"), set, 2, 1);
        CHECK(w.demos_for_driver.size() == 2);
        CHECK(w.demos_for_coach.size() == 2);
        CHECK(w.coach_enabled);
    }
    SUBCASE("NotAligned keeps the method wiring without demos") {
        const Wiring w = wire_condition(*Condition::from_code("FN"), set, 3, 1);
        CHECK(w.demos_for_driver.empty());
        CHECK(w.demos_for_coach.empty());
        CHECK(w.coach_enabled);
        const Wiring d = wire_condition(*Condition::from_code("DN"), set, 3, 1);
        CHECK(!d.coach_enabled);
    }
    SUBCASE("the excluded cell is rejected") {
        Condition mn;
        mn.method = Method::Multi;
        mn.style = Style::NotAligned;
        CHECK_THROWS_AS(wire_condition(mn, set, 3, 1), std::invalid_argument);
    }
    SUBCASE("wiring exclusivity holds across the whole matrix") {
        for (const Condition& c : build_matrix()) {
            const Wiring w = wire_condition(c, set, 3, 1);
            const bool driver_demos = !w.demos_for_driver.empty();
            const bool coach_demos = !w.demos_for_coach.empty();
            const bool styled = c.style != Style::NotAligned;
            CHECK(driver_demos ==
                  (styled && (c.method == Method::Demonstrations || c.method == Method::Multi)));
            CHECK(coach_demos ==
                  (styled && (c.method == Method::Feedback || c.method == Method::Multi)));
            CHECK(w.coach_enabled == (c.method != Method::Demonstrations));
        }
    }
}

TEST_CASE("a 60-second rule run logs 60 records and coherent artifacts") {
    TempDir dir;
    RunConfig cfg = quick_config("MC", 11);
    cfg.out_dir = dir.path.string();
    const RunResult r = run_condition(cfg);
    CHECK(r.log.size() == 60);
    CHECK(r.decision_count == 60);
    CHECK(r.fallback_count == 0);
    CHECK(std::filesystem::exists(r.log_path));
    CHECK(std::filesystem::exists(r.transcript_path));
    CHECK(std::filesystem::exists(r.guidelines_path));
    CHECK(std::filesystem::exists(r.runconfig_path));
    CHECK(std::filesystem::exists(r.report_path));
    const metrics::RunLog reread = metrics::read_log_csv(r.log_path);
    CHECK(reread.size() == r.log.size());
}

TEST_CASE("guidelines only grow on Bad evaluations in a coached run") {
    RunConfig cfg = quick_config("MC", 17, 90.0);
    const RunResult r = run_condition(cfg);
    CHECK(static_cast<int>(r.guidelines.size()) <= r.bad_evaluation_count);
    if (r.bad_evaluation_count == 0) CHECK(r.guidelines.empty());
    // A demonstrations-only run never grows guidelines.
    const RunResult d = run_condition(quick_config("DC", 17, 60.0));
    CHECK(d.guidelines.empty());
    CHECK(d.evaluation_count == 0);
}

TEST_CASE("identical run configs replay to byte-identical logs") {
    const RunConfig cfg = quick_config("FR", 23, 60.0);
    const RunResult a = run_condition(cfg);
    const RunResult b = run_condition(cfg);
    CHECK(metrics::log_to_csv(a.log) == metrics::log_to_csv(b.log));
}

TEST_CASE("aggregate groups by condition and round-trips through CSV") {
    std::vector<RunResult> results;
    for (std::uint64_t seed : {1ull, 2ull}) {
        results.push_back(run_condition(quick_config("DC", seed, 30.0)));
        results.push_back(run_condition(quick_config("DR", seed, 30.0)));
    }
    const auto rows = aggregate(results);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].condition.code() == "DC");
    CHECK(rows[0].run_count == 2);
    CHECK(rows[1].condition.code() == "DR");

    const std::string csv = aggregate_to_csv(rows);
    const auto parsed = aggregate_from_csv(csv);
    REQUIRE(parsed.size() == rows.size());
    CHECK(aggregate_to_csv(parsed) == csv);
}

TEST_CASE("run config JSON persists every field the replay needs") {
    RunConfig cfg = quick_config("FC", 5, 45.0);
    cfg.demo_count = 4;
    cfg.memory_capacity = 7;
    cfg.coach_cadence = 3;
    const std::string text = run_config_to_json(cfg);
    const RunConfig back = run_config_from_json(text);
    CHECK(back.condition == cfg.condition);
    CHECK(back.seed == cfg.seed);
    CHECK(back.duration_s == cfg.duration_s);
    CHECK(back.demo_count == 4);
    CHECK(back.memory_capacity == 7);
    CHECK(back.coach_cadence == 3);
    CHECK(back.scenario.npc_vehicle_count == cfg.scenario.npc_vehicle_count);
    CHECK(back.scenario.seed == cfg.scenario.seed);
}

TEST_CASE("invalid dt is rejected by the run loop") {
    RunConfig cfg = quick_config("DC", 1, 10.0);
    cfg.scenario.dt = 0.3;  // does not divide one second
    CHECK_THROWS_AS(run_condition(cfg), std::invalid_argument);
}
