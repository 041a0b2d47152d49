#include <doctest.h>

#include "coachsim/parsers.hpp"
#include "coachsim/prompts.hpp"
#include "coachsim/remote_backend.hpp"
#include "coachsim/rule_backend.hpp"

using namespace coachsim;
using namespace coachsim::reasoning;

namespace {

agent::PerceptionSnapshot basic_snapshot() {
    agent::PerceptionSnapshot s;
    s.tick = 7;
    s.ego_speed = 5.0;
    s.speed_limit = 8.33;
    return s;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("driver prompt with no demos or guidelines still carries the CoT instruction") {
    agent::ShortTermMemory mem(5);
    const PromptBundle b = build_driver_prompt(basic_snapshot(), mem, {}, {});
    CHECK(b.user_text.find("Think Step by Step") != std::string::npos);
    CHECK(b.user_text.find("## Perception") != std::string::npos);
    CHECK(count_occurrences(b.user_text, "Demonstration ") == 0);
    CHECK(b.system_text.find("ACCELERATE_GENTLE") != std::string::npos);
    CHECK(b.system_text.find("PROCEED_STRAIGHT") != std::string::npos);
}

TEST_CASE("driver prompt renders each demonstration as its own block, in order") {
    agent::ShortTermMemory mem(5);
    std::vector<demos::DemonstrationRecord> three(
        demos::select_demos(demos::builtin_sample_set(), demos::StyleTag::Cautious, 3, 9));
    REQUIRE(three.size() == 3);
    const PromptBundle b = build_driver_prompt(basic_snapshot(), mem, three, {});
    CHECK(count_occurrences(b.user_text, "Demonstration ") == 3);
    CHECK(b.user_text.find("Demonstration 1:") < b.user_text.find("Demonstration 2:"));
    CHECK(b.user_text.find("Demonstration 2:") < b.user_text.find("Demonstration 3:"));
    CHECK(b.user_text.find(three[0].situation) != std::string::npos);
}

TEST_CASE("identical inputs produce byte-identical prompts") {
    agent::ShortTermMemory mem(5);
    mem.push({3, "a situation", "a thought", agent::AtomicAction::Maintain});
    const auto demo = demos::select_demos(demos::builtin_sample_set(), demos::StyleTag::Risky, 2, 4);
    const PromptBundle a = build_driver_prompt(basic_snapshot(), mem, demo, {"Mind the gap."});
    const PromptBundle b = build_driver_prompt(basic_snapshot(), mem, demo, {"Mind the gap."});
    CHECK(a.system_text == b.system_text);
    CHECK(a.user_text == b.user_text);
}

TEST_CASE("driver response parsing: labeled, multi-action, and free prose") {
    SUBCASE("well-formed labeled response") {
        const auto p = parse_driver_response(
            "Situation: clear road.\nReasoning: nothing ahead.\nAction: ACCELERATE_GENTLE\n");
        REQUIRE(p.has_value());
        CHECK(p->action == agent::AtomicAction::AccelerateGentle);
        CHECK(p->situation == "clear road.");
        CHECK(p->reasoning == "nothing ahead.");
    }
    SUBCASE("first vocabulary token wins") {
        const auto p = parse_driver_response("Action: CHANGE_LANE_LEFT then BRAKE_HARD");
        REQUIRE(p.has_value());
        CHECK(p->action == agent::AtomicAction::ChangeLaneLeft);
    }
    SUBCASE("case-insensitive free-form text") {
        const auto p = parse_driver_response("I think we should brake_hard right now");
        REQUIRE(p.has_value());
        CHECK(p->action == agent::AtomicAction::BrakeHard);
    }
    SUBCASE("prose without any action token fails to parse") {
        CHECK(!parse_driver_response("The weather is lovely, the road hums along.").has_value());
    }
    SUBCASE("empty input fails to parse, does not crash") {
        CHECK(!parse_driver_response("").has_value());
    }
}

TEST_CASE("coach response parsing tolerates formats") {
    SUBCASE("labeled verdict") {
        const auto v = parse_coach_response("Verdict: Good. Reason: steady driving.");
        REQUIRE(v.has_value());
        CHECK(!v->bad);
        CHECK(v->reason == "steady driving.");
    }
    SUBCASE("terse dash format") {
        const auto v = parse_coach_response("BAD \xE2\x80\x94 tailgating");
        REQUIRE(v.has_value());
        CHECK(v->bad);
        CHECK(v->reason == "tailgating");
    }
    SUBCASE("no verdict token") {
        CHECK(!parse_coach_response("The driver did things.").has_value());
    }
    SUBCASE("verdict must be a standalone word") {
        CHECK(!parse_coach_response("goodness gracious badges").has_value());
    }
}

TEST_CASE("token_to_timestep maps the documented range") {
    CHECK(token_to_timestep(0) == doctest::Approx(0.0015).epsilon(1e-12));
    CHECK(token_to_timestep(1000) == doctest::Approx(0.0008).epsilon(1e-12));
    CHECK(token_to_timestep(5000) == doctest::Approx(0.0008).epsilon(1e-12));
    CHECK(token_to_timestep(500) == doctest::Approx(0.00115).epsilon(1e-12));
    double prev = 1.0;
    for (int t = 0; t <= 1500; t += 25) {
        const double dt = token_to_timestep(t);
        CHECK(dt <= 0.0015);
        CHECK(dt >= 0.0008);
        CHECK(dt <= prev);
        prev = dt;
    }
}

TEST_CASE("rule backend: profile-dependent acceleration on an empty road") {
    const sim::DynamicsParams dyn;
    agent::ShortTermMemory mem(5);
    agent::PerceptionSnapshot snap = basic_snapshot();

    SUBCASE("cautious below target accelerates gently") {
        snap.ego_speed = 3.0;
        DriverRuleContext ctx{&snap, &mem, nullptr};
        const auto resp = rule_send(ctx, cautious_profile(), dyn);
        const auto parsed = parse_driver_response(resp.text);
        REQUIRE(parsed.has_value());
        CHECK(parsed->action == agent::AtomicAction::AccelerateGentle);
    }
    SUBCASE("risky below target accelerates hard") {
        snap.ego_speed = 3.0;
        DriverRuleContext ctx{&snap, &mem, nullptr};
        const auto resp = rule_send(ctx, risky_profile(), dyn);
        const auto parsed = parse_driver_response(resp.text);
        REQUIRE(parsed.has_value());
        CHECK(parsed->action == agent::AtomicAction::AccelerateHard);
    }
    SUBCASE("red signal inside stopping distance wins for every profile") {
        snap.ego_speed = 1.0;
        snap.signal = agent::SignalPhase::Red;
        snap.distance_to_intersection = 3.0;
        for (const StyleProfile& p : {cautious_profile(), neutral_profile(), risky_profile()}) {
            DriverRuleContext ctx{&snap, &mem, nullptr};
            const auto parsed = parse_driver_response(rule_send(ctx, p, dyn).text);
            REQUIRE(parsed.has_value());
            CHECK(parsed->action == agent::AtomicAction::StopAndWait);
        }
    }
}

TEST_CASE("rule backend is a pure function of its inputs") {
    const sim::DynamicsParams dyn;
    agent::ShortTermMemory mem(5);
    agent::PerceptionSnapshot snap = basic_snapshot();
    snap.pedestrian_gap = 12.0;
    const std::vector<std::string> guidelines{"Reduce speed when pedestrians are within stopping distance ahead."};
    DriverRuleContext ctx{&snap, &mem, &guidelines};
    const auto a = rule_send(ctx, neutral_profile(), dyn);
    const auto b = rule_send(ctx, neutral_profile(), dyn);
    CHECK(a.text == b.text);
    CHECK(a.token_count == b.token_count);
    CHECK(a.token_count == estimate_token_count(a.text));
}

TEST_CASE("guideline texts modulate the effective profile deterministically") {
    const StyleProfile base = neutral_profile();
    SUBCASE("safety guidelines widen margins") {
        const EffectiveProfile eff = apply_guidelines(
            base, {"Reduce speed when pedestrians are within stopping distance ahead.",
                   "Begin braking early when approaching a red signal.",
                   "Keep a larger following distance behind the leading vehicle."});
        CHECK(eff.pedestrian_margin_scale == doctest::Approx(1.5));
        CHECK(eff.signal_margin_scale == doctest::Approx(1.5));
        CHECK(eff.base.headway_threshold_s == doctest::Approx(2.2));
    }
    SUBCASE("cautious style guidelines anchor pace down") {
        const EffectiveProfile eff = apply_guidelines(
            base, {"Prefer gentle acceleration and smooth maneuvers.",
                   "Keep cruising speed comfortably below the limit."});
        CHECK(eff.base.hard_action_bias <= 0.2);
        CHECK(eff.base.speed_fraction == doctest::Approx(0.70));
    }
    SUBCASE("risky style guidelines anchor pace up") {
        const EffectiveProfile eff = apply_guidelines(
            base, {"Avoid unnecessary braking; keep momentum.",
                   "Accelerate assertively up to the traffic flow speed."});
        CHECK(eff.base.hard_action_bias >= 0.7);
        CHECK(eff.base.speed_fraction == doctest::Approx(1.10));
    }
    SUBCASE("unknown texts change nothing") {
        const EffectiveProfile eff = apply_guidelines(base, {"Sing while driving."});
        CHECK(eff.base.speed_fraction == doctest::Approx(base.speed_fraction));
        CHECK(eff.pedestrian_margin_scale == doctest::Approx(1.0));
    }
}

TEST_CASE("situation text parses back to the numbers it rendered") {
    agent::PerceptionSnapshot snap = basic_snapshot();
    snap.signal = agent::SignalPhase::Red;
    snap.distance_to_intersection = 18.0;
    snap.pedestrian_gap = 7.5;
    snap.leader_gap = 12.0;
    snap.leader_speed = 4.0;
    const ParsedSituation p = parse_situation_line(situation_text(snap));
    CHECK(p.speed == doctest::Approx(5.0));
    CHECK(p.limit == doctest::Approx(8.3));
    CHECK(p.signal_red_dist == doctest::Approx(18.0));
    CHECK(p.pedestrian_dist == doctest::Approx(7.5));
    CHECK(p.leader_dist == doctest::Approx(12.0));
    CHECK(p.leader_speed == doctest::Approx(4.0));
}

TEST_CASE("backend config validation") {
    BackendConfig cfg;
    cfg.kind = BackendKind::RemoteChat;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // endpoint missing
    cfg.endpoint = "http://127.0.0.1:9999/v1";
    CHECK_NOTHROW(cfg.validate());
    cfg.auth_env.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
