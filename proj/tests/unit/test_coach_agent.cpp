#include <doctest.h>

#include "coachsim/coach_agent.hpp"
#include "coachsim/rule_backend.hpp"

using namespace coachsim;
using namespace coachsim::coach;

namespace {

agent::MemoryUnit make_unit(long tick, const std::string& situation, agent::AtomicAction action) {
    return {tick, situation, "because", action};
}

std::string calm_situation(long tick) {
    return "t=" + std::to_string(tick) +
           ": speed 5.0 m/s, limit 8.3 m/s, lane change left open right blocked";
}

Guideline make_guideline(int id, const std::string& text) {
    Guideline g;
    g.id = id;
    g.text = text;
    g.source_evaluation_id = 0;
    return g;
}

struct FailingBackend : reasoning::ReasoningBackend {
    reasoning::BackendKind kind() const override { return reasoning::BackendKind::RemoteChat; }
    reasoning::ReasoningResponse send_driver(const reasoning::PromptBundle&,
                                             const reasoning::DriverRuleContext&) override {
        return {"", 0, false, "down"};
    }
    reasoning::ReasoningResponse send_coach(const reasoning::PromptBundle&,
                                            const reasoning::CoachRuleContext&) override {
        return {"", 0, false, "down"};
    }
};

}  // namespace

TEST_CASE("guideline store: append, dedupe, FIFO eviction") {
    SUBCASE("first insert") {
        GuidelinesStore store;
        CHECK(store.add(make_guideline(0, "Yield to pedestrians.")));
        CHECK(store.size() == 1);
    }
    SUBCASE("normalized duplicates are dropped") {
        GuidelinesStore store;
        CHECK(store.add(make_guideline(0, "Yield to pedestrians.")));
        CHECK(!store.add(make_guideline(1, "  yield   TO pedestrians. ")));
        CHECK(store.size() == 1);
    }
    SUBCASE("capacity evicts the oldest") {
        GuidelinesStore store(3);
        for (int i = 1; i <= 4; ++i) {
            store.add(make_guideline(i, "guideline " + std::to_string(i)));
        }
        REQUIRE(store.size() == 3);
        CHECK(store.items()[0].text == "guideline 2");
        CHECK(store.items()[1].text == "guideline 3");
        CHECK(store.items()[2].text == "guideline 4");
    }
    SUBCASE("pairwise-distinct normalized texts at all times") {
        GuidelinesStore store(5);
        store.add(make_guideline(0, "A b c"));
        store.add(make_guideline(1, "a B C"));
        store.add(make_guideline(2, "something else"));
        const auto texts = store.texts();
        for (std::size_t i = 0; i < texts.size(); ++i) {
            for (std::size_t j = i + 1; j < texts.size(); ++j) {
                CHECK(GuidelinesStore::normalize(texts[i]) != GuidelinesStore::normalize(texts[j]));
            }
        }
    }
}

TEST_CASE("evaluate: calm maintaining memory with cautious demos is Good") {
    agent::ShortTermMemory mem(5);
    for (long t = 1; t <= 5; ++t) {
        mem.push(make_unit(t, calm_situation(t), agent::AtomicAction::Maintain));
    }
    reasoning::RuleBackend backend(reasoning::cautious_profile(), {});
    GuidelinesStore store;
    const auto demos_for_coach =
        demos::select_demos(demos::builtin_sample_set(), demos::StyleTag::Cautious, 3, 1);
    const auto ev = evaluate(mem, demos_for_coach, store, backend);
    REQUIRE(ev.has_value());
    CHECK(ev->verdict == Verdict::Good);
    CHECK(!ev->reason.empty());
}

TEST_CASE("evaluate: accelerating at a close pedestrian is Bad with a pedestrian reason") {
    agent::ShortTermMemory mem(5);
    mem.push(make_unit(3, "t=3: speed 5.0 m/s, limit 8.3 m/s, pedestrian in lane 8.0 m ahead",
                       agent::AtomicAction::AccelerateHard));
    reasoning::RuleBackend backend(reasoning::neutral_profile(), {});
    GuidelinesStore store;
    const auto ev = evaluate(mem, {}, store, backend);
    REQUIRE(ev.has_value());
    CHECK(ev->verdict == Verdict::Bad);
    CHECK(ev->reason.find("pedestrian") != std::string::npos);
}

TEST_CASE("evaluate: a stored guideline is cited when its predicate fires") {
    agent::ShortTermMemory mem(5);
    mem.push(make_unit(9, "t=9: speed 5.0 m/s, limit 8.3 m/s, pedestrian in lane 8.0 m ahead",
                       agent::AtomicAction::AccelerateGentle));
    reasoning::RuleBackend backend(reasoning::neutral_profile(), {});
    GuidelinesStore store;
    store.add(make_guideline(0, "yield to pedestrians at crosswalks"));
    const auto ev = evaluate(mem, {}, store, backend);
    REQUIRE(ev.has_value());
    CHECK(ev->verdict == Verdict::Bad);
    CHECK(ev->reason.find("yield to pedestrians at crosswalks") != std::string::npos);
}

TEST_CASE("evaluate: rule verdicts are a pure function of their inputs") {
    agent::ShortTermMemory mem(5);
    mem.push(make_unit(1, "t=1: speed 7.8 m/s, limit 8.3 m/s", agent::AtomicAction::Maintain));
    reasoning::RuleBackend backend(reasoning::cautious_profile(), {});
    GuidelinesStore store;
    const auto demos_for_coach =
        demos::select_demos(demos::builtin_sample_set(), demos::StyleTag::Cautious, 2, 3);
    const auto a = evaluate(mem, demos_for_coach, store, backend);
    const auto b = evaluate(mem, demos_for_coach, store, backend);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->verdict == b->verdict);
    CHECK(a->reason == b->reason);
    // 7.8 m/s is above the cautious comfort pace: style predicate fires.
    CHECK(a->verdict == Verdict::Bad);
}

TEST_CASE("evaluate requires a non-empty memory") {
    agent::ShortTermMemory mem(5);
    reasoning::RuleBackend backend(reasoning::neutral_profile(), {});
    GuidelinesStore store;
    CHECK_THROWS_AS(evaluate(mem, {}, store, backend), std::invalid_argument);
}

TEST_CASE("evaluate: backend failure skips the cycle instead of aborting") {
    agent::ShortTermMemory mem(5);
    mem.push(make_unit(1, calm_situation(1), agent::AtomicAction::Maintain));
    FailingBackend backend;
    GuidelinesStore store;
    const auto ev = evaluate(mem, {}, store, backend);
    CHECK(!ev.has_value());
}

TEST_CASE("generate_guideline templates address the fired predicate") {
    agent::ShortTermMemory mem(5);
    reasoning::RuleBackend backend(reasoning::neutral_profile(), {});
    SUBCASE("pedestrian proximity") {
        Evaluation ev;
        ev.verdict = Verdict::Bad;
        ev.reason = "unit at t=3 accelerates while a pedestrian is only 8.0 m ahead within stopping distance";
        const Guideline g = generate_guideline(ev, mem, backend);
        CHECK(g.text.find("pedestrian") != std::string::npos);
        CHECK(g.text.find("stopping distance") != std::string::npos);
    }
    SUBCASE("red-light approach") {
        Evaluation ev;
        ev.verdict = Verdict::Bad;
        ev.reason = "unit at t=4 keeps speed toward a red signal 12.0 m ahead";
        const Guideline g = generate_guideline(ev, mem, backend);
        CHECK(g.text.find("red signal") != std::string::npos);
    }
    SUBCASE("calling on Good is a contract violation") {
        Evaluation ev;
        ev.verdict = Verdict::Good;
        ev.reason = "fine";
        CHECK_THROWS_AS(generate_guideline(ev, mem, backend), std::invalid_argument);
    }
}

TEST_CASE("add_guideline value API preserves dedupe semantics") {
    GuidelinesStore store;
    store = add_guideline(store, make_guideline(0, "g1"));
    store = add_guideline(store, make_guideline(1, "g1"));
    CHECK(store.size() == 1);
    store = add_guideline(store, make_guideline(2, "g2"));
    CHECK(store.size() == 2);
}

TEST_CASE("every guideline source must be a Bad evaluation") {
    // generate_guideline enforces the invariant; exercised above. Here the
    // store itself accepts only what the run loop produces from Bad
    // verdicts, so source ids recorded are the Bad evaluation ids.
    GuidelinesStore store;
    Guideline g = make_guideline(0, "from a bad verdict");
    g.source_evaluation_id = 17;
    store.add(g);
    CHECK(store.items().front().source_evaluation_id == 17);
}
