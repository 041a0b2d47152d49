#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "coachsim/analysis.hpp"

using namespace coachsim::analysis;

namespace {

RankingResponse ranking(const std::string& pid, const std::string& group,
                        std::map<std::string, int> ranks, double time_s = 120.0,
                        std::string trap = "B") {
    RankingResponse r;
    r.participant = pid;
    r.group = group;
    r.ranks = std::move(ranks);
    r.answer_time_s = time_s;
    r.trap_answer = std::move(trap);
    return r;
}

}  // namespace

TEST_CASE("filter_valid enforces the minimum time and the trap answer") {
    std::vector<RankingResponse> responses{
        ranking("slow", "Cautious", {{"DC", 1}}, 30.0, "B"),
        ranking("wrong-trap", "Cautious", {{"DC", 1}}, 120.0, "C"),
        ranking("ok", "Cautious", {{"DC", 1}}, 120.0, "B"),
    };
    const auto valid = filter_valid(responses, 60.0, "B");
    REQUIRE(valid.size() == 1);
    CHECK(valid[0].participant == "ok");
    // Idempotence.
    const auto again = filter_valid(valid, 60.0, "B");
    CHECK(again.size() == valid.size());
}

TEST_CASE("ranking_frequency tallies cells and its marginals equal the response count") {
    const std::map<std::string, int> order{{"DC", 3}, {"FC", 2}, {"MC", 1}};
    std::vector<RankingResponse> responses{
        ranking("p1", "Cautious", order),
        ranking("p2", "Cautious", order),
        ranking("p3", "Cautious", order),
        ranking("p4", "Risky", {{"DR", 1}, {"FR", 2}, {"MR", 3}}),
    };
    SUBCASE("identical rankings concentrate one cell per clip") {
        const auto table = ranking_frequency(responses, "Cautious");
        CHECK(table.at("DC").at(3) == 3);
        CHECK(table.at("FC").at(2) == 3);
        CHECK(table.at("MC").at(1) == 3);
    }
    SUBCASE("permuted rankings spread uniformly") {
        std::vector<RankingResponse> perms{
            ranking("p1", "G", {{"a", 1}, {"b", 2}, {"c", 3}}),
            ranking("p2", "G", {{"a", 2}, {"b", 3}, {"c", 1}}),
            ranking("p3", "G", {{"a", 3}, {"b", 1}, {"c", 2}}),
        };
        const auto table = ranking_frequency(perms, "G");
        for (const auto& clip : {"a", "b", "c"}) {
            for (int rank = 1; rank <= 3; ++rank) CHECK(table.at(clip).at(rank) == 1);
        }
    }
    SUBCASE("marginals: each clip's counts sum to the group's response count") {
        const auto table = ranking_frequency(responses, "Cautious");
        for (const auto& [clip, counts] : table) {
            int total = 0;
            for (const auto& [rank, count] : counts) total += count;
            CHECK(total == 3);
        }
    }
    SUBCASE("a mixed five-response fixture matches a hand tally") {
        std::vector<RankingResponse> five{
            ranking("p1", "G", {{"x", 1}, {"y", 2}}), ranking("p2", "G", {{"x", 1}, {"y", 2}}),
            ranking("p3", "G", {{"x", 2}, {"y", 1}}), ranking("p4", "G", {{"x", 1}, {"y", 2}}),
            ranking("p5", "G", {{"x", 2}, {"y", 1}}),
        };
        const auto table = ranking_frequency(five, "G");
        CHECK(table.at("x").at(1) == 3);
        CHECK(table.at("x").at(2) == 2);
        CHECK(table.at("y").at(1) == 2);
        CHECK(table.at("y").at(2) == 3);
    }
    SUBCASE("non-permutation ranks are rejected") {
        std::vector<RankingResponse> bad{ranking("p", "G", {{"x", 1}, {"y", 1}})};
        CHECK_THROWS_AS(ranking_frequency(bad, "G"), std::invalid_argument);
    }
}

TEST_CASE("pearson: exact fixtures") {
    SUBCASE("perfect correlation") {
        const auto c = pearson({1, 2, 3, 4}, {1, 2, 3, 4});
        CHECK(c.r == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.p == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("perfect anticorrelation") {
        const auto c = pearson({1, 2, 3, 4}, {-1, -2, -3, -4});
        CHECK(c.r == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("the fixed r = 0.6 fixture") {
        const auto c = pearson({1, 2, 3, 4}, {2, 1, 4, 3});
        CHECK(c.r == doctest::Approx(0.6).epsilon(1e-9));
        CHECK(c.n == 4);
        CHECK(c.p > 0.0);
        CHECK(c.p < 1.0);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), std::invalid_argument);
        CHECK_THROWS_AS(pearson({1, 2, 3}, {1, 2}), std::invalid_argument);
        CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
    }
}

TEST_CASE("pearson invariances: affine maps and sign flips") {
    const std::vector<double> x{0.3, 1.7, 2.9, 3.1, 5.6, 6.2};
    const std::vector<double> y{1.2, 0.7, 2.4, 3.3, 3.1, 5.0};
    const double r0 = pearson(x, y).r;
    std::vector<double> x_affine;
    for (double v : x) x_affine.push_back(2.5 * v + 7.0);
    CHECK(pearson(x_affine, y).r == doctest::Approx(r0).epsilon(1e-12));
    std::vector<double> x_neg;
    for (double v : x) x_neg.push_back(-v);
    CHECK(pearson(x_neg, y).r == doctest::Approx(-r0).epsilon(1e-12));
}

TEST_CASE("score correlations produce the three labeled pairs") {
    std::vector<ScoreResponse> responses;
    for (int i = 0; i < 8; ++i) {
        ScoreResponse s;
        s.participant = "p" + std::to_string(i);
        s.clip = "DC";
        s.riskiness = i;
        s.intelligence = 8.0 - i * 0.7;
        s.human_likeness = 1.0 + i * 0.9;
        s.answer_time_s = 120;
        s.trap_answer = "B";
        responses.push_back(s);
    }
    const auto cs = score_correlations(responses);
    REQUIRE(cs.size() == 3);
    CHECK(cs[0].pair == "R-H");
    CHECK(cs[1].pair == "R-I");
    CHECK(cs[2].pair == "H-I");
    CHECK(cs[0].r > 0.9);   // riskiness tracks human-likeness in this fixture
    CHECK(cs[1].r < -0.9);  // and anti-tracks intelligence
}

TEST_CASE("sign test: exact two-tailed binomial") {
    CHECK(sign_test_p(0, 0) == doctest::Approx(1.0));
    CHECK(sign_test_p(5, 5) == doctest::Approx(1.0).epsilon(1e-9));
    // 8 wins, 0 losses: 2 * (1/2)^8 = 0.0078125.
    CHECK(sign_test_p(8, 0) == doctest::Approx(0.0078125).epsilon(1e-9));
    CHECK(sign_test_p(0, 8) == doctest::Approx(0.0078125).epsilon(1e-9));

    std::vector<RankingResponse> responses;
    for (int i = 0; i < 6; ++i) {
        responses.push_back(ranking("p" + std::to_string(i), "G", {{"a", 1}, {"b", 2}}));
    }
    const auto st = sign_test_ranks(responses, "G", "a", "b");
    CHECK(st.wins == 6);
    CHECK(st.losses == 0);
    CHECK(st.p == doctest::Approx(2.0 * std::pow(0.5, 6)).epsilon(1e-9));
}

TEST_CASE("CSV ingestion assembles long-format rankings and validates scores") {
    const std::string rankings_csv =
        "participant,group,clip,rank,reason,answer_time_s,trap_answer\n"
        "p1,Cautious,DC,3,\"steady, calm\",120,B\n"
        "p1,Cautious,FC,2,\"steady, calm\",120,B\n"
        "p1,Cautious,MC,1,\"steady, calm\",120,B\n"
        "p2,Risky,DR,1,fast,95,B\n"
        "p2,Risky,FR,2,fast,95,B\n"
        "p2,Risky,MR,3,fast,95,B\n";
    const auto rankings = parse_rankings_csv(rankings_csv);
    REQUIRE(rankings.size() == 2);
    CHECK(rankings[0].ranks.size() == 3);
    CHECK(rankings[0].ranks.at("MC") == 1);
    CHECK(rankings[0].reason == "steady, calm");

    const std::string scores_csv =
        "participant,clip,intelligence,riskiness,human_likeness,reason,answer_time_s,trap_answer\n"
        "p1,DC,7,2,6,fine,100,B\n";
    const auto scores = parse_scores_csv(scores_csv);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].riskiness == doctest::Approx(2.0));

    const std::string bad_scores =
        "participant,clip,intelligence,riskiness,human_likeness,reason,answer_time_s,trap_answer\n"
        "p1,DC,7,12,6,fine,100,B\n";
    CHECK_THROWS_AS(parse_scores_csv(bad_scores), std::invalid_argument);
}
