#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coachsim::analysis {

struct RankingResponse {
    std::string participant;
    std::string group;  // Demonstrations | Feedback | Cautious | Risky
    std::map<std::string, int> ranks;  // clip -> rank, 1 = most risky
    std::string reason;
    double answer_time_s = 0.0;
    std::string trap_answer;
};

struct ScoreResponse {
    std::string participant;
    std::string clip;
    double intelligence = 0.0;   // [0, 10]
    double riskiness = 0.0;      // [0, 10]
    double human_likeness = 0.0; // [0, 10]
    std::string reason;
    double answer_time_s = 0.0;
    std::string trap_answer;
};

/// Keeps responses that answered at least `min_time_s` and gave the
/// expected trap answer. Idempotent.
template <typename Response>
std::vector<Response> filter_valid(const std::vector<Response>& responses, double min_time_s,
                                   const std::string& expected_trap) {
    std::vector<Response> out;
    for (const Response& r : responses) {
        if (r.answer_time_s >= min_time_s && r.trap_answer == expected_trap) out.push_back(r);
    }
    return out;
}

/// (clip, rank) frequency table for one group. Throws when a response's
/// ranks are not a permutation of 1..group size.
std::map<std::string, std::map<int, int>> ranking_frequency(
    const std::vector<RankingResponse>& responses, const std::string& group);

struct CorrelationResult {
    std::string pair;  // e.g. "R-H"
    double r = 0.0;
    int n = 0;
    double p = 1.0;  // two-tailed
};

/// Product-moment correlation with significance from
/// t = r * sqrt((n-2) / (1-r^2)) against Student's t with n-2 dof.
/// Requires equal lengths, n >= 3 and nonzero variance in both series.
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y,
                          const std::string& pair_label = "");

/// All three pairwise correlations (R-H, R-I, H-I) over per-response scores.
std::vector<CorrelationResult> score_correlations(const std::vector<ScoreResponse>& responses);

struct SignTestResult {
    std::string label;
    int wins = 0;    // first ranked riskier (lower rank number)
    int losses = 0;
    int ties = 0;
    double p = 1.0;  // exact two-tailed binomial
};

/// Paired sign test on the ranks two clips received from the same
/// participants within a group.
SignTestResult sign_test_ranks(const std::vector<RankingResponse>& responses,
                               const std::string& group, const std::string& clip_a,
                               const std::string& clip_b);

/// Exact two-tailed binomial sign test p-value for (wins, losses).
double sign_test_p(int wins, int losses);

// CSV ingestion. Rankings are long-format rows
//   participant,group,clip,rank,reason,answer_time_s,trap_answer
// assembled per (participant, group); scores are one row per clip
//   participant,clip,intelligence,riskiness,human_likeness,reason,answer_time_s,trap_answer
std::vector<RankingResponse> parse_rankings_csv(const std::string& text);
std::vector<RankingResponse> load_rankings_csv(const std::string& path);
std::vector<ScoreResponse> parse_scores_csv(const std::string& text);
std::vector<ScoreResponse> load_scores_csv(const std::string& path);

}  // namespace coachsim::analysis
