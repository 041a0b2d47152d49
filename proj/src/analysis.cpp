#include "coachsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "coachsim/csv_util.hpp"

namespace coachsim::analysis {

std::map<std::string, std::map<int, int>> ranking_frequency(
    const std::vector<RankingResponse>& responses, const std::string& group) {
    std::map<std::string, std::map<int, int>> table;
    for (const RankingResponse& r : responses) {
        if (r.group != group) continue;
        const int size = static_cast<int>(r.ranks.size());
        std::vector<bool> seen(static_cast<std::size_t>(size), false);
        for (const auto& [clip, rank] : r.ranks) {
            if (rank < 1 || rank > size || seen[static_cast<std::size_t>(rank - 1)]) {
                throw std::invalid_argument("response from " + r.participant +
                                            " is not a permutation of 1.." + std::to_string(size));
            }
            seen[static_cast<std::size_t>(rank - 1)] = true;
        }
        for (const auto& [clip, rank] : r.ranks) table[clip][rank] += 1;
    }
    return table;
}

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y,
                          const std::string& pair_label) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 samples");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("pearson: zero variance");

    CorrelationResult out;
    out.pair = pair_label;
    out.n = static_cast<int>(n);
    out.r = sxy / std::sqrt(sxx * syy);
    out.r = std::clamp(out.r, -1.0, 1.0);

    const double denom = 1.0 - out.r * out.r;
    if (denom <= 0.0) {
        out.p = 0.0;
    } else {
        const double t = std::fabs(out.r) * std::sqrt(static_cast<double>(n - 2) / denom);
        boost::math::students_t dist(static_cast<double>(n - 2));
        out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
    }
    return out;
}

std::vector<CorrelationResult> score_correlations(const std::vector<ScoreResponse>& responses) {
    std::vector<double> risk, human, intel;
    for (const ScoreResponse& r : responses) {
        risk.push_back(r.riskiness);
        human.push_back(r.human_likeness);
        intel.push_back(r.intelligence);
    }
    return {pearson(risk, human, "R-H"), pearson(risk, intel, "R-I"), pearson(human, intel, "H-I")};
}

double sign_test_p(int wins, int losses) {
    const int n = wins + losses;
    if (n == 0) return 1.0;
    const int k = std::min(wins, losses);
    boost::math::binomial dist(n, 0.5);
    // Two-tailed: twice the smaller tail, capped at 1.
    const double tail = boost::math::cdf(dist, k);
    return std::min(1.0, 2.0 * tail);
}

SignTestResult sign_test_ranks(const std::vector<RankingResponse>& responses,
                               const std::string& group, const std::string& clip_a,
                               const std::string& clip_b) {
    SignTestResult out;
    out.label = clip_a + " vs " + clip_b;
    for (const RankingResponse& r : responses) {
        if (r.group != group) continue;
        const auto a = r.ranks.find(clip_a);
        const auto b = r.ranks.find(clip_b);
        if (a == r.ranks.end() || b == r.ranks.end()) continue;
        if (a->second < b->second) ++out.wins;       // ranked riskier
        else if (a->second > b->second) ++out.losses;
        else ++out.ties;
    }
    out.p = sign_test_p(out.wins, out.losses);
    return out;
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::string& text, std::size_t columns,
                                                 const char* what) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(std::string(what) + ": empty table");
    std::vector<std::vector<std::string>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = csv::split_line(line);
        if (cells.size() != columns) {
            throw std::invalid_argument(std::string(what) + ": line " + std::to_string(line_no) +
                                        " expects " + std::to_string(columns) + " cells");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<RankingResponse> parse_rankings_csv(const std::string& text) {
    std::vector<RankingResponse> out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (const auto& cells : read_table(text, 7, "rankings")) {
        const std::pair<std::string, std::string> key{cells[0], cells[1]};
        auto it = index.find(key);
        if (it == index.end()) {
            RankingResponse r;
            r.participant = cells[0];
            r.group = cells[1];
            r.reason = cells[4];
            r.answer_time_s = std::stod(cells[5]);
            r.trap_answer = cells[6];
            index.emplace(key, out.size());
            out.push_back(std::move(r));
            it = index.find(key);
        }
        out[it->second].ranks[cells[2]] = std::stoi(cells[3]);
    }
    return out;
}

std::vector<ScoreResponse> parse_scores_csv(const std::string& text) {
    std::vector<ScoreResponse> out;
    for (const auto& cells : read_table(text, 8, "scores")) {
        ScoreResponse r;
        r.participant = cells[0];
        r.clip = cells[1];
        r.intelligence = std::stod(cells[2]);
        r.riskiness = std::stod(cells[3]);
        r.human_likeness = std::stod(cells[4]);
        r.reason = cells[5];
        r.answer_time_s = std::stod(cells[6]);
        r.trap_answer = cells[7];
        auto in_range = [](double v) { return v >= 0.0 && v <= 10.0; };
        if (!in_range(r.intelligence) || !in_range(r.riskiness) || !in_range(r.human_likeness)) {
            throw std::invalid_argument("score for " + r.participant + "/" + r.clip +
                                        " outside [0, 10]");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RankingResponse> load_rankings_csv(const std::string& path) {
    return parse_rankings_csv(slurp(path));
}

std::vector<ScoreResponse> load_scores_csv(const std::string& path) {
    return parse_scores_csv(slurp(path));
}

}  // namespace coachsim::analysis
