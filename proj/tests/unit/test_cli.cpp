#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "coachsim/cli.hpp"

namespace fs = std::filesystem;

namespace {

int call(std::vector<const char*> args) {
    args.insert(args.begin(), "coachsim");
    return coachsim::cli::run_cli(static_cast<int>(args.size()), args.data());
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("coachsim_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    out << contents;
}

}  // namespace

TEST_CASE("usage errors exit with the dedicated code") {
    CHECK(call({}) == 2);
    CHECK(call({"run"}) == 2);                            // missing --condition
    CHECK(call({"run", "--condition", "XX"}) == 2);       // unknown code
    CHECK(call({"frobnicate"}) == 2);                     // unknown subcommand
    CHECK(call({"run", "--condition", "MN"}) == 2);       // excluded cell
}

TEST_CASE("run, replay and report operate on the same artifacts") {
    TempDir dir;
    const std::string out = dir.str("runs");
    CHECK(call({"run", "--condition", "MC", "--seed", "11", "--backend", "rule", "--duration", "20",
                "--out", out.c_str(), "--aggressive"}) == 0);
    const fs::path run_dir = fs::path(out) / "MC_seed11";
    CHECK(fs::exists(run_dir / "log.csv"));
    CHECK(fs::exists(run_dir / "transcript.txt"));
    CHECK(fs::exists(run_dir / "guidelines.jsonl"));
    CHECK(fs::exists(run_dir / "runconfig.json"));
    CHECK(fs::exists(run_dir / "report.json"));

    CHECK(call({"replay", "--run-dir", run_dir.string().c_str()}) == 0);

    const std::string report_out = dir.str("report");
    CHECK(call({"report", "--runs", out.c_str(), "--out", report_out.c_str()}) == 0);
    CHECK(fs::exists(fs::path(report_out) / "aggregate.csv"));
    CHECK(fs::exists(fs::path(report_out) / "collision_rate.svg"));
    CHECK(fs::exists(fs::path(report_out) / "avg_speed.svg"));
    CHECK(fs::exists(fs::path(report_out) / "avg_throttle.svg"));
    CHECK(fs::exists(fs::path(report_out) / "avg_brake.svg"));

    // Re-running the report overwrites identically.
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string first = slurp(fs::path(report_out) / "avg_speed.svg");
    CHECK(call({"report", "--runs", out.c_str(), "--out", report_out.c_str()}) == 0);
    CHECK(slurp(fs::path(report_out) / "avg_speed.svg") == first);
}

TEST_CASE("report on an empty directory is a runtime error") {
    TempDir dir;
    CHECK(call({"report", "--runs", dir.str("nothing").c_str(), "--out", dir.str("r").c_str()}) == 1);
}

TEST_CASE("validate-demos accepts the bundled sample and rejects a broken file") {
    TempDir dir;
    const fs::path sample = fs::path(__FILE__).parent_path().parent_path().parent_path() / "data" /
                            "demos_sample.jsonl";
    CHECK(call({"validate-demos", "--input", sample.string().c_str()}) == 0);

    const std::string bad = dir.str("bad.jsonl");
    write_file(bad, R"({"situation": "s", "style": "risky", "driver_id": "d"})" "\n");
    CHECK(call({"validate-demos", "--input", bad.c_str()}) == 1);
}

TEST_CASE("score-mdsi writes a scores table") {
    TempDir dir;
    const std::string input = dir.str("mdsi.csv");
    write_file(input,
               "#scale,0,5\n"
               "participant_id,q1:risky,q2:cautious,q3:cautious_negative,q4:cautious_negative\n"
               "p1,4,1,2,0\n");
    const std::string out = dir.str("scores.csv");
    CHECK(call({"score-mdsi", "--input", input.c_str(), "--out", out.c_str()}) == 0);
    std::ifstream in(out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "participant,score");
    CHECK(row == "p1,5");  // 4 - (1 - 2 - 0)
}

TEST_CASE("analyze produces frequency, sign-test and correlation tables") {
    TempDir dir;
    const std::string rankings = dir.str("rankings.csv");
    write_file(rankings,
               "participant,group,clip,rank,reason,answer_time_s,trap_answer\n"
               "p1,Cautious,DC,3,calm,120,B\n"
               "p1,Cautious,FC,2,calm,120,B\n"
               "p1,Cautious,MC,1,calm,120,B\n"
               "p2,Cautious,DC,3,calm,90,B\n"
               "p2,Cautious,FC,1,calm,90,B\n"
               "p2,Cautious,MC,2,calm,90,B\n"
               "p3,Cautious,DC,1,rushed,10,B\n"
               "p3,Cautious,FC,2,rushed,10,B\n"
               "p3,Cautious,MC,3,rushed,10,B\n");
    const std::string scores = dir.str("scores.csv");
    std::string scores_text =
        "participant,clip,intelligence,riskiness,human_likeness,reason,answer_time_s,trap_answer\n";
    for (int i = 0; i < 6; ++i) {
        scores_text += "p" + std::to_string(i) + ",MC," + std::to_string(7 - i) + "," +
                       std::to_string(i) + "," + std::to_string(2 + i) + ",why,100,B\n";
    }
    write_file(scores, scores_text);
    const std::string out = dir.str("analysis");
    CHECK(call({"analyze", "--rankings", rankings.c_str(), "--scores", scores.c_str(), "--min-time",
                "60", "--trap", "B", "--out", out.c_str()}) == 0);
    CHECK(fs::exists(fs::path(out) / "ranking_frequency.csv"));
    CHECK(fs::exists(fs::path(out) / "sign_tests.csv"));
    CHECK(fs::exists(fs::path(out) / "correlations.csv"));
    CHECK(fs::exists(fs::path(out) / "rankings_Cautious.svg"));

    CHECK(call({"analyze", "--out", out.c_str()}) == 2);  // needs at least one input
}
