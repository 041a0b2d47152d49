#include "coachsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "coachsim/analysis.hpp"
#include "coachsim/csv_util.hpp"
#include "coachsim/demonstrations.hpp"
#include "coachsim/experiment.hpp"
#include "coachsim/svg_plot.hpp"
#include "coachsim/world_io.hpp"

namespace coachsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

sim::AggressionParams aggressive_preset() {
    sim::AggressionParams a;
    a.lane_change_prob = 0.04;
    a.red_light_run_prob = 0.08;
    a.jaywalk_prob = 0.04;
    a.desired_speed_multiplier = 1.2;
    return a;
}

struct RunFlags {
    std::string condition;
    std::uint64_t seed = 1;
    std::string backend = "rule";
    double duration = 400.0;
    std::string out = "runs";
    std::string scenario_path;
    std::string demos_path;
    int demo_count = 3;
    int memory_capacity = 5;
    int coach_cadence = 0;
    bool aggressive = false;
    std::string endpoint;
    std::string model = "gpt-4";
    std::string api_key_env = "COACHSIM_API_KEY";
    double timeout = 30.0;
    int retries = 3;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_condition) {
    if (with_condition) {
        cmd->add_option("--condition", f.condition, "Condition code (DC, DN, DR, FC, FN, FR, MC, MR)")
            ->required();
    }
    cmd->add_option("--seed", f.seed, "Run seed");
    cmd->add_option("--backend", f.backend, "Reasoning backend: rule or remote")
        ->check(CLI::IsMember({"rule", "remote"}));
    cmd->add_option("--duration", f.duration, "Run duration in simulated seconds");
    cmd->add_option("--out", f.out, "Output directory for run artifacts");
    cmd->add_option("--scenario", f.scenario_path, "Scenario config JSON (defaults built in)");
    cmd->add_option("--demos", f.demos_path, "Demonstration JSONL file (default: bundled sample set)");
    cmd->add_option("--demo-count", f.demo_count, "Demonstrations per prompt");
    cmd->add_option("--memory-capacity", f.memory_capacity, "Short-term memory capacity");
    cmd->add_option("--coach-cadence", f.coach_cadence, "Decisions between coach evaluations (0 = capacity)");
    cmd->add_flag("--aggressive", f.aggressive, "Use the aggressive NPC preset (sudden maneuvers)");
    cmd->add_option("--endpoint", f.endpoint, "Remote chat-completion base URL");
    cmd->add_option("--model", f.model, "Remote model name");
    cmd->add_option("--api-key-env", f.api_key_env, "Env var holding the API key");
    cmd->add_option("--timeout", f.timeout, "Remote request timeout (s)");
    cmd->add_option("--retries", f.retries, "Remote retry attempts");
}

experiment::RunConfig build_run_config(const RunFlags& f, const experiment::Condition& condition,
                                       std::uint64_t seed) {
    experiment::RunConfig cfg;
    cfg.condition = condition;
    cfg.seed = seed;
    cfg.duration_s = f.duration;
    cfg.demos_path = f.demos_path;
    cfg.demo_count = f.demo_count;
    cfg.memory_capacity = f.memory_capacity;
    cfg.coach_cadence = f.coach_cadence;
    cfg.out_dir = f.out;
    if (!f.scenario_path.empty()) {
        cfg.scenario = sim::load_scenario_config(f.scenario_path);
    }
    if (f.aggressive) cfg.scenario.aggression = aggressive_preset();
    if (f.backend == "remote") {
        cfg.backend.kind = reasoning::BackendKind::RemoteChat;
        cfg.backend.endpoint = f.endpoint;
        cfg.backend.model = f.model;
        cfg.backend.auth_env = f.api_key_env;
        cfg.backend.timeout_s = f.timeout;
        cfg.backend.retry_count = f.retries;
        cfg.backend.validate();
    }
    return cfg;
}

void print_run_summary(const experiment::RunResult& r) {
    std::cout << r.condition.code() << " seed " << r.seed << ": " << r.log.size() << " s, "
              << r.report.collision_count << " collisions, distance "
              << r.report.distance_m << " m";
    if (r.report.avg_speed) std::cout << ", avg speed " << *r.report.avg_speed << " m/s";
    std::cout << ", guidelines " << r.guidelines.size() << "\n";
    if (!r.run_dir.empty()) std::cout << "artifacts: " << r.run_dir << "\n";
}

int cmd_run(const RunFlags& f) {
    const auto condition = experiment::Condition::from_code(f.condition);
    if (!condition) {
        std::cerr << "error: unknown condition code '" << f.condition << "'\n";
        return kExitUsage;
    }
    const experiment::RunResult result = experiment::run_condition(build_run_config(f, *condition, f.seed));
    print_run_summary(result);
    return kExitOk;
}

int cmd_matrix(const RunFlags& f, int seeds, int jobs) {
    const auto conditions = experiment::build_matrix();
    std::vector<experiment::RunConfig> configs;
    for (const experiment::Condition& c : conditions) {
        for (int s = 0; s < seeds; ++s) {
            configs.push_back(build_run_config(f, c, f.seed + static_cast<std::uint64_t>(s)));
        }
    }

    std::vector<experiment::RunResult> results(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex out_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            results[i] = experiment::run_condition(configs[i]);
            std::lock_guard<std::mutex> lock(out_mutex);
            print_run_summary(results[i]);
        }
    };
    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    std::vector<std::thread> threads;
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    fs::create_directories(f.out);
    json manifest;
    manifest["seeds"] = seeds;
    manifest["runs"] = json::array();
    for (const experiment::RunResult& r : results) {
        manifest["runs"].push_back({{"condition", r.condition.code()},
                                    {"seed", r.seed},
                                    {"dir", r.run_dir}});
    }
    std::ofstream mf(f.out + "/manifest.json");
    mf << manifest.dump(2) << "\n";

    const auto rows = experiment::aggregate(results);
    std::ofstream agg(f.out + "/aggregate.csv");
    agg << experiment::aggregate_to_csv(rows);
    std::cout << "wrote " << results.size() << " runs, manifest.json and aggregate.csv under "
              << f.out << "\n";
    return kExitOk;
}

int cmd_replay(const std::string& run_dir) {
    const fs::path dir(run_dir);
    std::ifstream rc(dir / "runconfig.json");
    if (!rc) {
        std::cerr << "error: " << (dir / "runconfig.json").string() << " not found\n";
        return kExitRuntime;
    }
    std::stringstream ss;
    ss << rc.rdbuf();
    experiment::RunConfig cfg = experiment::run_config_from_json(ss.str());
    cfg.out_dir.clear();  // replay writes nothing

    std::ifstream lf(dir / "log.csv");
    if (!lf) {
        std::cerr << "error: " << (dir / "log.csv").string() << " not found\n";
        return kExitRuntime;
    }
    std::stringstream recorded;
    recorded << lf.rdbuf();

    const experiment::RunResult result = experiment::run_condition(cfg);
    const std::string replayed = metrics::log_to_csv(result.log);
    if (replayed == recorded.str()) {
        std::cout << "replay identical: " << result.log.size() << " records match byte-for-byte\n";
        return kExitOk;
    }
    std::cerr << "replay mismatch: regenerated log differs from " << (dir / "log.csv").string() << "\n";
    return kExitRuntime;
}

int cmd_validate_demos(const std::string& input) {
    const demos::DemoSet set = demos::load_demonstrations(input);
    std::cout << "valid: " << set.records.size() << " records ("
              << set.count(demos::StyleTag::Cautious) << " cautious, "
              << set.count(demos::StyleTag::Risky) << " risky)\n";
    return kExitOk;
}

int cmd_score_mdsi(const std::string& input, const std::string& out) {
    const auto rows = demos::load_and_score_mdsi(input);
    std::ostringstream os;
    os << "participant,score\n";
    for (const auto& r : rows) os << csv::quote_cell(r.participant) << ',' << r.score << "\n";
    if (out.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << os.str();
        std::cout << "scored " << rows.size() << " participants -> " << out << "\n";
    }
    return kExitOk;
}

int cmd_analyze(const std::string& rankings_path, const std::string& scores_path, double min_time,
                const std::string& trap, const std::string& out_dir) {
    fs::create_directories(out_dir);

    if (!rankings_path.empty()) {
        const auto all = analysis::load_rankings_csv(rankings_path);
        const auto valid = analysis::filter_valid(all, min_time, trap);
        std::ostringstream freq_csv;
        freq_csv << "group,clip,rank,count\n";
        std::set<std::string> groups;
        for (const auto& r : valid) groups.insert(r.group);
        std::ostringstream signs_csv;
        signs_csv << "group,comparison,wins,losses,ties,p\n";
        for (const std::string& group : groups) {
            const auto table = analysis::ranking_frequency(valid, group);
            std::vector<std::string> clips;
            for (const auto& [clip, counts] : table) clips.push_back(clip);
            for (const auto& [clip, counts] : table) {
                for (const auto& [rank, count] : counts) {
                    freq_csv << csv::quote_cell(group) << ',' << csv::quote_cell(clip) << ',' << rank
                             << ',' << count << "\n";
                }
            }
            for (std::size_t i = 0; i < clips.size(); ++i) {
                for (std::size_t j = i + 1; j < clips.size(); ++j) {
                    const auto st = analysis::sign_test_ranks(valid, group, clips[i], clips[j]);
                    signs_csv << csv::quote_cell(group) << ',' << csv::quote_cell(st.label) << ','
                              << st.wins << ',' << st.losses << ',' << st.ties << ',' << st.p << "\n";
                }
            }
            // One grouped chart per group: rank frequencies per clip.
            int max_rank = 0;
            for (const auto& [clip, counts] : table) {
                for (const auto& [rank, count] : counts) max_rank = std::max(max_rank, rank);
            }
            std::vector<std::string> series;
            std::vector<std::vector<double>> values;
            for (int rank = 1; rank <= max_rank; ++rank) {
                series.push_back("rank " + std::to_string(rank));
                std::vector<double> row;
                for (const std::string& clip : clips) {
                    const auto& counts = table.at(clip);
                    const auto it = counts.find(rank);
                    row.push_back(it == counts.end() ? 0.0 : it->second);
                }
                values.push_back(row);
            }
            if (!clips.empty()) {
                plot::write_grouped_bar_chart("Riskiness rankings: " + group, clips, series, values,
                                              out_dir + "/rankings_" + group + ".svg");
            }
        }
        std::ofstream ff(out_dir + "/ranking_frequency.csv");
        ff << freq_csv.str();
        std::ofstream sf(out_dir + "/sign_tests.csv");
        sf << signs_csv.str();
        std::cout << "rankings: " << valid.size() << "/" << all.size() << " valid responses\n";
    }

    if (!scores_path.empty()) {
        const auto all = analysis::load_scores_csv(scores_path);
        const auto valid = analysis::filter_valid(all, min_time, trap);
        const auto correlations = analysis::score_correlations(valid);
        std::ofstream cf(out_dir + "/correlations.csv");
        cf << "pair,r,n,p\n";
        for (const auto& c : correlations) {
            cf << c.pair << ',' << c.r << ',' << c.n << ',' << c.p << "\n";
        }
        std::cout << "scores: " << valid.size() << "/" << all.size() << " valid responses\n";
    }
    std::cout << "analysis written to " << out_dir << "\n";
    return kExitOk;
}

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
    std::vector<experiment::RunResult> results;
    if (!fs::is_directory(runs_dir)) {
        std::cerr << "error: runs directory " << runs_dir << " not found\n";
        return kExitRuntime;
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "log.csv") &&
            fs::exists(entry.path() / "runconfig.json")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        std::ifstream rc(dir / "runconfig.json");
        std::stringstream ss;
        ss << rc.rdbuf();
        const experiment::RunConfig cfg = experiment::run_config_from_json(ss.str());
        experiment::RunResult r;
        r.condition = cfg.condition;
        r.seed = cfg.seed;
        r.log = metrics::read_log_csv((dir / "log.csv").string());
        r.report = metrics::build_report(r.log);
        results.push_back(std::move(r));
    }
    if (results.empty()) {
        std::cerr << "error: no runs with log.csv + runconfig.json under " << runs_dir << "\n";
        return kExitRuntime;
    }

    fs::create_directories(out_dir);
    const auto rows = experiment::aggregate(results);
    std::ofstream agg(out_dir + "/aggregate.csv");
    agg << experiment::aggregate_to_csv(rows);

    std::vector<std::string> labels;
    std::vector<double> rate, speed, throttle, brake;
    for (const auto& row : rows) {
        labels.push_back(row.condition.code());
        rate.push_back(row.mean_collision_rate);
        speed.push_back(row.mean_speed);
        throttle.push_back(row.mean_throttle);
        brake.push_back(row.mean_brake);
    }
    plot::write_bar_chart("Collisions per meter", labels, rate, out_dir + "/collision_rate.svg");
    plot::write_bar_chart("Average speed (m/s, moving)", labels, speed, out_dir + "/avg_speed.svg");
    plot::write_bar_chart("Average throttle (%, moving)", labels, throttle, out_dir + "/avg_throttle.svg");
    plot::write_bar_chart("Average brake (%, moving)", labels, brake, out_dir + "/avg_brake.svg");
    std::cout << "report: " << results.size() << " runs -> " << out_dir
              << " (aggregate.csv + 4 charts)\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Driver/coach agent alignment sandbox: deterministic urban microsim, "
                 "style-aligned reasoning backends, experiment matrix and survey analytics"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Execute one condition run");
    add_run_flags(run_cmd, run_flags, true);

    RunFlags matrix_flags;
    int seeds = 10;
    int jobs = 1;
    auto* matrix_cmd = app.add_subcommand("matrix", "Run the full 8-condition matrix");
    add_run_flags(matrix_cmd, matrix_flags, false);
    matrix_cmd->add_option("--seeds", seeds, "Seeds per condition")->check(CLI::PositiveNumber);
    matrix_cmd->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    std::string replay_dir;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded run and verify the log matches");
    replay_cmd->add_option("--run-dir", replay_dir, "Run directory with runconfig.json and log.csv")
        ->required();

    std::string demos_input;
    auto* validate_cmd = app.add_subcommand("validate-demos", "Validate a demonstration JSONL file");
    validate_cmd->add_option("--input", demos_input, "Demonstration file")->required();

    std::string mdsi_input, mdsi_out;
    auto* mdsi_cmd = app.add_subcommand("score-mdsi", "Score an MDSI response table");
    mdsi_cmd->add_option("--input", mdsi_input, "MDSI CSV table")->required();
    mdsi_cmd->add_option("--out", mdsi_out, "Output CSV (stdout when omitted)");

    std::string rankings_path, scores_path, analyze_out = "analysis";
    double min_time = 60.0;
    std::string trap = "B";
    auto* analyze_cmd = app.add_subcommand("analyze", "Survey analytics: validity filter, rankings, correlations");
    analyze_cmd->add_option("--rankings", rankings_path, "Ranking responses CSV");
    analyze_cmd->add_option("--scores", scores_path, "Score responses CSV");
    analyze_cmd->add_option("--min-time", min_time, "Minimum answering time (s)");
    analyze_cmd->add_option("--trap", trap, "Expected trap answer");
    analyze_cmd->add_option("--out", analyze_out, "Output directory");

    std::string report_runs, report_out = "report";
    auto* report_cmd = app.add_subcommand("report", "Aggregate run logs into tables and charts");
    report_cmd->add_option("--runs", report_runs, "Directory containing run subdirectories")->required();
    report_cmd->add_option("--out", report_out, "Output directory");

    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<const char*> cargs{argv[0]};
    for (const std::string& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_flags);
        if (matrix_cmd->parsed()) return cmd_matrix(matrix_flags, seeds, jobs);
        if (replay_cmd->parsed()) return cmd_replay(replay_dir);
        if (validate_cmd->parsed()) return cmd_validate_demos(demos_input);
        if (mdsi_cmd->parsed()) return cmd_score_mdsi(mdsi_input, mdsi_out);
        if (analyze_cmd->parsed()) {
            if (rankings_path.empty() && scores_path.empty()) {
                std::cerr << "error: analyze needs --rankings and/or --scores\n";
                return kExitUsage;
            }
            return cmd_analyze(rankings_path, scores_path, min_time, trap, analyze_out);
        }
        if (report_cmd->parsed()) return cmd_report(report_runs, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace coachsim::cli
