#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "coachsim/metrics.hpp"

using namespace coachsim::metrics;

namespace {

// Independent brute-force oracle over a raw log: one naive pass per field,
// no shared code with the implementation.
namespace oracle {

double collision_rate_or(const RunLog& log, bool& undefined) {
    undefined = false;
    const int total = log.back().collisions_cum;
    if (total == 0) return 0.0;
    for (const LogRecord& r : log) {
        if (r.collisions_cum == total) {
            if (r.distance_cum <= 0.0) {
                undefined = true;
                return 0.0;
            }
            return total / r.distance_cum;
        }
    }
    return 0.0;
}

bool mean_positive(const std::vector<double>& xs, double& out) {
    double s = 0.0;
    int n = 0;
    for (double x : xs) {
        if (x > 0.0) {
            s += x;
            n += 1;
        }
    }
    if (n == 0) return false;
    out = s / n;
    return true;
}

}  // namespace oracle

RunLog make_log(const std::vector<double>& speed, const std::vector<double>& throttle,
                const std::vector<double>& brake, const std::vector<int>& collisions,
                const std::vector<double>& distance) {
    RunLog log;
    for (std::size_t i = 0; i < speed.size(); ++i) {
        log.push_back({static_cast<int>(i) + 1, speed[i], throttle[i], brake[i], collisions[i],
                       distance[i]});
    }
    return log;
}

RunLog random_log(std::mt19937& gen, int max_len = 200) {
    std::uniform_int_distribution<int> len_dist(1, max_len);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = len_dist(gen);
    RunLog log;
    int collisions = 0;
    double distance = 0.0;
    for (int i = 0; i < n; ++i) {
        const bool stationary = u(gen) < 0.25;
        const double v = stationary ? 0.0 : u(gen) * 10.0;
        distance += v;
        if (u(gen) < 0.05) collisions += 1 + static_cast<int>(u(gen) * 2);
        log.push_back({i + 1, v, stationary ? 0.0 : u(gen) * 100.0, stationary ? 0.0 : u(gen) * 100.0,
                       collisions, distance});
    }
    return log;
}

}  // namespace

TEST_CASE("collision rate: the three contract cases") {
    SUBCASE("no collisions over 1500 m is rate zero") {
        const RunLog log = make_log({5, 5, 5}, {20, 20, 20}, {0, 0, 0}, {0, 0, 0}, {500, 1000, 1500});
        const CollisionRate r = collision_rate(log);
        CHECK(!r.undefined);
        CHECK(r.value == 0.0);
    }
    SUBCASE("denominator is the distance at the last collision") {
        const RunLog log =
            make_log({5, 5, 5, 5}, {20, 20, 20, 20}, {0, 0, 0, 0}, {1, 2, 3, 3}, {500, 1000, 1500, 2000});
        const CollisionRate r = collision_rate(log);
        CHECK(!r.undefined);
        CHECK(r.value == doctest::Approx(0.002).epsilon(1e-12));
    }
    SUBCASE("a collision at zero distance is undefined-with-flag") {
        const RunLog log = make_log({0, 5}, {0, 20}, {0, 0}, {1, 1}, {0, 5});
        const CollisionRate r = collision_rate(log);
        CHECK(r.undefined);
    }
    SUBCASE("empty log is rejected") {
        CHECK_THROWS_AS(collision_rate(RunLog{}), std::invalid_argument);
    }
}

TEST_CASE("avg_excluding_zero: contract cases and the exclusion law") {
    CHECK(avg_excluding_zero({0, 5, 10, 0, 15}) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(avg_excluding_zero({7, 7, 7}) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(!avg_excluding_zero({0, 0}).has_value());
    CHECK(!avg_excluding_zero({}).has_value());

    std::mt19937 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> series, stripped;
        for (int i = 0; i < 40; ++i) {
            const double v = u(gen) < 0.4 ? 0.0 : u(gen) * 20.0;
            series.push_back(v);
            if (v > 0.0) stripped.push_back(v);
        }
        const auto a = avg_excluding_zero(series);
        const auto b = avg_excluding_zero(stripped);
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
    }
}

TEST_CASE("per-minute segments: constants, partial windows, zero handling") {
    SUBCASE("two full constant minutes") {
        const std::vector<double> series(120, 5.0);
        const auto segs = per_minute_segments(series);
        REQUIRE(segs.size() == 2);
        CHECK(*segs[0].mean == doctest::Approx(5.0));
        CHECK(*segs[1].mean == doctest::Approx(5.0));
        CHECK(!segs[0].partial);
        CHECK(!segs[1].partial);
    }
    SUBCASE("90 seconds yield a partial second window") {
        const std::vector<double> series(90, 3.0);
        const auto segs = per_minute_segments(series);
        REQUIRE(segs.size() == 2);
        CHECK(!segs[0].partial);
        CHECK(segs[1].partial);
        CHECK(segs[1].sample_count == 30);
    }
    SUBCASE("zeros in the first minute only shrink its support") {
        std::vector<double> series(120, 4.0);
        for (int i = 0; i < 30; ++i) series[i] = 0.0;
        const auto segs = per_minute_segments(series);
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].sample_count == 30);
        CHECK(*segs[0].mean == doctest::Approx(4.0));
        CHECK(segs[1].sample_count == 60);
    }
    SUBCASE("window partition reconstructs the series length") {
        std::mt19937 gen(5);
        for (int n : {1, 59, 60, 61, 179, 400}) {
            const std::vector<double> series(static_cast<std::size_t>(n), 1.0);
            const auto segs = per_minute_segments(series);
            int covered = 0;
            int expected_start = 1;
            for (const auto& s : segs) {
                CHECK(s.start_second == expected_start);
                expected_start += 60;
                covered += s.partial ? n % 60 : 60;
            }
            CHECK(covered == n);
        }
    }
}

TEST_CASE("report fields equal a brute-force recomputation on random logs") {
    std::mt19937 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const RunLog log = random_log(gen);
        const MetricsReport rep = build_report(log);

        bool undef = false;
        const double want_rate = oracle::collision_rate_or(log, undef);
        CHECK(rep.collisions_per_meter.undefined == undef);
        if (!undef) {
            CHECK(rep.collisions_per_meter.value ==
                  doctest::Approx(want_rate).epsilon(1e-12));
        }

        std::vector<double> speeds;
        for (const auto& r : log) speeds.push_back(r.speed);
        double want_speed = 0.0;
        const bool has_speed = oracle::mean_positive(speeds, want_speed);
        CHECK(rep.avg_speed.has_value() == has_speed);
        if (has_speed) CHECK(*rep.avg_speed == doctest::Approx(want_speed).epsilon(1e-12));

        // Throttle/brake: stationary seconds excluded, zeros while moving kept.
        double t_sum = 0.0, b_sum = 0.0;
        int n_moving = 0;
        for (const auto& r : log) {
            if (r.speed > 0.0) {
                t_sum += r.throttle_pct;
                b_sum += r.brake_pct;
                ++n_moving;
            }
        }
        CHECK(rep.avg_throttle.has_value() == (n_moving > 0));
        if (n_moving > 0) {
            CHECK(*rep.avg_throttle == doctest::Approx(t_sum / n_moving).epsilon(1e-12));
            CHECK(*rep.avg_brake == doctest::Approx(b_sum / n_moving).epsilon(1e-12));
        }
        CHECK(rep.collision_count == log.back().collisions_cum);
        CHECK(rep.distance_m == log.back().distance_cum);
    }
}

TEST_CASE("build_report rejects an empty log") {
    CHECK_THROWS_AS(build_report(RunLog{}), std::invalid_argument);
}

TEST_CASE("log CSV round-trips byte-for-byte") {
    std::mt19937 gen(7);
    const RunLog log = random_log(gen, 50);
    const std::string csv1 = log_to_csv(log);
    const RunLog parsed = log_from_csv(csv1);
    REQUIRE(parsed.size() == log.size());
    const std::string csv2 = log_to_csv(parsed);
    CHECK(csv1 == csv2);
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(parsed[i].second == log[i].second);
        CHECK(parsed[i].speed == doctest::Approx(log[i].speed).epsilon(1e-6));
        CHECK(parsed[i].collisions_cum == log[i].collisions_cum);
    }
}

TEST_CASE("log validation rejects disorder") {
    RunLog log = make_log({1, 2}, {0, 0}, {0, 0}, {0, 0}, {1, 2});
    log[1].second = 1;
    CHECK_THROWS_AS(validate_log(log), std::invalid_argument);
    log = make_log({1, 2}, {0, 0}, {0, 0}, {1, 0}, {1, 2});
    CHECK_THROWS_AS(validate_log(log), std::invalid_argument);
}
