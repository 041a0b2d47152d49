#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace coachsim {

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 but derives doubles and bounded ints directly from
/// the raw engine output, so sequences are bit-stable across standard
/// libraries (the engine is specified by the standard, the distributions
/// are not). State round-trips through a string for snapshotting.
class Rng {
public:
    Rng() : engine_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return (engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_index(std::uint64_t n) {
        // Multiply-shift; bias is negligible for simulation-scale n.
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_double() < p;
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    static Rng deserialize(const std::string& text) {
        Rng r;
        std::istringstream is(text);
        is >> r.engine_;
        return r;
    }

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace coachsim
