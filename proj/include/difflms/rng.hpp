#pragma once

#include <cstdint>
#include <random>

namespace difflms {

namespace detail {
// splitmix64; used only to spread (seed, trial) pairs over the engine state space.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic per-trial random stream. Two streams built from the same
// (seed, trial_index) produce identical draw sequences regardless of which
// thread owns them.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t trial_index = 0)
        : seed_(seed), trial_index_(trial_index) {
        std::uint64_t x = seed;
        std::uint64_t a = detail::splitmix64(x);
        x ^= 0x6a09e667f3bcc909ULL * (trial_index + 1);
        std::uint64_t b = detail::splitmix64(x);
        engine_.seed(a ^ (b << 1));
    }

    double gaussian() {
        ++draw_counter_;
        return normal_(engine_);
    }

    // uniform on [0, 1)
    double uniform() {
        ++draw_counter_;
        return unit_(engine_);
    }

    // uniform integer on [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        ++draw_counter_;
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    std::uint64_t next_u64() {
        ++draw_counter_;
        return engine_();
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t trial_index() const { return trial_index_; }
    std::uint64_t draw_counter() const { return draw_counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t trial_index_;
    std::uint64_t draw_counter_ = 0;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace difflms
