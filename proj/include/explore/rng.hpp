#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace explore {

// Seeded random stream. fork() derives an independent stream from the same
// master seed so that e.g. replay sampling and parameter noise never share
// draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    Rng fork(std::uint64_t stream) const;

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Named streams forked from a run's master seed.
enum class Stream : std::uint64_t {
    env = 1,
    agent_init = 2,
    theta = 3,
    replay = 4,
    action = 5,
};

inline Rng fork(const Rng& master, Stream s) { return master.fork(static_cast<std::uint64_t>(s)); }

}  // namespace explore
