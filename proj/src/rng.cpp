#include "explore/rng.hpp"

namespace explore {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(make_engine(seed, 0)) {}

Rng Rng::fork(std::uint64_t stream) const
{
    Rng child(seed_);
    child.engine_ = make_engine(seed_, stream);
    child.seed_ = seed_ ^ (stream * 0x9e3779b97f4a7c15ull);
    return child;
}

}  // namespace explore
