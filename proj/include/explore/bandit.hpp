#pragma once

#include <cstddef>
#include <vector>

#include "explore/rng.hpp"

namespace explore {

struct NormalPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

// Exact posterior over Gaussian arm means with known reward noise sigma and an
// improper flat prior: arm a's mean is Normal(xbar_a, sigma^2 / n_a).
class BanditPosterior {
public:
    BanditPosterior(std::size_t arms, double sigma);

    void update(std::size_t arm, double reward);
    NormalPosterior posterior(std::size_t arm) const;

    std::size_t arms() const { return counts_.size(); }
    std::size_t count(std::size_t arm) const { return counts_.at(arm); }
    double sigma() const { return sigma_; }
    bool ready() const;  // every arm pulled at least once

    // Thompson sampling: one draw per arm from its posterior, argmax.
    std::size_t act(Rng& rng) const;

private:
    double sigma_;
    std::vector<std::size_t> counts_;
    std::vector<double> means_;
};

// P(draw for arm 1 > draw for arm 0) for two independent normal posteriors.
double thompson_choice_probability(const NormalPosterior& arm0, const NormalPosterior& arm1);

struct BanditTrace {
    std::vector<std::size_t> arms;
    std::vector<double> rewards;
    std::vector<double> cumulative_regret;
};

// Round-robin over the arms once, then Thompson sampling, for `pulls` pulls in
// total on a bandit whose arm a pays Normal(means[a], sigma^2).
BanditTrace run_gaussian_bandit(const std::vector<double>& means, double sigma, std::size_t pulls, Rng& rng);

}  // namespace explore
