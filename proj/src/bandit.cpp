#include "explore/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explore/returns.hpp"

namespace explore {

BanditPosterior::BanditPosterior(std::size_t arms, double sigma)
    : sigma_(sigma), counts_(arms, 0), means_(arms, 0.0)
{
    if (arms == 0) throw std::invalid_argument("bandit needs at least one arm");
    if (!(sigma > 0.0)) throw std::invalid_argument("bandit reward noise sigma must be > 0");
}

void BanditPosterior::update(std::size_t arm, double reward)
{
    if (arm >= counts_.size()) throw std::out_of_range("bandit arm out of range");
    const std::size_t n = ++counts_[arm];
    means_[arm] += (reward - means_[arm]) / static_cast<double>(n);
}

NormalPosterior BanditPosterior::posterior(std::size_t arm) const
{
    if (counts_.at(arm) == 0) throw std::logic_error("posterior undefined before the arm is pulled");
    return {means_[arm], sigma_ * sigma_ / static_cast<double>(counts_[arm])};
}

bool BanditPosterior::ready() const
{
    return std::all_of(counts_.begin(), counts_.end(), [](std::size_t n) { return n > 0; });
}

std::size_t BanditPosterior::act(Rng& rng) const
{
    if (!ready()) throw std::logic_error("bandit_act before every arm has been pulled once");
    std::vector<double> draws(counts_.size());
    for (std::size_t a = 0; a < draws.size(); ++a) {
        const NormalPosterior p = posterior(a);
        draws[a] = p.mean + std::sqrt(p.variance) * rng.normal();
    }
    return argmax(draws);
}

double thompson_choice_probability(const NormalPosterior& arm0, const NormalPosterior& arm1)
{
    const double z = (arm1.mean - arm0.mean) / std::sqrt(arm0.variance + arm1.variance);
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

BanditTrace run_gaussian_bandit(const std::vector<double>& means, double sigma, std::size_t pulls, Rng& rng)
{
    BanditPosterior post(means.size(), sigma);
    const double best = *std::max_element(means.begin(), means.end());
    BanditTrace trace;
    double regret = 0.0;
    for (std::size_t t = 0; t < pulls; ++t) {
        const std::size_t arm = t < means.size() ? t : post.act(rng);
        const double reward = means[arm] + sigma * rng.normal();
        post.update(arm, reward);
        regret += best - means[arm];
        trace.arms.push_back(arm);
        trace.rewards.push_back(reward);
        trace.cumulative_regret.push_back(regret);
    }
    return trace;
}

}  // namespace explore
