#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace explore {

// Finite MDP with expected rewards r(s, a) and transition lists
// next[s][a] = {(s', p), ...}.
struct TabularMdp {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> next;
    std::vector<std::vector<double>> reward;

    void validate() const;
};

using QTable = std::vector<std::vector<double>>;  // [state][action]

// Applies the Bellman optimality operator once.
QTable bellman_optimality(const TabularMdp& mdp, double gamma, const QTable& q);
double sup_distance(const QTable& a, const QTable& b);

struct ValueIterationResult {
    QTable q;
    std::vector<std::size_t> policy;
    std::vector<double> deltas;  // sup-norm change per sweep
};

// Iterates Q <- T*Q from zero until the sup-norm change drops below tolerance.
// Requires gamma in (0, 1).
ValueIterationResult value_iteration(const TabularMdp& mdp, double gamma, double tolerance);

struct FiniteHorizonResult {
    std::vector<QTable> q;                         // q[t][s][a], t = 0..horizon-1
    std::vector<std::vector<std::size_t>> policy;  // policy[t][s]
};

// Exact backward induction over `horizon` decisions; gamma in (0, 1].
FiniteHorizonResult backward_induction(const TabularMdp& mdp, std::size_t horizon, double gamma);

// Chain MDP of length n: state k-1 is s_k, action 0 = left, 1 = right.
TabularMdp chain_mdp(std::size_t n);

// Backward induction on chain(n) over its n + 9 step episode.
FiniteHorizonResult chain_oracle(std::size_t n, double gamma);

// Optimal action at each chain state s_1..s_n, taken at the earliest step the
// state is reachable from s_2 (step |k - 2| for s_k).
std::vector<std::size_t> chain_optimal_actions(std::size_t n, double gamma);

// Expected number of steps for a uniformly random walk started at s_2 to first
// reach s_n, conditioned on reaching it, with s_1 absorbing. Solved exactly
// from the linear hitting equations; no episode cap.
double chain_random_hitting_time(std::size_t n);

}  // namespace explore
