#include "explore/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explore/returns.hpp"

namespace explore {

void TabularMdp::validate() const
{
    if (states == 0 || actions == 0) throw std::invalid_argument("tabular MDP needs states and actions");
    if (next.size() != states || reward.size() != states) throw std::invalid_argument("tabular MDP tables have wrong size");
    for (std::size_t s = 0; s < states; ++s) {
        if (next[s].size() != actions || reward[s].size() != actions)
            throw std::invalid_argument("tabular MDP tables have wrong size");
        for (const auto& outcomes : next[s]) {
            double total = 0.0;
            for (const auto& [sp, p] : outcomes) {
                if (sp >= states || p < 0.0) throw std::invalid_argument("bad transition entry");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("transition probabilities must sum to 1");
        }
    }
}

QTable bellman_optimality(const TabularMdp& mdp, double gamma, const QTable& q)
{
    std::vector<double> v(mdp.states);
    for (std::size_t s = 0; s < mdp.states; ++s) v[s] = *std::max_element(q[s].begin(), q[s].end());
    QTable out(mdp.states, std::vector<double>(mdp.actions, 0.0));
    for (std::size_t s = 0; s < mdp.states; ++s)
        for (std::size_t a = 0; a < mdp.actions; ++a) {
            double acc = mdp.reward[s][a];
            for (const auto& [sp, p] : mdp.next[s][a]) acc += gamma * p * v[sp];
            out[s][a] = acc;
        }
    return out;
}

double sup_distance(const QTable& a, const QTable& b)
{
    double d = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s)
        for (std::size_t k = 0; k < a[s].size(); ++k) d = std::max(d, std::abs(a[s][k] - b[s][k]));
    return d;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double gamma, double tolerance)
{
    mdp.validate();
    if (!(gamma > 0.0) || gamma >= 1.0)
        throw std::invalid_argument("value iteration needs gamma in (0, 1); use backward_induction for gamma = 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");

    ValueIterationResult r;
    r.q.assign(mdp.states, std::vector<double>(mdp.actions, 0.0));
    for (;;) {
        QTable next = bellman_optimality(mdp, gamma, r.q);
        const double delta = sup_distance(next, r.q);
        r.q = std::move(next);
        r.deltas.push_back(delta);
        if (delta < tolerance) break;
    }
    for (const auto& row : r.q) r.policy.push_back(argmax(row));
    return r;
}

FiniteHorizonResult backward_induction(const TabularMdp& mdp, std::size_t horizon, double gamma)
{
    mdp.validate();
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");

    FiniteHorizonResult r;
    r.q.assign(horizon, QTable(mdp.states, std::vector<double>(mdp.actions, 0.0)));
    r.policy.assign(horizon, std::vector<std::size_t>(mdp.states, 0));
    std::vector<double> v_next(mdp.states, 0.0);
    for (std::size_t t = horizon; t-- > 0;) {
        for (std::size_t s = 0; s < mdp.states; ++s)
            for (std::size_t a = 0; a < mdp.actions; ++a) {
                double acc = mdp.reward[s][a];
                for (const auto& [sp, p] : mdp.next[s][a]) acc += gamma * p * v_next[sp];
                r.q[t][s][a] = acc;
            }
        for (std::size_t s = 0; s < mdp.states; ++s) {
            r.policy[t][s] = argmax(r.q[t][s]);
            v_next[s] = r.q[t][s][r.policy[t][s]];
        }
    }
    return r;
}

TabularMdp chain_mdp(std::size_t n)
{
    if (n < 3) throw std::invalid_argument("chain length must be >= 3");
    TabularMdp m;
    m.states = n;
    m.actions = 2;
    m.next.assign(n, std::vector<std::vector<std::pair<std::size_t, double>>>(2));
    m.reward.assign(n, std::vector<double>(2, 0.0));
    auto reward_of = [n](std::size_t s) { return s == 0 ? 0.001 : (s == n - 1 ? 1.0 : 0.0); };
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            std::size_t sp = s;
            if (s != 0 && s != n - 1) sp = a == 1 ? s + 1 : s - 1;
            m.next[s][a] = {{sp, 1.0}};
            m.reward[s][a] = reward_of(sp);
        }
    return m;
}

FiniteHorizonResult chain_oracle(std::size_t n, double gamma) { return backward_induction(chain_mdp(n), n + 9, gamma); }

std::vector<std::size_t> chain_optimal_actions(std::size_t n, double gamma)
{
    const FiniteHorizonResult r = chain_oracle(n, gamma);
    std::vector<std::size_t> actions(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t t = k >= 2 ? k - 2 : 1;
        actions[k - 1] = r.policy[t][k - 1];
    }
    return actions;
}

double chain_random_hitting_time(std::size_t n)
{
    if (n < 3) throw std::invalid_argument("chain length must be >= 3");
    // Interior states 2..n-1. h(k) = P(reach n before 1), u(k) = E[T; reach n].
    //   h(k) = (h(k-1) + h(k+1)) / 2,              h(1) = 0, h(n) = 1
    //   u(k) = (u(k-1) + u(k+1)) / 2 + h(k),       u(1) = u(n) = 0
    // Each is a tridiagonal system solved with the Thomas algorithm.
    const std::size_t m = n - 2;
    auto solve = [m](std::vector<double> rhs) {
        // -x_{i-1}/2 + x_i - x_{i+1}/2 = rhs_i
        std::vector<double> c(m, 0.0), d(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double denom = 1.0 - (i > 0 ? -0.5 * c[i - 1] : 0.0);
            c[i] = -0.5 / denom;
            d[i] = (rhs[i] + (i > 0 ? 0.5 * d[i - 1] : 0.0)) / denom;
        }
        std::vector<double> x(m);
        for (std::size_t i = m; i-- > 0;) x[i] = d[i] - (i + 1 < m ? c[i] * x[i + 1] : 0.0);
        return x;
    };
    std::vector<double> rhs_h(m, 0.0);
    rhs_h[m - 1] = 0.5;  // boundary h(n) = 1
    const std::vector<double> h = solve(rhs_h);
    const std::vector<double> u = solve(h);
    return u[0] / h[0];
}

}  // namespace explore
