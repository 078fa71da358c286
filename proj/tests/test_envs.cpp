#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "explore/envs.hpp"
#include "explore/oracle.hpp"

using namespace explore;

TEST_CASE("env ids and specs")
{
    const EnvSpec c = make_env_spec("chain(10)");
    CHECK(c.id == EnvId::chain);
    CHECK(c.chain_length == 10);
    CHECK(c.max_steps == 19);
    CHECK(c.observation_dim == 10);
    CHECK(c.num_actions == 2);
    CHECK(make_env_spec("chain:32").max_steps == 41);
    CHECK(make_env_spec("chain", 7).chain_length == 7);
    CHECK_THROWS_AS(make_env_spec("chain(2)"), std::invalid_argument);
    CHECK_THROWS_AS(make_env_spec("chain(x)"), std::invalid_argument);
    CHECK_THROWS_AS(make_env_spec("pong"), std::invalid_argument);

    const EnvSpec p = make_env_spec("pendulum_continuous");
    CHECK_FALSE(p.discrete);
    CHECK(p.action_dim == 1);
    CHECK(p.action_low == -10.0);
    CHECK(p.action_high == 10.0);
    CHECK(make_env_spec("cartpole").max_steps == 200);
    CHECK(make_env_spec("mountaincar").max_steps == 200);
    CHECK(make_env_spec("acrobot").max_steps == 500);
    CHECK(make_env_spec("acrobot").observation_dim == 6);
    for (const char* id : {"cartpole", "mountaincar", "acrobot", "pendulum_continuous"})
        CHECK(to_string(parse_env_id(id)) == id);
}

TEST_CASE("chain transitions")
{
    StepResult r = chain_step(10, 2, 1, 0);
    CHECK(r.info.state_index == 3);
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.done);

    r = chain_step(10, 1, 1, 5);
    CHECK(r.info.state_index == 1);
    CHECK(r.reward == 0.001);

    r = chain_step(10, 10, 0, 5);
    CHECK(r.info.state_index == 10);
    CHECK(r.reward == 1.0);

    r = chain_step(10, 2, 0, 0);
    CHECK(r.info.state_index == 1);
    CHECK(r.reward == 0.001);

    CHECK(chain_step(10, 5, 1, 18).done);
    CHECK_FALSE(chain_step(10, 5, 1, 17).done);
    CHECK_THROWS_AS(chain_step(10, 5, 2, 0), std::invalid_argument);
    CHECK_THROWS(chain_step(10, 5, 1, 19));
    CHECK_THROWS(chain_step(10, 11, 1, 0));
}

TEST_CASE("chain environment episodes")
{
    ChainEnv env(10);
    Rng rng(0);
    CHECK_THROWS(env.step_discrete(1));
    const auto obs = env.reset(rng);
    CHECK(env.state_index() == 2);
    CHECK(obs == chain_observation(10, 2));
    CHECK(obs[1] == 1.0);

    double ret = 0.0;
    std::size_t steps = 0;
    bool done = false;
    while (!done) {
        const StepResult r = env.step_discrete(1);
        ret += r.reward;
        ++steps;
        done = r.done;
        if (done) CHECK(r.info.truncated);
    }
    CHECK(steps == 19);
    CHECK(ret == doctest::Approx(12.0));
    CHECK_THROWS_AS(env.step_discrete(1), std::logic_error);
    CHECK_THROWS(env.step_continuous(std::vector<double>{0.0}));

    // Every policy gives exactly N + 9 steps.
    Rng pol(3);
    for (int ep = 0; ep < 50; ++ep) {
        env.reset(rng);
        std::size_t n = 0;
        while (!env.step_discrete(pol.index(2)).done) ++n;
        CHECK(n + 1 == 19);
    }
}

TEST_CASE("chain max return matches the backward-induction oracle")
{
    const FiniteHorizonResult r = chain_oracle(10, 1.0);
    CHECK(std::max(r.q[0][1][0], r.q[0][1][1]) == doctest::Approx(12.0));
    const auto best = chain_optimal_actions(5, 0.99);
    CHECK(best[1] == 1);  // s_2 -> right
}

TEST_CASE("random walk hitting time on the chain matches the linear-solve oracle")
{
    for (std::size_t n : {4, 5, 6}) {
        const double oracle = chain_random_hitting_time(n);
        CHECK(oracle == doctest::Approx(((n - 1.0) * (n - 1.0) - 1.0) / 3.0).epsilon(1e-12));
        Rng rng(n);
        double total = 0.0;
        std::size_t hits = 0;
        for (int ep = 0; ep < 20000; ++ep) {
            std::size_t s = 2, t = 0;
            while (s != 1 && s != n) {
                s = rng.index(2) ? s + 1 : s - 1;
                ++t;
            }
            if (s == n) {
                total += static_cast<double>(t);
                ++hits;
            }
        }
        CHECK(total / static_cast<double>(hits) == doctest::Approx(oracle).epsilon(0.05));
    }
    CHECK_THROWS(chain_random_hitting_time(2));
}

TEST_CASE("cart-pole dynamics")
{
    // A rightward push tips the pole to the left (negative angle) and the tilt grows.
    CartPoleState s{0.0, 0.0, 0.01, 0.0};
    CartPoleState left = s;
    for (int i = 0; i < 10; ++i) {
        s = cartpole_dynamics(s, 10.0);
        left = cartpole_dynamics(left, -10.0);
    }
    CHECK(s.theta < 0.0);
    CHECK(std::abs(s.theta) > 0.01);
    CHECK(s.x > 0.0);
    CHECK(left.theta > 0.01);

    // upright at rest with zero force is a fixed point
    const CartPoleState eq = cartpole_dynamics(CartPoleState{}, 0.0);
    CHECK(eq.x == 0.0);
    CHECK(eq.theta == 0.0);
    CHECK(eq.theta_dot == 0.0);

    CHECK(cartpole_failed({2.5, 0, 0, 0}));
    CHECK(cartpole_failed({0, 0, 0.21, 0}));
    CHECK_FALSE(cartpole_failed({2.3, 0, 0.2, 0}));
}

TEST_CASE("cart-pole episodes, reset determinism and sparse rewards")
{
    CartPoleEnv a(false), b(false);
    Rng r1(5), r2(5);
    CHECK(a.reset(r1) == b.reset(r2));
    for (double v : a.reset(r1)) CHECK(std::abs(v) <= 0.05);

    // always pushing right falls well before the cap
    a.reset(r1);
    StepResult last;
    do last = a.step_discrete(1);
    while (!last.done);
    CHECK_FALSE(last.info.truncated);
    CHECK(a.steps() < 200);
    CHECK(sparsify(EnvId::cartpole, last).reward == -1.0);
    CHECK(sparsify(EnvId::cartpole, last).info.raw_reward == 1.0);
    CHECK_THROWS_AS(a.step_discrete(2), std::logic_error);

    // balanced by hand: the cap truncates at 200 with sparse reward 0
    a.reset(r1);
    a.set_state(CartPoleState{});
    std::size_t steps = 0;
    do {
        const CartPoleState& st = a.state();
        last = a.step_discrete(st.theta + 0.5 * st.theta_dot + 0.01 * st.x + 0.05 * st.x_dot > 0 ? 1 : 0);
        ++steps;
    } while (!last.done);
    CHECK(last.info.truncated);
    CHECK(steps == 200);
    CHECK(sparsify(EnvId::cartpole, last).reward == 0.0);
    CHECK_THROWS(CartPoleEnv(false).step_discrete(0));
}

TEST_CASE("pendulum_continuous: equilibrium, clipping and bounds")
{
    CartPoleEnv env(true);
    Rng rng(1);
    env.reset(rng);
    env.set_state(CartPoleState{});
    for (int i = 0; i < 100; ++i) {
        const StepResult r = env.step_continuous(std::vector<double>{0.0});
        CHECK_FALSE(r.done);
    }
    CHECK(env.state().theta == 0.0);
    CHECK(env.state().x == 0.0);

    CartPoleEnv a(true), b(true);
    Rng ra(2), rb(2);
    a.reset(ra);
    b.reset(rb);
    const StepResult big = a.step_continuous(std::vector<double>{50.0});
    const StepResult capped = b.step_continuous(std::vector<double>{10.0});
    CHECK(big.observation == capped.observation);
    CHECK_THROWS(a.step_continuous(std::vector<double>{NAN}));
    CHECK_THROWS(a.step_continuous(std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(a.step_discrete(1));
}

TEST_CASE("mountain car: reset range, bounded track and goal")
{
    MountainCarEnv env;
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const auto obs = env.reset(rng);
        CHECK(obs[0] >= -0.6);
        CHECK(obs[0] <= -0.4);
        CHECK(obs[1] == 0.0);
    }
    // Zero throttle from the valley bottom: simulate 10^4 steps across resets.
    double pos = -0.5236, vel = 0.0;
    for (int block = 0; block < 50; ++block) {
        env.reset(rng);
        env.set_state(pos, vel);
        StepResult r;
        do {
            r = env.step_discrete(1);
            CHECK(env.position() >= -1.2);
            CHECK(env.position() <= 0.6);
        } while (!r.done);
        CHECK(r.info.truncated);
        pos = env.position();
        vel = env.velocity();
    }

    env.reset(rng);
    env.set_state(0.49, 0.05);
    const StepResult g = env.step_discrete(2);
    CHECK(g.done);
    CHECK_FALSE(g.info.truncated);
    CHECK(sparsify(EnvId::mountaincar, g).reward == 1.0);
    CHECK_THROWS_AS(env.step_discrete(1), std::logic_error);
    env.reset(rng);
    CHECK_THROWS_AS(env.step_discrete(3), std::invalid_argument);

    // wall at the left edge stops the car
    env.set_state(-1.19, -0.07);
    env.step_discrete(0);
    CHECK(env.position() == -1.2);
    CHECK(env.velocity() == 0.0);
}

TEST_CASE("acrobot: observation, cap and termination")
{
    AcrobotEnv env;
    Rng rng(4);
    const auto obs = env.reset(rng);
    REQUIRE(obs.size() == 6);
    CHECK(obs[0] * obs[0] + obs[1] * obs[1] == doctest::Approx(1.0));
    StepResult r;
    do r = env.step_discrete(1);
    while (!r.done);
    // no torque from near rest cannot swing the tip above the bar
    CHECK(r.info.truncated);
    CHECK(env.steps() == 500);
    CHECK(sparsify(EnvId::acrobot, r).reward == 0.0);

    // Bang-bang torque following the second joint's velocity pumps energy in.
    env.reset(rng);
    do r = env.step_discrete(env.state()[3] >= 0 ? 2 : 0);
    while (!r.done);
    CHECK_FALSE(r.info.truncated);
    CHECK(r.reward == 0.0);
    CHECK(sparsify(EnvId::acrobot, r).reward == 1.0);
}

TEST_CASE("sparse rewards are nonzero only on terminal steps and every env is reproducible")
{
    for (const char* id : {"cartpole", "mountaincar", "acrobot", "pendulum_continuous"}) {
        const EnvSpec spec = make_env_spec(id);
        auto e1 = make_environment(spec), e2 = make_environment(spec);
        Rng s1(21), s2(21), p1(3), p2(3);
        for (int ep = 0; ep < 5; ++ep) {
            CHECK(e1->reset(s1) == e2->reset(s2));
            bool done = false;
            while (!done) {
                StepResult a, b;
                if (spec.discrete) {
                    a = e1->step_discrete(p1.index(spec.num_actions));
                    b = e2->step_discrete(p2.index(spec.num_actions));
                } else {
                    a = e1->step_continuous(std::vector<double>{p1.uniform(-10, 10)});
                    b = e2->step_continuous(std::vector<double>{p2.uniform(-10, 10)});
                }
                CHECK(a.observation == b.observation);
                const StepResult sp = sparsify(spec.id, a);
                if (!a.done) CHECK(sp.reward == 0.0);
                done = a.done;
            }
        }
    }
    CHECK_THROWS(sparsify(EnvId::chain, StepResult{}));
}
