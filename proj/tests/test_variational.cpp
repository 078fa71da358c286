#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "explore/variational.hpp"

using namespace explore;

namespace {

const double kHalfLog2PiE = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

// rho whose sigma is exactly representable enough for entropy checks
double rho_for_sigma(double sigma) { return -std::log(std::expm1(sigma)); }

FactorizedGaussian scalar_q(double mu, double rho, QMode mode = QMode::gaussian)
{
    return FactorizedGaussian({Tensor::scalar(mu)}, rho, mode);
}

}  // namespace

TEST_CASE("sigma_from_rho values, limits and stability")
{
    CHECK(sigma_from_rho(-1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-14));
    CHECK(sigma_from_rho(-10.0) == doctest::Approx(10.000045398899218).epsilon(1e-14));
    CHECK(sigma_from_rho(40.0) < 1e-17);
    CHECK(sigma_from_rho(40.0) > 0.0);
    double prev = INFINITY;
    for (double rho = -500.0; rho <= 500.0; rho += 0.25) {
        const double s = sigma_from_rho(rho);
        CHECK(std::isfinite(s));
        CHECK(s > 0.0);
        CHECK(s <= prev);
        if (rho < 30) CHECK(s < prev);
        prev = s;
    }
    CHECK(sigma_from_rho(-500.0) == doctest::Approx(500.0));
    CHECK_THROWS_AS(sigma_from_rho(NAN), std::domain_error);
    CHECK_THROWS_AS(sigma_from_rho(INFINITY), std::domain_error);
}

TEST_CASE("sample_parameters: zero noise, dirac mode and reproducibility")
{
    const FactorizedGaussian q({Tensor::vector({1.0, -2.0}), Tensor({2, 2}, 0.5)}, -1.0);
    const ParameterSample zero = sample_with_noise(q, zero_noise(q));
    CHECK(zero.theta == q.mu());

    const FactorizedGaussian d({Tensor::vector({1.0, -2.0})}, -1.0, QMode::dirac);
    Rng rng(3);
    const ParameterSample ds = sample_parameters(d, rng);
    CHECK(ds.theta == d.mu());
    for (double e : ds.noise[0].values()) CHECK(e == 0.0);

    Rng a(17), b(17);
    const ParameterSample sa = sample_parameters(q, a), sb = sample_parameters(q, b);
    CHECK(sa.theta == sb.theta);
    CHECK(sa.noise == sb.noise);
    // theta = mu + sigma * noise elementwise
    const double s = sigma_from_rho(-1.0);
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t i = 0; i < sa.theta[l].size(); ++i)
            CHECK(sa.theta[l][i] == q.mu()[l][i] + s * sa.noise[l][i]);
}

TEST_CASE("sample mean of a scalar parameter is within the CLT bound")
{
    const FactorizedGaussian q = scalar_q(2.0, rho_for_sigma(1.0));
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_parameters(q, rng).theta[0][0];
    CHECK(std::abs(sum / n - 2.0) < 2.0 * (1.0 / std::sqrt(n)) * 3.0);
}

TEST_CASE("entropy: closed form, additivity and scaling")
{
    const double rho1 = rho_for_sigma(1.0);
    CHECK(entropy(scalar_q(0.0, rho1)) == doctest::Approx(1.4189385332046727).epsilon(1e-12));
    const FactorizedGaussian two({Tensor::vector({0.0, 0.0})}, rho1);
    CHECK(entropy(two) == doctest::Approx(2.8378770664093453).epsilon(1e-12));
    const double h1 = entropy(scalar_q(0.0, rho_for_sigma(0.3)));
    const double h2 = entropy(scalar_q(0.0, rho_for_sigma(0.6)));
    CHECK(h2 - h1 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(h1 == doctest::Approx(kHalfLog2PiE + std::log(0.3)).epsilon(1e-12));
    CHECK_THROWS_AS(entropy(scalar_q(0.0, 0.0, QMode::dirac)), std::invalid_argument);
}

TEST_CASE("per-parameter rho mirrors parameter shapes")
{
    FactorizedGaussian q({Tensor({2, 3}), Tensor({3})}, -2.0, QMode::gaussian, false);
    REQUIRE(q.rho().size() == 2);
    CHECK(q.rho()[0].shape() == Shape{2, 3});
    CHECK(q.rho()[1].shape() == Shape{3});
    CHECK(q.parameter_count() == 9);
    CHECK(q.trainable().size() == 4);
    q.rho()[0][0] = -5.0;
    CHECK(q.sigma()[0][0] == doctest::Approx(sigma_from_rho(-5.0)));
    CHECK(q.sigma()[0][1] == doctest::Approx(sigma_from_rho(-2.0)));
    CHECK(entropy(q) == doctest::Approx(9 * kHalfLog2PiE + std::log(sigma_from_rho(-5.0)) +
                                        8 * std::log(sigma_from_rho(-2.0))));

    const FactorizedGaussian shared({Tensor({2, 3}), Tensor({3})}, -2.0);
    CHECK(shared.rho().size() == 1);
    CHECK(shared.rho()[0].shape() == Shape{1});
    CHECK(FactorizedGaussian({Tensor({2})}, -2.0, QMode::dirac).sigma()[0][0] == 0.0);
}

TEST_CASE("reparameterized gradient of E[theta^2] w.r.t. mu is 2 mu")
{
    const double mu = 0.8;
    FactorizedGaussian q = scalar_q(mu, rho_for_sigma(0.5));
    Rng rng(5);
    const NllBuilder nll = [](Tape& t, std::span<const Var> theta, double scale) {
        return t.scale(t.sum(t.square(theta[0])), scale);
    };
    const ObjectiveWeights w{false, 1.0, 1};
    const int n = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        variational_objective(q, w, nll, &rng);
        const double g = q.mu()[0].grad()[0];
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 2 * mu) < 3 * se);
}

TEST_CASE("entropy gradient w.r.t. rho matches finite differences")
{
    for (double rho : {-8.0, -3.0, -1.0, 0.0, 2.5}) {
        FactorizedGaussian q({Tensor::vector({0.1, 0.2, 0.3})}, rho);
        const NllBuilder none = [](Tape& t, std::span<const Var> theta, double scale) {
            return t.scale(t.sum(theta[0]), 0.0 * scale);
        };
        const ObjectiveWeights w{true, 1.0, 1};
        const std::vector<std::vector<Tensor>> noise = {zero_noise(q)};
        const ObjectiveResult r = variational_objective(q, w, none, nullptr, &noise);
        CHECK(r.value == doctest::Approx(-entropy(q)).epsilon(1e-13));
        const double analytic = q.rho()[0].grad()[0];
        const double h = 1e-5;
        auto h_at = [&](double x) { return -entropy(FactorizedGaussian({Tensor::vector({0.1, 0.2, 0.3})}, x)); };
        const double numeric = (h_at(rho + h) - h_at(rho - h)) / (2 * h);
        CHECK(std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)) < 1e-4);
    }
}

TEST_CASE("objective gradients w.r.t. mu and rho match finite differences with frozen noise")
{
    Rng rng(8);
    for (bool shared : {true, false}) {
        FactorizedGaussian q({Tensor({2, 2}, std::vector<double>{0.3, -0.2, 0.5, 0.1}), Tensor::vector({0.05, -0.4})},
                             -2.0, QMode::gaussian, shared);
        for (auto& r : q.rho())
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = -2.0 + 0.3 * rng.normal();
        const Tensor x({3, 2}, std::vector<double>{1.0, 0.5, -0.3, 0.8, 0.2, -1.0});
        const Tensor y = Tensor::vector({0.4, -0.1, 0.9});
        const NllBuilder nll = [&](Tape& t, std::span<const Var> theta, double scale) {
            const Var h = t.tanh(t.add(t.matmul(t.constant(x), theta[0]), theta[1]));
            const Var out = t.reshape(t.gather(h, std::vector<std::size_t>{0, 1, 0}), {3});
            return t.scale(t.sum(t.square(t.subtract(out, t.constant(y)))), scale);
        };
        const ObjectiveWeights w{true, 0.7, 2};
        std::vector<std::vector<Tensor>> noise;
        for (int s = 0; s < 2; ++s) noise.push_back(sample_parameters(q, rng).noise);

        variational_objective(q, w, nll, nullptr, &noise);
        const FactorizedGaussian base = q;
        auto value = [&](const FactorizedGaussian& p) {
            FactorizedGaussian c = p;
            return variational_objective(c, w, nll, nullptr, &noise).value;
        };
        double worst = 0.0;
        const double h = 1e-5;
        for (int which = 0; which < 2; ++which) {
            const auto& tensors = which == 0 ? base.mu() : base.rho();
            for (std::size_t l = 0; l < tensors.size(); ++l)
                for (std::size_t i = 0; i < tensors[l].size(); ++i) {
                    FactorizedGaussian plus = base, minus = base;
                    (which == 0 ? plus.mu() : plus.rho())[l][i] += h;
                    (which == 0 ? minus.mu() : minus.rho())[l][i] -= h;
                    const double numeric = (value(plus) - value(minus)) / (2 * h);
                    const double analytic = tensors[l].grad()[i];
                    worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)));
                }
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("objective rejects entropy in dirac mode and needs a noise source")
{
    FactorizedGaussian d = scalar_q(0.0, -1.0, QMode::dirac);
    const NllBuilder nll = [](Tape& t, std::span<const Var> theta, double scale) {
        return t.scale(t.sum(t.square(theta[0])), scale);
    };
    CHECK_THROWS_AS(variational_objective(d, {true, 1.0, 1}, nll, nullptr), std::invalid_argument);
    FactorizedGaussian g = scalar_q(0.0, -1.0);
    CHECK_THROWS_AS(variational_objective(g, {false, 1.0, 1}, nll, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(variational_objective(g, {false, 1.0, 0}, nll, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(sample_with_noise(g, {Tensor::vector({1.0, 2.0})}), std::invalid_argument);
    CHECK_THROWS_AS(parse_qmode("laplace"), std::invalid_argument);
}

TEST_CASE("dirac objective ignores rho and leaves only mu trainable")
{
    FactorizedGaussian d = scalar_q(1.5, -1.0, QMode::dirac);
    Rng rng(1);
    const NllBuilder nll = [](Tape& t, std::span<const Var> theta, double scale) {
        return t.scale(t.sum(t.square(theta[0])), scale);
    };
    const ObjectiveResult r = variational_objective(d, {false, 1.0, 1}, nll, &rng);
    CHECK(r.value == 2.25);
    CHECK(d.mu()[0].grad()[0] == 3.0);
    CHECK(d.trainable().size() == 1);
}
