#include "explore/variational.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace explore {

namespace {

const double kHalfLog2PiE = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

}  // namespace

double sigma_from_rho(double rho)
{
    if (!std::isfinite(rho)) throw std::domain_error("sigma_from_rho: rho must be finite");
    // log(1 + exp(-rho)) without overflow for large |rho|
    return rho >= 0.0 ? std::log1p(std::exp(-rho)) : -rho + std::log1p(std::exp(rho));
}

QMode parse_qmode(const std::string& name)
{
    if (name == "gaussian") return QMode::gaussian;
    if (name == "dirac") return QMode::dirac;
    throw std::invalid_argument("unknown parameter distribution '" + name + "' (expected gaussian or dirac)");
}

FactorizedGaussian::FactorizedGaussian(std::vector<Tensor> mu, double rho, QMode mode, bool shared_rho)
    : mu_(std::move(mu)), mode_(mode), shared_rho_(shared_rho)
{
    if (!std::isfinite(rho)) throw std::invalid_argument("rho must be finite");
    if (shared_rho_) {
        rho_.push_back(Tensor::scalar(rho));
    } else {
        for (const Tensor& m : mu_) rho_.emplace_back(m.shape(), rho);
    }
}

std::size_t FactorizedGaussian::parameter_count() const
{
    std::size_t n = 0;
    for (const Tensor& m : mu_) n += m.size();
    return n;
}

std::vector<Tensor> FactorizedGaussian::sigma() const
{
    std::vector<Tensor> out;
    out.reserve(mu_.size());
    for (std::size_t l = 0; l < mu_.size(); ++l) {
        Tensor s(mu_[l].shape(), 0.0);
        if (mode_ == QMode::gaussian) {
            if (shared_rho_) {
                const double v = sigma_from_rho(rho_[0][0]);
                for (double& x : s.values()) x = v;
            } else {
                for (std::size_t i = 0; i < s.size(); ++i) s[i] = sigma_from_rho(rho_[l][i]);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Tensor*> FactorizedGaussian::trainable()
{
    std::vector<Tensor*> out;
    for (Tensor& m : mu_) out.push_back(&m);
    if (mode_ == QMode::gaussian)
        for (Tensor& r : rho_) out.push_back(&r);
    return out;
}

std::vector<Tensor> zero_noise(const FactorizedGaussian& q)
{
    std::vector<Tensor> noise;
    for (const Tensor& m : q.mu()) noise.emplace_back(m.shape(), 0.0);
    return noise;
}

ParameterSample sample_with_noise(const FactorizedGaussian& q, std::vector<Tensor> noise)
{
    if (noise.size() != q.mu().size()) throw std::invalid_argument("noise does not match parameter layout");
    ParameterSample s;
    const auto sigma = q.sigma();
    for (std::size_t l = 0; l < q.mu().size(); ++l) {
        if (noise[l].shape() != q.mu()[l].shape())
            throw std::invalid_argument("noise shape " + shape_string(noise[l].shape()) + " vs parameter " +
                                        shape_string(q.mu()[l].shape()));
        Tensor theta = q.mu()[l];
        if (q.mode() == QMode::gaussian) {
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += sigma[l][i] * noise[l][i];
        } else {
            for (double& e : noise[l].values()) e = 0.0;
        }
        s.theta.push_back(std::move(theta));
    }
    s.noise = std::move(noise);
    return s;
}

ParameterSample sample_parameters(const FactorizedGaussian& q, Rng& rng)
{
    auto noise = zero_noise(q);
    if (q.mode() == QMode::gaussian)
        for (Tensor& n : noise)
            for (double& e : n.values()) e = rng.normal();
    return sample_with_noise(q, std::move(noise));
}

double entropy(const FactorizedGaussian& q)
{
    if (q.mode() != QMode::gaussian)
        throw std::invalid_argument("entropy of a dirac parameter distribution is undefined; disable the entropy term");
    double h = 0.0;
    for (const Tensor& s : q.sigma())
        for (double v : s.values()) h += kHalfLog2PiE + std::log(v);
    return h;
}

TapedParameters reparameterize(Tape& tape, const FactorizedGaussian& q, const std::vector<Tensor>& noise)
{
    TapedParameters t;
    for (const Tensor& m : q.mu()) t.mu.push_back(tape.leaf(m));
    if (q.mode() == QMode::dirac) {
        t.theta = t.mu;
        return t;
    }
    if (noise.size() != q.mu().size()) throw std::invalid_argument("noise does not match parameter layout");
    for (const Tensor& r : q.rho()) t.rho.push_back(tape.leaf(r));
    if (q.shared_rho()) {
        const Var sigma = tape.softplus(tape.scale(t.rho[0], -1.0));
        for (std::size_t l = 0; l < t.mu.size(); ++l)
            t.theta.push_back(tape.add(t.mu[l], tape.scale_by(tape.constant(noise[l]), sigma)));
    } else {
        for (std::size_t l = 0; l < t.mu.size(); ++l) {
            const Var sigma = tape.softplus(tape.scale(t.rho[l], -1.0));
            t.theta.push_back(tape.add(t.mu[l], tape.multiply(sigma, tape.constant(noise[l]))));
        }
    }
    return t;
}

Var entropy(Tape& tape, const FactorizedGaussian& q, const TapedParameters& taped)
{
    if (q.mode() != QMode::gaussian || taped.rho.empty())
        throw std::invalid_argument("entropy of a dirac parameter distribution is undefined; disable the entropy term");
    const double count = static_cast<double>(q.parameter_count());
    if (q.shared_rho()) {
        const Var log_sigma = tape.log(tape.softplus(tape.scale(taped.rho[0], -1.0)));
        return tape.offset(tape.scale(log_sigma, count), count * kHalfLog2PiE);
    }
    Var total = tape.sum(tape.log(tape.softplus(tape.scale(taped.rho[0], -1.0))));
    for (std::size_t l = 1; l < taped.rho.size(); ++l)
        total = tape.add(total, tape.sum(tape.log(tape.softplus(tape.scale(taped.rho[l], -1.0)))));
    return tape.offset(total, count * kHalfLog2PiE);
}

void collect_gradients(const Tape& tape, const TapedParameters& taped, FactorizedGaussian& q)
{
    for (std::size_t l = 0; l < taped.mu.size(); ++l) q.mu()[l].set_grad(tape.grad(taped.mu[l]));
    for (std::size_t l = 0; l < taped.rho.size(); ++l) q.rho()[l].set_grad(tape.grad(taped.rho[l]));
}

ObjectiveResult variational_objective(FactorizedGaussian& q, const ObjectiveWeights& weights, const NllBuilder& nll,
                                      Rng* rng, const std::vector<std::vector<Tensor>>* fixed_noise)
{
    if (weights.entropy_on && q.mode() != QMode::gaussian)
        throw std::invalid_argument("entropy term requires a gaussian parameter distribution");
    const std::size_t draws = fixed_noise ? fixed_noise->size() : weights.samples;
    if (draws == 0) throw std::invalid_argument("objective needs at least one theta sample");

    ObjectiveResult result;
    for (std::size_t s = 0; s < draws; ++s) {
        if (fixed_noise) {
            result.noise.push_back((*fixed_noise)[s]);
        } else if (q.mode() == QMode::gaussian) {
            if (!rng) throw std::invalid_argument("objective needs an rng to sample theta");
            result.noise.push_back(sample_parameters(q, *rng).noise);
        } else {
            result.noise.push_back(zero_noise(q));
        }
    }

    // mu and rho leaves are shared by every draw so their gradients accumulate
    Tape tape;
    TapedParameters base;
    for (const Tensor& m : q.mu()) base.mu.push_back(tape.leaf(m));
    if (q.mode() == QMode::gaussian)
        for (const Tensor& r : q.rho()) base.rho.push_back(tape.leaf(r));

    Var sigma_shared{};
    std::vector<Var> sigma_per;
    if (q.mode() == QMode::gaussian) {
        if (q.shared_rho()) sigma_shared = tape.softplus(tape.scale(base.rho[0], -1.0));
        else
            for (const Var r : base.rho) sigma_per.push_back(tape.softplus(tape.scale(r, -1.0)));
    }

    const double scale = weights.likelihood_scale / static_cast<double>(draws);
    Var total{};
    for (std::size_t s = 0; s < draws; ++s) {
        std::vector<Var> theta;
        if (q.mode() == QMode::dirac) {
            theta = base.mu;
        } else {
            const auto& noise = result.noise[s];
            for (std::size_t l = 0; l < base.mu.size(); ++l) {
                const Var eps = tape.constant(noise[l]);
                const Var shift = q.shared_rho() ? tape.scale_by(eps, sigma_shared) : tape.multiply(sigma_per[l], eps);
                theta.push_back(tape.add(base.mu[l], shift));
            }
        }
        const Var term = nll(tape, theta, scale);
        total = s == 0 ? term : tape.add(total, term);
    }
    if (weights.entropy_on) {
        const Var h = entropy(tape, q, base);
        result.entropy = tape.value(h).item();
        total = tape.subtract(total, h);
    }
    result.value = tape.value(total).item();
    tape.backward(total);
    collect_gradients(tape, base, q);
    return result;
}

}  // namespace explore
