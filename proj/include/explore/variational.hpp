#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "explore/autodiff.hpp"
#include "explore/rng.hpp"
#include "explore/tensor.hpp"

namespace explore {

// sigma = log(1 + exp(-rho)); positive and strictly decreasing in rho.
double sigma_from_rho(double rho);

enum class QMode { gaussian, dirac };

QMode parse_qmode(const std::string& name);

// q_phi(theta): an independent Gaussian over every network parameter with
// mean mu and scale sigma(rho). With a shared rho there is a single [1]
// tensor; otherwise rho mirrors the shapes of mu. In dirac mode rho is kept
// but ignored and theta == mu.
class FactorizedGaussian {
public:
    FactorizedGaussian() = default;
    FactorizedGaussian(std::vector<Tensor> mu, double rho, QMode mode = QMode::gaussian, bool shared_rho = true);

    std::vector<Tensor>& mu() { return mu_; }
    const std::vector<Tensor>& mu() const { return mu_; }
    std::vector<Tensor>& rho() { return rho_; }
    const std::vector<Tensor>& rho() const { return rho_; }

    QMode mode() const { return mode_; }
    bool shared_rho() const { return shared_rho_; }
    std::size_t parameter_count() const;

    // Per-parameter standard deviations, shaped like mu (zero in dirac mode).
    std::vector<Tensor> sigma() const;

    // Tensors an optimizer should update: mu, then rho in gaussian mode.
    std::vector<Tensor*> trainable();

private:
    std::vector<Tensor> mu_;
    std::vector<Tensor> rho_;
    QMode mode_ = QMode::gaussian;
    bool shared_rho_ = true;
};

struct ParameterSample {
    std::vector<Tensor> theta;
    std::vector<Tensor> noise;  // the standard-normal draws; all zero in dirac mode
};

ParameterSample sample_parameters(const FactorizedGaussian& q, Rng& rng);
ParameterSample sample_with_noise(const FactorizedGaussian& q, std::vector<Tensor> noise);
std::vector<Tensor> zero_noise(const FactorizedGaussian& q);

// Sum over parameters of 0.5 * log(2*pi*e*sigma^2). Throws in dirac mode.
double entropy(const FactorizedGaussian& q);

// q's parameters recorded on a tape, with theta = mu + sigma(rho) * noise.
struct TapedParameters {
    std::vector<Var> mu;
    std::vector<Var> rho;
    std::vector<Var> theta;
};

TapedParameters reparameterize(Tape& tape, const FactorizedGaussian& q, const std::vector<Tensor>& noise);
Var entropy(Tape& tape, const FactorizedGaussian& q, const TapedParameters& taped);

// Copies d/dmu and d/drho from a tape into q's tensors (Tensor::grad).
void collect_gradients(const Tape& tape, const TapedParameters& taped, FactorizedGaussian& q);

struct ObjectiveWeights {
    bool entropy_on = true;
    double likelihood_scale = 1.0;  // lambda
    std::size_t samples = 1;        // reparameterized theta draws per evaluation
};

// Must return scale * (negative log-likelihood summed over the minibatch)
// evaluated at the taped theta. Folding the scale into the builder keeps the
// lambda = sigma^2 case free of an extra rounding step.
using NllBuilder = std::function<Var(Tape&, std::span<const Var> theta, double scale)>;

struct ObjectiveResult {
    double value = 0.0;
    double entropy = 0.0;                    // 0 when the entropy term is off
    std::vector<std::vector<Tensor>> noise;  // one entry per theta draw
};

// lambda * E_q[NLL(theta)] - H(q), with the expectation estimated from
// weights.samples draws (or from fixed_noise when given). Gradients for mu and
// rho are left in q's tensors.
ObjectiveResult variational_objective(FactorizedGaussian& q, const ObjectiveWeights& weights,
                                      const NllBuilder& nll, Rng* rng,
                                      const std::vector<std::vector<Tensor>>* fixed_noise = nullptr);

}  // namespace explore
