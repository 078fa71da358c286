#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "explore/autodiff.hpp"
#include "explore/mlp.hpp"
#include "explore/replay.hpp"
#include "explore/rng.hpp"
#include "explore/variational.hpp"

namespace explore {

enum class HeadKind { gaussian, categorical };

// Parametric return distribution Z_theta(s, a) over a discrete action set.
//  gaussian:    N(Q_theta(s,a), sigma^2); the network outputs one Q per action.
//  categorical: softmax over fixed atoms; the network outputs K logits per
//               action, laid out action-major.
class ReturnHead {
public:
    static ReturnHead gaussian(MlpSpec net, double sigma);
    static ReturnHead categorical(MlpSpec net, std::vector<double> atoms);

    HeadKind kind() const { return kind_; }
    const MlpSpec& net() const { return net_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& atoms() const { return atoms_; }
    std::size_t num_actions() const { return actions_; }

private:
    HeadKind kind_ = HeadKind::gaussian;
    MlpSpec net_;
    double sigma_ = 1.0;
    std::vector<double> atoms_;
    std::size_t actions_ = 0;
};

// Lowest index wins ties.
std::size_t argmax(std::span<const double> values);

// Categorical probabilities per action from raw network output.
std::vector<std::vector<double>> categorical_probabilities(const ReturnHead& head, std::span<const double> logits);

// E[Z_theta(s, .)] from a raw network output row.
std::vector<double> expected_from_output(const ReturnHead& head, std::span<const double> output);

std::vector<double> expected_value(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state);
std::size_t greedy_action(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state);

// Mass that two-point linear interpolation assigns to each atom for a return
// x. Values outside the support are clipped to the boundary atom.
std::vector<double> project_onto_atoms(std::span<const double> atoms, double x);

struct EmpiricalTargets {
    std::vector<double> samples;
};

// One target x_j ~ r_j + gamma * Z_{theta_j}(s'_j, a') per tuple, with an
// independent theta_j ~ target_q for every tuple and a' greedy under theta_j.
// Terminal tuples give x_j = r_j. return_noise = false uses the mean of the
// Gaussian head instead of a draw (the sigma -> 0 limit).
EmpiricalTargets build_target_samples(std::span<const Transition> batch, const FactorizedGaussian& target_q,
                                      const ReturnHead& head, double gamma, Rng& rng, bool return_noise = true);

// -(1/N) sum_i log Z_theta(s, a)(x_i); for the gaussian head the constant
// normaliser is dropped, leaving the mean of (Q - x)^2 / (2 sigma^2).
double nll_empirical(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state,
                     std::size_t action, const EmpiricalTargets& targets);

// scale * sum_j NLL of x_j under Z_theta(s_j, a_j), recorded on the tape.
Var batch_nll(Tape& tape, const ReturnHead& head, std::span<const Var> theta, const Tensor& states,
              std::span<const std::size_t> actions, const EmpiricalTargets& targets, double scale);

// lambda * E_q[sum_j NLL_j] - (entropy_on ? H(q) : 0), with gradients for mu and
// rho left in q.
ObjectiveResult variational_objective(FactorizedGaussian& q, const ReturnHead& head, const Tensor& states,
                                      std::span<const std::size_t> actions, const EmpiricalTargets& targets,
                                      const ObjectiveWeights& weights, Rng* rng,
                                      const std::vector<std::vector<Tensor>>* fixed_noise = nullptr);

// Stacks equally sized rows into a [rows, dim] tensor.
Tensor stack_rows(std::span<const std::vector<double>> rows);

}  // namespace explore
