#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "explore/autodiff.hpp"
#include "explore/rng.hpp"
#include "explore/tensor.hpp"

namespace explore {

enum class Activation { tanh, relu };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

// Fully connected network. widths = {inputs, hidden..., outputs}; the output
// layer is linear.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation hidden = Activation::relu;

    std::size_t inputs() const { return widths.front(); }
    std::size_t outputs() const { return widths.back(); }
    std::size_t layers() const { return widths.size() - 1; }

    // Parameter tensors in order W1, b1, W2, b2, ...; W_l has shape [in, out].
    std::vector<Shape> parameter_shapes() const;
    std::size_t parameter_count() const;
    void validate() const;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
std::vector<Tensor> init_mlp(const MlpSpec& spec, Rng& rng);

// Taped forward pass for a batch x of shape [batch, inputs].
Var mlp_forward(Tape& tape, const MlpSpec& spec, std::span<const Var> params, Var x);

// Plain forward pass for one input row, no tape.
std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const Tensor> params,
                                std::span<const double> x);

// One forward pass where every weight is an independent Gaussian with the given
// mean and standard deviation. Each layer's pre-activation is drawn directly
// from its exact conditional distribution given the previous layer's output,
// which has the same law as sampling all weights first and then evaluating.
std::vector<double> mlp_sample_forward(const MlpSpec& spec, std::span<const Tensor> mean,
                                       std::span<const Tensor> stddev, std::span<const double> x,
                                       Rng& rng);

}  // namespace explore
