#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "explore/tensor.hpp"

namespace explore {

enum class OptimizerMethod { sgd, adam };

OptimizerMethod parse_optimizer(const std::string& name);

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First-order update over a fixed list of parameter tensors. Each tensor must
// carry a gradient (Tensor::grad) when step() is called. Adam moments are kept
// per position in the list, so callers must pass the same tensors in the same
// order every time.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config = {});

    void step(std::span<Tensor* const> params);

    const OptimizerConfig& config() const { return config_; }
    std::uint64_t steps() const { return t_; }

private:
    OptimizerConfig config_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace explore
