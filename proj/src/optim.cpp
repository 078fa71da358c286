#include "explore/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace explore {

OptimizerMethod parse_optimizer(const std::string& name)
{
    if (name == "sgd") return OptimizerMethod::sgd;
    if (name == "adam") return OptimizerMethod::adam;
    throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config)
{
    if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
}

void Optimizer::step(std::span<Tensor* const> params)
{
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i]->has_grad())
            throw std::invalid_argument("optimizer: parameter " + std::to_string(i) + " has no gradient");

    const double lr = config_.learning_rate;
    if (config_.method == OptimizerMethod::sgd) {
        for (Tensor* p : params) {
            auto v = p->values();
            auto g = p->grad();
            for (std::size_t k = 0; k < v.size(); ++k) v[k] -= lr * g[k];
        }
        ++t_;
        return;
    }

    if (m_.empty()) {
        for (Tensor* p : params) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw std::invalid_argument("optimizer: parameter list changed between steps");

    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto v = params[i]->values();
        auto g = params[i]->grad();
        if (v.size() != m_[i].size()) throw std::invalid_argument("optimizer: parameter shape changed between steps");
        auto& m = m_[i];
        auto& s = v_[i];
        for (std::size_t k = 0; k < v.size(); ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            s[k] = b2 * s[k] + (1.0 - b2) * g[k] * g[k];
            const double mhat = m[k] / c1;
            const double shat = s[k] / c2;
            v[k] -= lr * mhat / (std::sqrt(shat) + config_.epsilon);
        }
    }
}

}  // namespace explore
