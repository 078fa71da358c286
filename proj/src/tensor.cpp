#include "explore/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace explore {

std::size_t shape_size(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape))
{
    if (shape_.empty()) throw std::invalid_argument("tensor shape must have at least one axis");
    values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values))
{
    if (shape_.empty()) throw std::invalid_argument("tensor shape must have at least one axis");
    if (values_.size() != shape_size(shape_))
        throw std::invalid_argument("tensor of shape " + shape_string(shape_) + " given " +
                                    std::to_string(values_.size()) + " values");
}

Tensor Tensor::vector(std::vector<double> values)
{
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

double Tensor::item() const
{
    if (values_.size() != 1)
        throw std::invalid_argument("item() on tensor of shape " + shape_string(shape_));
    return values_[0];
}

void Tensor::set_grad(std::span<const double> g)
{
    if (g.size() != values_.size())
        throw std::invalid_argument("gradient size mismatch for tensor of shape " + shape_string(shape_));
    grad_.assign(g.begin(), g.end());
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (shape_size(shape) != values_.size())
        throw std::invalid_argument("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), values_);
}

}  // namespace explore
