#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace explore {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. The shape is fixed at construction; use
// reshaped() to get a copy with a different shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor vector(std::vector<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    // rank-2 access
    double& at(std::size_t row, std::size_t col) { return values_[row * shape_[1] + col]; }
    double at(std::size_t row, std::size_t col) const { return values_[row * shape_[1] + col]; }

    double item() const;

    bool has_grad() const { return !grad_.empty(); }
    std::span<double> grad() { return grad_; }
    std::span<const double> grad() const { return grad_; }
    void set_grad(std::span<const double> g);
    void zero_grad() { grad_.assign(values_.size(), 0.0); }
    void clear_grad() { grad_.clear(); }

    Tensor reshaped(Shape shape) const;

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.values_ == b.values_;
    }

private:
    Shape shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
};

}  // namespace explore
