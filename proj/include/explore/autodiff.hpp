#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "explore/tensor.hpp"

namespace explore {

// Handle to a node recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
    std::size_t id = 0;
};

// Reverse-mode automatic differentiation over dense tensors.
//
// Nodes are appended in evaluation order, so the node list is already a
// topological order and backward() is a single reverse sweep. Broadcasting is
// limited to adding a [n] bias to every row of an [m,n] matrix and to
// scale_by() with a one-element scalar node.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = default;
    Tape& operator=(Tape&&) = default;

    Var leaf(Tensor value);            // differentiable input
    Var constant(Tensor value);        // no gradient

    const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
    std::span<const double> grad(Var v) const;
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    // Fills the gradient of every node with d(output)/d(node). Gradients from a
    // previous call are discarded first, so calling twice gives the same result.
    void backward(Var output);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var subtract(Var a, Var b);
    Var multiply(Var a, Var b);
    Var scale(Var a, double c);
    Var scale_by(Var a, Var scalar);
    Var offset(Var a, double c);
    Var square(Var a);
    Var sum(Var a);
    Var mean(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var log(Var a);
    Var exp(Var a);
    Var softplus(Var a);
    Var log_softmax(Var a);                                   // over the last axis
    Var gather(Var a, std::span<const std::size_t> columns);  // [m,n] -> [m], picks a[i, columns[i]]
    Var gather_rows(Var a, std::span<const std::size_t> rows);
    Var reshape(Var a, Shape shape);
    Var concat_cols(Var a, Var b);

private:
    using Backward = std::function<void(Tape&, std::size_t self)>;

    struct Node {
        Tensor value;
        std::vector<double> grad;
        std::vector<std::size_t> inputs;
        Backward backward;
        bool requires_grad = false;
    };

    Var push(Tensor value, std::vector<std::size_t> inputs, Backward backward);
    std::vector<double>& grad_ref(std::size_t id) { return nodes_[id].grad; }

    std::vector<Node> nodes_;
};

}  // namespace explore
