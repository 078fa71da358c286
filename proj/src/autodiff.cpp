#include "explore/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace explore {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b)
{
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                                shape_string(b));
}

double softplus_value(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t last_axis(const Shape& s) { return s.back(); }

}  // namespace

Var Tape::push(Tensor value, std::vector<std::size_t> inputs, Backward backward)
{
    Node node;
    node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                     [this](std::size_t i) { return nodes_[i].requires_grad; });
    node.value = std::move(value);
    node.inputs = std::move(inputs);
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

Var Tape::leaf(Tensor value)
{
    Node node;
    node.value = std::move(value);
    node.requires_grad = true;
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value)
{
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

std::span<const double> Tape::grad(Var v) const
{
    const Node& n = nodes_.at(v.id);
    if (n.grad.empty()) throw std::logic_error("no gradient recorded for node; call backward() first");
    return n.grad;
}

void Tape::backward(Var output)
{
    if (output.id >= nodes_.size()) throw std::invalid_argument("backward: unknown node");
    if (nodes_[output.id].value.size() != 1)
        throw std::invalid_argument("backward: output must be scalar, got shape " +
                                    shape_string(nodes_[output.id].value.shape()));
    for (std::size_t i = 0; i <= output.id; ++i) {
        Node& n = nodes_[i];
        if (n.requires_grad) n.grad.assign(n.value.size(), 0.0);
        else n.grad.clear();
    }
    if (!nodes_[output.id].requires_grad) return;
    nodes_[output.id].grad[0] = 1.0;
    for (std::size_t i = output.id + 1; i-- > 0;) {
        if (nodes_[i].requires_grad && nodes_[i].backward) nodes_[i].backward(*this, i);
    }
}

Var Tape::matmul(Var a, Var b)
{
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) shape_error("matmul", A.shape(), B.shape());
    const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = A.at(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * B.at(p, j);
        }
    return push(std::move(out), {a.id, b.id}, [a, b, m, k, n](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        const Tensor& B = t.nodes_[b.id].value;
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B.at(p, j);
                    ga[i * k + p] += acc;
                }
        }
        if (t.nodes_[b.id].requires_grad) {
            auto& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = A.at(i, p);
                    if (aip == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
                }
        }
    });
}

Var Tape::add(Var a, Var b)
{
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape() == B.shape()) {
        Tensor out = A;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
        return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, std::size_t self) {
            const auto& g = t.nodes_[self].grad;
            for (std::size_t id : {a.id, b.id}) {
                if (!t.nodes_[id].requires_grad) continue;
                auto& gi = t.grad_ref(id);
                for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
            }
        });
    }
    // bias add: [m,n] + [n]
    if (A.rank() != 2 || B.rank() != 1 || A.dim(1) != B.dim(0)) shape_error("add", A.shape(), B.shape());
    const std::size_t m = A.dim(0), n = A.dim(1);
    Tensor out = A;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) += B[j];
    return push(std::move(out), {a.id, b.id}, [a, b, m, n](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.nodes_[b.id].requires_grad) {
            auto& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
    });
}

Var Tape::subtract(Var a, Var b)
{
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape() != B.shape()) shape_error("subtract", A.shape(), B.shape());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
    return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.nodes_[b.id].requires_grad) {
            auto& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var Tape::multiply(Var a, Var b)
{
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape() != B.shape()) shape_error("multiply", A.shape(), B.shape());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
    return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        const Tensor& B = t.nodes_[b.id].value;
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
        }
        if (t.nodes_[b.id].requires_grad) {
            auto& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
        }
    });
}

Var Tape::scale(Var a, double c)
{
    Tensor out = value(a);
    for (double& v : out.values()) v *= c;
    return push(std::move(out), {a.id}, [a, c](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
}

Var Tape::scale_by(Var a, Var s)
{
    const Tensor& S = value(s);
    if (S.size() != 1) shape_error("scale_by", value(a).shape(), S.shape());
    const double c = S[0];
    Tensor out = value(a);
    for (double& v : out.values()) v *= c;
    return push(std::move(out), {a.id, s.id}, [a, s](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        const double c = t.nodes_[s.id].value[0];
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
        }
        if (t.nodes_[s.id].requires_grad) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * A[i];
            t.grad_ref(s.id)[0] += acc;
        }
    });
}

Var Tape::offset(Var a, double c)
{
    Tensor out = value(a);
    for (double& v : out.values()) v += c;
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var Tape::square(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) v *= v;
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * A[i] * g[i];
    });
}

Var Tape::sum(Var a)
{
    double acc = 0.0;
    for (double v : value(a).values()) acc += v;
    return push(Tensor::scalar(acc), {a.id}, [a](Tape& t, std::size_t self) {
        const double g = t.nodes_[self].grad[0];
        for (double& gi : t.grad_ref(a.id)) gi += g;
    });
}

Var Tape::mean(Var a)
{
    const double n = static_cast<double>(value(a).size());
    double acc = 0.0;
    for (double v : value(a).values()) acc += v;
    return push(Tensor::scalar(acc / n), {a.id}, [a, n](Tape& t, std::size_t self) {
        const double g = t.nodes_[self].grad[0] / n;
        for (double& gi : t.grad_ref(a.id)) gi += g;
    });
}

Var Tape::tanh(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) v = std::tanh(v);
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& y = t.nodes_[self].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var Tape::relu(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (A[i] > 0.0) ga[i] += g[i];
    });
}

Var Tape::log(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) {
        if (!(v > 0.0)) throw std::domain_error("log: argument " + std::to_string(v) + " is not positive");
        v = std::log(v);
    }
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / A[i];
    });
}

Var Tape::exp(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) v = std::exp(v);
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& y = t.nodes_[self].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    });
}

Var Tape::softplus(Var a)
{
    Tensor out = value(a);
    for (double& v : out.values()) {
        if (!std::isfinite(v)) throw std::domain_error("softplus: non-finite argument");
        v = softplus_value(v);
    }
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& A = t.nodes_[a.id].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * sigmoid(A[i]);
    });
}

Var Tape::log_softmax(Var a)
{
    const Tensor& A = value(a);
    if (A.rank() > 2) throw std::invalid_argument("log_softmax: rank > 2 not supported, got " + shape_string(A.shape()));
    const std::size_t n = last_axis(A.shape());
    const std::size_t rows = A.size() / n;
    Tensor out = A;
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = out.values().data() + r * n;
        const double mx = *std::max_element(row, row + n);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) z += std::exp(row[j] - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < n; ++j) row[j] -= lse;
    }
    return push(std::move(out), {a.id}, [a, rows, n](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        const Tensor& y = t.nodes_[self].value;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t r = 0; r < rows; ++r) {
            double gsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) gsum += g[r * n + j];
            for (std::size_t j = 0; j < n; ++j)
                ga[r * n + j] += g[r * n + j] - std::exp(y[r * n + j]) * gsum;
        }
    });
}

Var Tape::gather(Var a, std::span<const std::size_t> columns)
{
    const Tensor& A = value(a);
    if (A.rank() != 2 || A.dim(0) != columns.size())
        shape_error("gather", A.shape(), Shape{columns.size()});
    const std::size_t m = A.dim(0), n = A.dim(1);
    std::vector<std::size_t> cols(columns.begin(), columns.end());
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        if (cols[i] >= n) throw std::out_of_range("gather: column index out of range");
        out[i] = A.at(i, cols[i]);
    }
    return push(std::move(out), {a.id}, [a, n, cols = std::move(cols)](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < cols.size(); ++i) ga[i * n + cols[i]] += g[i];
    });
}

Var Tape::gather_rows(Var a, std::span<const std::size_t> rows)
{
    const Tensor& A = value(a);
    if (A.rank() != 2) throw std::invalid_argument("gather_rows: expected rank 2, got " + shape_string(A.shape()));
    const std::size_t n = A.dim(1);
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    Tensor out({idx.size(), n});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= A.dim(0)) throw std::out_of_range("gather_rows: row index out of range");
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = A.at(idx[i], j);
    }
    return push(std::move(out), {a.id}, [a, n, idx = std::move(idx)](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) ga[idx[i] * n + j] += g[i * n + j];
    });
}

Var Tape::reshape(Var a, Shape shape)
{
    Tensor out = value(a).reshaped(std::move(shape));
    return push(std::move(out), {a.id}, [a](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        auto& ga = t.grad_ref(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var Tape::concat_cols(Var a, Var b)
{
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rank() != 2 || B.rank() != 2 || A.dim(0) != B.dim(0)) shape_error("concat_cols", A.shape(), B.shape());
    const std::size_t m = A.dim(0), p = A.dim(1), q = B.dim(1);
    Tensor out({m, p + q});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) out.at(i, j) = A.at(i, j);
        for (std::size_t j = 0; j < q; ++j) out.at(i, p + j) = B.at(i, j);
    }
    return push(std::move(out), {a.id, b.id}, [a, b, m, p, q](Tape& t, std::size_t self) {
        const auto& g = t.nodes_[self].grad;
        if (t.nodes_[a.id].requires_grad) {
            auto& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < p; ++j) ga[i * p + j] += g[i * (p + q) + j];
        }
        if (t.nodes_[b.id].requires_grad) {
            auto& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < q; ++j) gb[i * q + j] += g[i * (p + q) + p + j];
        }
    });
}

}  // namespace explore
