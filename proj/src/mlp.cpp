#include "explore/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace explore {

Activation parse_activation(const std::string& name)
{
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation '" + name + "' (expected tanh or relu)");
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

void MlpSpec::validate() const
{
    if (widths.size() < 3) throw std::invalid_argument("mlp needs at least one hidden layer");
    for (std::size_t w : widths)
        if (w == 0) throw std::invalid_argument("mlp layer widths must be >= 1");
}

std::vector<Shape> MlpSpec::parameter_shapes() const
{
    std::vector<Shape> shapes;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        shapes.push_back({widths[l], widths[l + 1]});
        shapes.push_back({widths[l + 1]});
    }
    return shapes;
}

std::size_t MlpSpec::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& s : parameter_shapes()) n += shape_size(s);
    return n;
}

std::vector<Tensor> init_mlp(const MlpSpec& spec, Rng& rng)
{
    spec.validate();
    std::vector<Tensor> params;
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
        Tensor w({spec.widths[l], spec.widths[l + 1]});
        for (double& v : w.values()) v = rng.uniform(-bound, bound);
        Tensor b({spec.widths[l + 1]});
        for (double& v : b.values()) v = rng.uniform(-bound, bound);
        params.push_back(std::move(w));
        params.push_back(std::move(b));
    }
    return params;
}

Var mlp_forward(Tape& tape, const MlpSpec& spec, std::span<const Var> params, Var x)
{
    if (params.size() != 2 * spec.layers())
        throw std::invalid_argument("mlp_forward: expected " + std::to_string(2 * spec.layers()) +
                                    " parameter tensors, got " + std::to_string(params.size()));
    Var h = x;
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        h = tape.add(tape.matmul(h, params[2 * l]), params[2 * l + 1]);
        if (l + 1 < spec.layers()) h = spec.hidden == Activation::tanh ? tape.tanh(h) : tape.relu(h);
    }
    return h;
}

namespace {

void activate(Activation a, std::vector<double>& v)
{
    for (double& x : v) x = a == Activation::tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

void check_input(const MlpSpec& spec, std::size_t params, std::size_t x)
{
    if (params != 2 * spec.layers())
        throw std::invalid_argument("mlp_forward: wrong number of parameter tensors");
    if (x != spec.inputs())
        throw std::invalid_argument("mlp_forward: input has " + std::to_string(x) + " entries, network expects " +
                                    std::to_string(spec.inputs()));
}

}  // namespace

std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, std::span<const double> x)
{
    check_input(spec, params.size(), x.size());
    std::vector<double> h(x.begin(), x.end());
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        const Tensor& w = params[2 * l];
        const Tensor& b = params[2 * l + 1];
        const std::size_t n_in = spec.widths[l], n_out = spec.widths[l + 1];
        std::vector<double> out(n_out, 0.0);
        for (std::size_t i = 0; i < n_in; ++i) {
            const double hi = h[i];
            if (hi == 0.0) continue;
            for (std::size_t j = 0; j < n_out; ++j) out[j] += hi * w.at(i, j);
        }
        for (std::size_t j = 0; j < n_out; ++j) out[j] += b[j];
        if (l + 1 < spec.layers()) activate(spec.hidden, out);
        h = std::move(out);
    }
    return h;
}

std::vector<double> mlp_sample_forward(const MlpSpec& spec, std::span<const Tensor> mean,
                                       std::span<const Tensor> stddev, std::span<const double> x, Rng& rng)
{
    check_input(spec, mean.size(), x.size());
    if (stddev.size() != mean.size()) throw std::invalid_argument("mlp_sample_forward: stddev/mean mismatch");
    std::vector<double> h(x.begin(), x.end());
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        const Tensor& wm = mean[2 * l];
        const Tensor& ws = stddev[2 * l];
        const Tensor& bm = mean[2 * l + 1];
        const Tensor& bs = stddev[2 * l + 1];
        const std::size_t n_in = spec.widths[l], n_out = spec.widths[l + 1];
        std::vector<double> mu(n_out, 0.0), var(n_out, 0.0);
        for (std::size_t i = 0; i < n_in; ++i) {
            const double hi = h[i];
            if (hi == 0.0) continue;
            const double hi2 = hi * hi;
            for (std::size_t j = 0; j < n_out; ++j) {
                mu[j] += hi * wm.at(i, j);
                const double s = ws.at(i, j);
                var[j] += hi2 * s * s;
            }
        }
        for (std::size_t j = 0; j < n_out; ++j) {
            const double s = bs[j];
            mu[j] += bm[j] + std::sqrt(var[j] + s * s) * rng.normal();
        }
        if (l + 1 < spec.layers()) activate(spec.hidden, mu);
        h = std::move(mu);
    }
    return h;
}

}  // namespace explore
