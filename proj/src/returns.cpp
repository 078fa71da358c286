#include "explore/returns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace explore {

ReturnHead ReturnHead::gaussian(MlpSpec net, double sigma)
{
    net.validate();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian head sigma must be > 0");
    ReturnHead h;
    h.kind_ = HeadKind::gaussian;
    h.actions_ = net.outputs();
    h.net_ = std::move(net);
    h.sigma_ = sigma;
    return h;
}

ReturnHead ReturnHead::categorical(MlpSpec net, std::vector<double> atoms)
{
    net.validate();
    if (atoms.size() < 2) throw std::invalid_argument("categorical head needs at least two atoms");
    for (std::size_t k = 1; k < atoms.size(); ++k)
        if (!(atoms[k] > atoms[k - 1])) throw std::invalid_argument("categorical atoms must be strictly increasing");
    if (net.outputs() % atoms.size() != 0)
        throw std::invalid_argument("categorical head: network outputs must be a multiple of the atom count");
    ReturnHead h;
    h.kind_ = HeadKind::categorical;
    h.actions_ = net.outputs() / atoms.size();
    h.net_ = std::move(net);
    h.atoms_ = std::move(atoms);
    return h;
}

std::size_t argmax(std::span<const double> values)
{
    if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::vector<std::vector<double>> categorical_probabilities(const ReturnHead& head, std::span<const double> logits)
{
    const std::size_t k = head.atoms().size();
    std::vector<std::vector<double>> probs(head.num_actions(), std::vector<double>(k));
    for (std::size_t a = 0; a < head.num_actions(); ++a) {
        const double* row = logits.data() + a * k;
        const double mx = *std::max_element(row, row + k);
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += (probs[a][j] = std::exp(row[j] - mx));
        for (double& p : probs[a]) p /= z;
    }
    return probs;
}

std::vector<double> expected_from_output(const ReturnHead& head, std::span<const double> output)
{
    if (head.kind() == HeadKind::gaussian) return {output.begin(), output.end()};
    const auto probs = categorical_probabilities(head, output);
    std::vector<double> q(head.num_actions(), 0.0);
    for (std::size_t a = 0; a < q.size(); ++a)
        for (std::size_t j = 0; j < head.atoms().size(); ++j) q[a] += probs[a][j] * head.atoms()[j];
    return q;
}

std::vector<double> expected_value(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state)
{
    return expected_from_output(head, mlp_forward(head.net(), theta, state));
}

std::size_t greedy_action(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state)
{
    return argmax(expected_value(head, theta, state));
}

std::vector<double> project_onto_atoms(std::span<const double> atoms, double x)
{
    std::vector<double> m(atoms.size(), 0.0);
    if (!std::isfinite(x)) throw std::domain_error("cannot project a non-finite return onto atoms");
    if (x <= atoms.front()) {
        m.front() = 1.0;
        return m;
    }
    if (x >= atoms.back()) {
        m.back() = 1.0;
        return m;
    }
    const auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - atoms.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - atoms[lo]) / (atoms[hi] - atoms[lo]);
    m[lo] = 1.0 - w;
    m[hi] = w;
    return m;
}

EmpiricalTargets build_target_samples(std::span<const Transition> batch, const FactorizedGaussian& target_q,
                                      const ReturnHead& head, double gamma, Rng& rng, bool return_noise)
{
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("discount gamma must be in (0, 1]");
    if (batch.empty()) throw std::invalid_argument("cannot build targets for an empty batch");

    const bool dirac = target_q.mode() == QMode::dirac;
    std::vector<Tensor> sigma;
    if (!dirac) sigma = target_q.sigma();

    EmpiricalTargets t;
    t.samples.reserve(batch.size());
    for (const Transition& tr : batch) {
        if (tr.done) {
            t.samples.push_back(tr.reward);
            continue;
        }
        const auto output = dirac ? mlp_forward(head.net(), target_q.mu(), tr.next_state)
                                  : mlp_sample_forward(head.net(), target_q.mu(), sigma, tr.next_state, rng);
        double z;
        if (head.kind() == HeadKind::gaussian) {
            const std::size_t a = argmax(output);
            z = output[a];
            if (return_noise) z += head.sigma() * rng.normal();
        } else {
            const auto q = expected_from_output(head, output);
            const std::size_t a = argmax(q);
            const auto probs = categorical_probabilities(head, output);
            double u = rng.uniform();
            std::size_t k = 0;
            while (k + 1 < probs[a].size() && u >= probs[a][k]) u -= probs[a][k++];
            z = head.atoms()[k];
        }
        t.samples.push_back(tr.reward + gamma * z);
    }
    return t;
}

double nll_empirical(const ReturnHead& head, std::span<const Tensor> theta, std::span<const double> state,
                     std::size_t action, const EmpiricalTargets& targets)
{
    if (targets.samples.empty()) throw std::invalid_argument("nll_empirical needs at least one target");
    if (action >= head.num_actions()) throw std::out_of_range("action index out of range");
    const auto output = mlp_forward(head.net(), theta, state);
    const double n = static_cast<double>(targets.samples.size());
    double total = 0.0;
    if (head.kind() == HeadKind::gaussian) {
        const double q = output[action];
        const double s2 = head.sigma() * head.sigma();
        for (double x : targets.samples) total += (q - x) * (q - x) / (2.0 * s2);
        return total / n;
    }
    const auto probs = categorical_probabilities(head, output);
    for (double x : targets.samples) {
        const auto m = project_onto_atoms(head.atoms(), x);
        for (std::size_t k = 0; k < m.size(); ++k)
            if (m[k] > 0.0) total -= m[k] * std::log(probs[action][k]);
    }
    return total / n;
}

Var batch_nll(Tape& tape, const ReturnHead& head, std::span<const Var> theta, const Tensor& states,
              std::span<const std::size_t> actions, const EmpiricalTargets& targets, double scale)
{
    const std::size_t n = states.dim(0);
    if (actions.size() != n || targets.samples.size() != n)
        throw std::invalid_argument("batch_nll: states, actions and targets must have the same length");
    const Var out = mlp_forward(tape, head.net(), theta, tape.constant(states));
    if (head.kind() == HeadKind::gaussian) {
        const Var q = tape.gather(out, actions);
        const Var diff = tape.subtract(q, tape.constant(Tensor::vector(targets.samples)));
        const double sigma = head.sigma();
        return tape.scale(tape.sum(tape.square(diff)), scale / (2.0 * sigma * sigma));
    }
    const std::size_t k = head.atoms().size();
    const std::size_t na = head.num_actions();
    const Var logp = tape.log_softmax(tape.reshape(out, {n * na, k}));
    std::vector<std::size_t> rows(n);
    Tensor mass({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        if (actions[i] >= na) throw std::out_of_range("action index out of range");
        rows[i] = i * na + actions[i];
        const auto m = project_onto_atoms(head.atoms(), targets.samples[i]);
        for (std::size_t j = 0; j < k; ++j) mass.at(i, j) = m[j];
    }
    const Var picked = tape.gather_rows(logp, rows);
    return tape.scale(tape.sum(tape.multiply(picked, tape.constant(std::move(mass)))), -scale);
}

ObjectiveResult variational_objective(FactorizedGaussian& q, const ReturnHead& head, const Tensor& states,
                                      std::span<const std::size_t> actions, const EmpiricalTargets& targets,
                                      const ObjectiveWeights& weights, Rng* rng,
                                      const std::vector<std::vector<Tensor>>* fixed_noise)
{
    const NllBuilder nll = [&](Tape& tape, std::span<const Var> theta, double scale) {
        return batch_nll(tape, head, theta, states, actions, targets, scale);
    };
    return variational_objective(q, weights, nll, rng, fixed_noise);
}

Tensor stack_rows(std::span<const std::vector<double>> rows)
{
    if (rows.empty()) throw std::invalid_argument("stack_rows: no rows");
    const std::size_t d = rows.front().size();
    Tensor t({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw std::invalid_argument("stack_rows: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), t.values().begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    return t;
}

}  // namespace explore
