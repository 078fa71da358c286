#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "explore/harness.hpp"

namespace explore {

double discounted_return(std::span<const double> rewards, double gamma)
{
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    double total = 0.0;
    double weight = 1.0;
    for (double r : rewards) {
        total += weight * r;
        weight *= gamma;
    }
    return total;
}

double plotted_reward(EnvId env, const MetricsRow& row)
{
    switch (env) {
    case EnvId::cartpole:
    case EnvId::pendulum_continuous: return static_cast<double>(row.steps);
    case EnvId::mountaincar: return row.terminated ? 1.0 : 0.0;
    case EnvId::acrobot: return -static_cast<double>(row.steps);
    case EnvId::chain: return row.raw_return;
    }
    throw std::invalid_argument("unknown environment");
}

double plotted_reward(const std::string& env, const MetricsRow& row) { return plotted_reward(parse_env_id(env), row); }

std::vector<double> moving_average(std::span<const double> series, std::size_t window)
{
    if (window == 0) throw std::invalid_argument("moving average window must be >= 1");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t first = i + 1 > window ? i + 1 - window : 0;
        double acc = 0.0;
        for (std::size_t k = first; k <= i; ++k) acc += series[k];
        out[i] = acc / static_cast<double>(i + 1 - first);
    }
    return out;
}

std::vector<double> visit_frequency(std::span<const MetricsRow> rows, std::size_t window)
{
    if (window == 0) throw std::invalid_argument("visit frequency window must be >= 1");
    if (rows.empty()) return {};
    const std::size_t n = rows.back().visits.size();
    if (n == 0) throw std::invalid_argument("visit frequency is only defined for chain runs");
    const std::size_t count = rows.size() < window ? rows.size() : window;
    std::vector<double> freq(n, 0.0);
    for (std::size_t r = rows.size() - count; r < rows.size(); ++r) {
        if (rows[r].visits.size() != n) throw std::invalid_argument("visit bitmaps have different lengths");
        for (std::size_t i = 0; i < n; ++i) freq[i] += rows[r].visits[i] ? 1.0 : 0.0;
    }
    for (double& f : freq) f /= static_cast<double>(count);
    return freq;
}

std::string metrics_header()
{
    return "episode,steps,raw_return,sparse_return,plotted_reward,max_state,visit_bitmap,wall_ms";
}

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row)
{
    std::string bits;
    for (std::size_t i = 0; i < row.visits.size(); ++i) {
        if (i) bits += ';';
        bits += row.visits[i] ? '1' : '0';
    }
    std::ostringstream out;
    out << row.episode << ',' << row.steps << ',' << num(row.raw_return) << ',' << num(row.sparse_return) << ','
        << num(row.plotted_reward) << ',' << row.max_state << ',' << bits << ',' << num(row.wall_ms);
    return out.str();
}

void write_metrics_csv(const std::filesystem::path& file, std::span<const MetricsRow> rows)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << metrics_header() << '\n';
    for (const auto& r : rows) out << format_metrics_row(r) << '\n';
}

std::optional<std::size_t> first_iteration_reaching(std::span<const double> series, double threshold)
{
    const auto avg = moving_average(series, kEpisodesPerIteration);
    for (std::size_t i = kEpisodesPerIteration - 1; i < avg.size(); ++i)
        if (avg[i] >= threshold) return i / kEpisodesPerIteration + 1;
    return std::nullopt;
}

}  // namespace explore
