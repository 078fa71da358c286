#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "explore/harness.hpp"

namespace explore {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::vector<GridCell> parse_grid(const std::string& text)
{
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    const auto known = config_keys();
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("grid line " + std::to_string(lineno) + ": expected key = v1, v2, ...");
        const std::string key = trim(line.substr(0, eq));
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("grid line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        // hidden takes a comma list itself, so its alternatives are separated by '|'.
        const char sep = key == "hidden" || key == "bandit_means" ? '|' : ',';
        std::vector<std::string> values;
        std::istringstream vs(line.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, sep))
            if (!trim(v).empty()) values.push_back(trim(v));
        if (values.empty()) throw std::invalid_argument("grid line " + std::to_string(lineno) + ": no values");
        axes.emplace_back(key, std::move(values));
    }
    if (axes.empty()) throw std::invalid_argument("grid is empty");

    std::vector<GridCell> cells(1);
    for (const auto& [key, values] : axes) {
        std::vector<GridCell> next;
        for (const auto& cell : cells)
            for (const auto& v : values) {
                GridCell c = cell;
                c.overrides[key] = v;
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    return cells;
}

std::vector<GridCell> load_grid(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open grid file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str());
}

std::size_t worker_count_from_env()
{
    const char* v = std::getenv("EXPLORE_WORKERS");
    if (v && *v) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(v, &end, 10);
        if (*end == '\0' && n > 0) return n;
        throw std::invalid_argument(std::string("EXPLORE_WORKERS must be a positive integer, got '") + v + "'");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

std::vector<GridRank> grid_search(const ExperimentConfig& base, const std::vector<GridCell>& grid, std::size_t seeds,
                                  std::size_t workers)
{
    if (grid.empty()) throw std::invalid_argument("grid is empty");
    if (seeds == 0) throw std::invalid_argument("grid search needs at least one seed");
    if (workers == 0) workers = 1;

    struct Job {
        std::size_t cell;
        std::size_t seed_index;
    };
    struct Outcome {
        bool ok = false;
        double score = 0.0;
        std::string error;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < grid.size(); ++c)
        for (std::size_t s = 0; s < seeds; ++s) jobs.push_back({c, s});
    std::vector<Outcome> outcomes(jobs.size());

    const std::filesystem::path root = base.out;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            Outcome& out = outcomes[j];
            try {
                ExperimentConfig cfg = base;
                for (const auto& [k, v] : grid[job.cell].overrides) cfg.set(k, v);
                cfg.seed = base.seed + job.seed_index;
                cfg.out = (root / ("cell_" + std::to_string(job.cell)) / ("seed_" + std::to_string(cfg.seed))).string();
                const RunResult r = run_experiment(cfg, true);
                if (r.aborted) {
                    out.error = "aborted at episode " + std::to_string(r.aborted_episode) + ": " + r.abort_reason;
                } else {
                    out.ok = true;
                    out.score = r.final_moving_average;
                }
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const std::size_t n_threads = std::min(workers, jobs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<GridRank> ranks(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        ranks[c].cell = c;
        ranks[c].overrides = grid[c].overrides;
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        GridRank& r = ranks[jobs[j].cell];
        if (outcomes[j].ok) {
            r.mean_score += outcomes[j].score;
            ++r.completed;
        } else {
            ++r.failed;
            r.errors.push_back(outcomes[j].error);
        }
    }
    for (auto& r : ranks)
        if (r.completed) r.mean_score /= static_cast<double>(r.completed);
    // Cells with no completed seed sink to the bottom; ties keep grid order.
    std::stable_sort(ranks.begin(), ranks.end(), [](const GridRank& a, const GridRank& b) {
        if ((a.completed > 0) != (b.completed > 0)) return a.completed > 0;
        return a.mean_score > b.mean_score;
    });

    std::filesystem::create_directories(root);
    std::ofstream csv(root / "ranking.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (root / "ranking.csv").string());
    csv << "rank,cell,overrides,mean_score,completed,failed\n";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const GridRank& r = ranks[i];
        std::string ov;
        for (const auto& [k, v] : r.overrides) ov += (ov.empty() ? "" : " ") + k + "=" + v;
        char score[64];
        std::snprintf(score, sizeof score, "%.12g", r.mean_score);
        csv << i + 1 << ',' << r.cell << ',' << csv_field(ov) << ',' << (r.completed ? score : "nan") << ','
            << r.completed << ',' << r.failed << '\n';
    }
    return ranks;
}

}  // namespace explore
