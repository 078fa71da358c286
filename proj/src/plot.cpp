#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "explore/harness.hpp"

namespace explore {

PlotKind parse_plot_kind(const std::string& name)
{
    if (name == "reward") return PlotKind::reward;
    if (name == "visits") return PlotKind::visits;
    if (name == "trajectory") return PlotKind::trajectory;
    throw std::invalid_argument("unknown plot kind '" + name + "' (expected reward, visits or trajectory)");
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(file.string() + " is empty");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_csv_line(line);
        if (row.size() != t.header.size())
            throw std::runtime_error(file.string() + ": row has " + std::to_string(row.size()) + " fields, header has " +
                                     std::to_string(t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

constexpr double kWidth = 720, kHeight = 440, kLeft = 70, kRight = 170, kTop = 30, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string color(std::size_t i) { return kColors[i % (sizeof kColors / sizeof kColors[0])]; }

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else if (c == '"') out += "&quot;";
        else out += c;
    }
    return out;
}

std::string run_label(const std::filesystem::path& dir)
{
    std::filesystem::path p = dir;
    if (!p.has_filename()) p = p.parent_path();
    return p.filename().string();
}

double to_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad number '" + s + "' in " + what);
    }
}

struct Range {
    double lo = INFINITY, hi = -INFINITY;
    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle()
    {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    }
};

// Axis frame plus a mapping from data to pixel coordinates.
class Canvas {
public:
    Canvas(Range x, Range y, std::string title, std::string xlabel, std::string ylabel) : x_(x), y_(y)
    {
        x_.settle();
        y_.settle();
        body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
              << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
              << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
              << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">" << escape(title) << "</text>\n";
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        body_ << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
              << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = x_.lo + (x_.hi - x_.lo) * i / 4.0;
            const double fy = y_.lo + (y_.hi - y_.lo) * i / 4.0;
            body_ << "<text x=\"" << px(fx) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << num(fx)
                  << "</text>\n";
            body_ << "<text x=\"" << x0 - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << num(fy)
                  << "</text>\n";
        }
        body_ << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
              << escape(xlabel) << "</text>\n"
              << "<text transform=\"translate(16," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
              << escape(ylabel) << "</text>\n";
    }

    double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kRight - kLeft); }
    double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kBottom - kTop); }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& c)
    {
        body_ << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) body_ << num(px(xs[i])) << ',' << num(py(ys[i])) << ' ';
        body_ << "\"/>\n";
    }

    void dot(double x, double y, const std::string& c)
    {
        body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"1.5\" fill=\"" << c
              << "\" fill-opacity=\"0.6\"/>\n";
    }

    void bar(double x_left, double x_right, double y, const std::string& c)
    {
        const double top = py(std::max(y, y_.lo)), base = py(std::max(0.0, y_.lo));
        body_ << "<rect x=\"" << num(px(x_left)) << "\" y=\"" << num(std::min(top, base)) << "\" width=\""
              << num(px(x_right) - px(x_left)) << "\" height=\"" << num(std::abs(base - top)) << "\" fill=\"" << c
              << "\"/>\n";
    }

    void legend(const std::vector<std::string>& labels)
    {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double y = kTop + 14 + 18.0 * static_cast<double>(i);
            body_ << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"10\" fill=\""
                  << color(i) << "\"/>\n"
                  << "<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y << "\">" << escape(labels[i]) << "</text>\n";
        }
    }

    void save(const std::filesystem::path& out)
    {
        if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out.string());
        f << body_.str() << "</svg>\n";
    }

private:
    Range x_, y_;
    std::ostringstream body_;
};

void plot_rewards(std::span<const std::filesystem::path> runs, const std::filesystem::path& out)
{
    std::vector<std::vector<double>> xs, ys;
    std::vector<std::string> labels;
    Range xr, yr;
    for (const auto& dir : runs) {
        const CsvTable t = read_csv(dir / "metrics.csv");
        const std::size_t ep = t.column("episode"), pr = t.column("plotted_reward");
        std::vector<double> series, x;
        for (const auto& row : t.rows) {
            series.push_back(to_double(row[pr], "plotted_reward"));
            x.push_back(to_double(row[ep], "episode") / static_cast<double>(kEpisodesPerIteration));
        }
        std::vector<double> avg = moving_average(series, kEpisodesPerIteration);
        for (double v : x) xr.add(v);
        for (double v : avg) yr.add(v);
        xs.push_back(std::move(x));
        ys.push_back(std::move(avg));
        labels.push_back(run_label(dir));
    }
    Canvas c(xr, yr, "reward (20-episode moving average)", "iteration", "plotted reward");
    for (std::size_t i = 0; i < xs.size(); ++i) c.polyline(xs[i], ys[i], color(i));
    c.legend(labels);
    c.save(out);
}

void plot_visits(std::span<const std::filesystem::path> runs, const std::filesystem::path& out)
{
    std::vector<std::vector<double>> freqs;
    std::vector<std::string> labels;
    std::size_t states = 0;
    for (const auto& dir : runs) {
        const CsvTable t = read_csv(dir / "metrics.csv");
        const std::size_t vb = t.column("visit_bitmap");
        std::vector<MetricsRow> rows;
        for (const auto& row : t.rows) {
            MetricsRow m;
            std::istringstream bits(row[vb]);
            std::string b;
            while (std::getline(bits, b, ';')) m.visits.push_back(b == "1");
            rows.push_back(std::move(m));
        }
        if (rows.empty() || rows.front().visits.empty())
            throw std::invalid_argument(dir.string() + ": visit_bitmap is empty (not a chain run)");
        const std::size_t n = std::min(rows.size(), kEpisodesPerIteration);
        freqs.push_back(visit_frequency(std::span<const MetricsRow>(rows.data(), n), n));
        states = std::max(states, freqs.back().size());
        labels.push_back(run_label(dir));
    }
    Range xr{0.5, static_cast<double>(states) + 0.5}, yr{0.0, 1.0};
    Canvas c(xr, yr, "state visit frequency, first iteration", "state index", "frequency");
    const double width = 0.8 / static_cast<double>(freqs.size());
    for (std::size_t r = 0; r < freqs.size(); ++r)
        for (std::size_t s = 0; s < freqs[r].size(); ++s) {
            const double left = static_cast<double>(s + 1) - 0.4 + width * static_cast<double>(r);
            c.bar(left, left + width, freqs[r][s], color(r));
        }
    c.legend(labels);
    c.save(out);
}

void plot_trajectories(std::span<const std::filesystem::path> runs, const std::filesystem::path& out)
{
    std::vector<std::vector<std::pair<double, double>>> points;
    std::vector<std::string> labels;
    Range xr, yr;
    for (const auto& dir : runs) {
        const CsvTable t = read_csv(dir / "trajectories.csv");
        const std::size_t a = t.column("x0"), b = t.column("x1");
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : t.rows) {
            const double x = to_double(row[a], "x0"), y = to_double(row[b], "x1");
            xr.add(x);
            yr.add(y);
            pts.emplace_back(x, y);
        }
        points.push_back(std::move(pts));
        labels.push_back(run_label(dir));
    }
    Canvas c(xr, yr, "visited states", "observation[0]", "observation[1]");
    for (std::size_t r = 0; r < points.size(); ++r)
        for (const auto& [x, y] : points[r]) c.dot(x, y, color(r));
    c.legend(labels);
    c.save(out);
}

}  // namespace

void emit_plots(std::span<const std::filesystem::path> runs, PlotKind kind, const std::filesystem::path& out)
{
    if (runs.empty()) throw std::invalid_argument("no run directories given");
    switch (kind) {
    case PlotKind::reward: plot_rewards(runs, out); break;
    case PlotKind::visits: plot_visits(runs, out); break;
    case PlotKind::trajectory: plot_trajectories(runs, out); break;
    }
}

}  // namespace explore
