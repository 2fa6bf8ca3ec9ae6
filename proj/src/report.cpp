#include "txadapt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"

namespace txadapt {

namespace {

std::string fmt4g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// Color ramp stops (dark violet to yellow), evenly spaced on [0, 1].
constexpr int kStopCount = 9;
constexpr int kStops[kStopCount][3] = {
    {68, 1, 84},   {72, 40, 120},  {62, 74, 137},  {49, 104, 142}, {38, 130, 142},
    {31, 158, 137}, {53, 183, 121}, {109, 205, 89}, {253, 231, 37},
};

std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    double x = t * (kStopCount - 1);
    int lo = std::min(static_cast<int>(x), kStopCount - 2);
    double f = x - lo;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        double v = kStops[lo][c] + f * (kStops[lo + 1][c] - kStops[lo][c]);
        rgb[c] = std::clamp(static_cast<int>(std::lround(v)), 0, 255);
    }
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t axis_index(const std::vector<double>& axis, double v) {
    auto it = std::lower_bound(axis.begin(), axis.end(), v);
    if (it == axis.end() || *it != v) throw ConfigError("grid point off the heatmap axes");
    return static_cast<std::size_t>(it - axis.begin());
}

}  // namespace

std::pair<double, double> availability_interval(double p_hat, std::size_t locations) {
    if (locations == 0) throw ConfigError("confidence interval needs at least one location");
    double se = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(locations));
    double lo = p_hat - 1.96 * se;
    double hi = p_hat + 1.96 * se;
    return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

AvailabilityEntry availability(std::span<const double> dvps, double xi) {
    if (dvps.empty()) throw ConfigError("availability needs at least one location");
    std::size_t ok = 0;
    for (double d : dvps)
        if (d <= xi) ++ok;
    AvailabilityEntry entry;
    entry.locations = dvps.size();
    entry.p_hat = static_cast<double>(ok) / static_cast<double>(dvps.size());
    auto [lo, hi] = availability_interval(entry.p_hat, entry.locations);
    entry.ci_lo = lo;
    entry.ci_hi = hi;
    return entry;
}

std::vector<std::pair<std::string, std::vector<LocationOutcome>>> read_results(
    const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    require_header(table, {"scheme", "x_m", "y_m", "avg_power_mw", "dvp"}, path);
    std::vector<std::pair<std::string, std::vector<LocationOutcome>>> out;
    for (const auto& row : table.rows) {
        const std::string& name = row[0];
        if (out.empty() || out.back().first != name) out.push_back({name, {}});
        LocationOutcome o;
        o.where.x = parse_double(row[1], "x_m");
        o.where.y = parse_double(row[2], "y_m");
        o.avg_power_w = parse_double(row[3], "avg_power_mw") * 1e-3;
        o.dvp = parse_double(row[4], "dvp");
        out.back().second.push_back(o);
    }
    return out;
}

void write_heatmap_svg(const std::filesystem::path& path, const std::vector<Point>& grid,
                       const std::vector<double>& values, const std::string& title) {
    if (grid.size() != values.size() || grid.empty())
        throw ConfigError("heatmap needs one value per grid point");
    std::vector<double> xs, ys;
    xs.reserve(grid.size());
    ys.reserve(grid.size());
    for (const auto& p : grid) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    xs = sorted_unique(std::move(xs));
    ys = sorted_unique(std::move(ys));
    const std::size_t nx = xs.size(), ny = ys.size();

    double vmin = values[0], vmax = values[0];
    for (double v : values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    const bool flat = !(vmax > vmin);

    const int cell = 22;
    const int left = 50, top = 42, bottom = 34, right = 110;
    const int width = left + static_cast<int>(nx) * cell + right;
    const int height = top + static_cast<int>(ny) * cell + bottom;

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileFormatError("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-family=\"monospace\" font-size=\"15\">"
        << title << "</text>\n";

    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::size_t cx = axis_index(xs, grid[i].x);
        std::size_t cy = axis_index(ys, grid[i].y);
        double t = flat ? 0.5 : (values[i] - vmin) / (vmax - vmin);
        int px = left + static_cast<int>(cx) * cell;
        int py = top + static_cast<int>(ny - 1 - cy) * cell;
        out << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell << "\" height=\""
            << cell << "\" fill=\"" << ramp_color(t) << "\"/>\n";
    }

    // Axis extent labels.
    out << "<text x=\"" << left << "\" y=\"" << (top + static_cast<int>(ny) * cell + 16)
        << "\" font-family=\"monospace\" font-size=\"11\">x " << fmt4g(xs.front()) << " .. "
        << fmt4g(xs.back()) << " m</text>\n";
    out << "<text x=\"6\" y=\"" << top << "\" font-family=\"monospace\" font-size=\"11\">y "
        << fmt4g(ys.back()) << "</text>\n";
    out << "<text x=\"6\" y=\"" << (top + static_cast<int>(ny) * cell)
        << "\" font-family=\"monospace\" font-size=\"11\">y " << fmt4g(ys.front()) << "</text>\n";

    // Legend: vertical ramp with min/max labels.
    const int lx = left + static_cast<int>(nx) * cell + 22;
    const int lh = static_cast<int>(ny) * cell;
    const int slices = 48;
    for (int s = 0; s < slices; ++s) {
        double t = (slices == 1) ? 0.5 : static_cast<double>(s) / (slices - 1);
        int y0 = top + lh - (s + 1) * lh / slices;
        int y1 = top + lh - s * lh / slices;
        out << "<rect x=\"" << lx << "\" y=\"" << y0 << "\" width=\"16\" height=\""
            << (y1 - y0) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
    }
    out << "<text x=\"" << (lx + 22) << "\" y=\"" << (top + 10)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt4g(vmax) << "</text>\n";
    out << "<text x=\"" << (lx + 22) << "\" y=\"" << (top + lh)
        << "\" font-family=\"monospace\" font-size=\"12\">" << fmt4g(vmin) << "</text>\n";
    out << "</svg>\n";
    if (!out) throw FileFormatError("failed writing " + path.string());
}

void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                  const std::vector<std::pair<std::string, std::vector<LocationOutcome>>>& by_scheme) {
    if (by_scheme.empty()) throw ConfigError("report needs at least one scheme");
    std::filesystem::create_directories(dir);

    std::vector<Point> grid;
    for (const auto& o : by_scheme.front().second) grid.push_back(o.where);

    std::ofstream md(dir / "report.md", std::ios::binary);
    if (!md) throw FileFormatError("cannot open report.md for writing");

    md << "# Transmission adaptation report\n\n";
    md << "## Setup\n\n";
    md << "| Parameter | Value |\n|---|---|\n";
    md << "| locations | " << grid.size() << " (spacing " << fmt4g(cfg.field.grid_spacing_m)
       << " m) |\n";
    md << "| known locations M | " << cfg.M << " |\n";
    md << "| samples per known location U | " << cfg.U << " |\n";
    md << "| arrival rate lambda | " << fmt4g(cfg.lambda) << " bits/slot |\n";
    md << "| channel uses per slot n | " << cfg.n << " |\n";
    md << "| delay bound D_max | " << cfg.D_max << " slots |\n";
    md << "| DVP target xi | " << fmt4g(cfg.xi) << " |\n";
    md << "| clusters K | " << cfg.K << " |\n";
    md << "| meta tasks N | " << cfg.N << " |\n";
    md << "| evaluation slots per location | " << cfg.eval_slots << " |\n";
    md << "| seed | " << cfg.seed << " |\n\n";

    md << "## Scheme comparison\n\n";
    md << "| Scheme | Availability | 95% CI | Mean power (mW) | Mean power (dBm) |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& [name, rows] : by_scheme) {
        std::vector<double> dvps;
        double power_sum = 0.0;
        for (const auto& o : rows) {
            dvps.push_back(o.dvp);
            power_sum += o.avg_power_w;
        }
        AvailabilityEntry a = availability(dvps, cfg.xi);
        double mean_mw = rows.empty() ? 0.0 : power_sum / rows.size() * 1e3;
        std::string dbm = mean_mw > 0.0 ? format_fixed(10.0 * std::log10(mean_mw), 2) : "n/a";
        md << "| " << name << " | " << format_fixed(a.p_hat * 100.0, 2) << "% | ["
           << format_fixed(a.ci_lo * 100.0, 2) << "%, " << format_fixed(a.ci_hi * 100.0, 2)
           << "%] | " << format_fixed(mean_mw, 4) << " | " << dbm << " |\n";
    }
    md << "\nAvailability is the fraction of grid locations whose delay-violation\n";
    md << "probability over the evaluation horizon stays at or below xi.\n\n";

    md << "## Maps\n\n";
    for (const auto& [name, rows] : by_scheme) {
        std::vector<double> power_mw, dvp;
        for (const auto& o : rows) {
            power_mw.push_back(o.avg_power_w * 1e3);
            dvp.push_back(o.dvp);
        }
        std::string power_file = "power_" + name + ".svg";
        std::string dvp_file = "dvp_" + name + ".svg";
        write_heatmap_svg(dir / power_file, grid, power_mw, "avg power (mW), " + name);
        write_heatmap_svg(dir / dvp_file, grid, dvp, "DVP, " + name);
        md << "- " << name << ": [power](" << power_file << "), [dvp](" << dvp_file << ")\n";
    }
    md << "\n";
    md.close();
    if (!md) throw FileFormatError("failed writing report.md");
}

}  // namespace txadapt
