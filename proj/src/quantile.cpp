#include "txadapt/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"

namespace txadapt {

double estimate_quantile(std::span<const double> samples, double epsilon) {
    if (samples.empty()) throw UndefinedStatisticError("quantile of an empty sample set");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ConfigError("outage level must lie in (0, 1)");
    const auto u = static_cast<double>(samples.size());
    const auto rank = static_cast<std::size_t>(std::floor(u * epsilon));
    if (rank < 1)
        throw UndefinedStatisticError("sample set too small for outage level " +
                                      std::to_string(epsilon));
    std::vector<double> work(samples.begin(), samples.end());
    auto nth = work.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(work.begin(), nth, work.end());
    return *nth;
}

std::vector<double> epsilon_levels(int count, double step) {
    if (count < 1 || !(step > 0.0)) throw ConfigError("invalid outage level grid");
    std::vector<double> levels(static_cast<std::size_t>(count));
    for (int g = 0; g < count; ++g) levels[static_cast<std::size_t>(g)] = step * (g + 1);
    if (levels.back() >= 1.0) throw ConfigError("outage level grid reaches 1");
    return levels;
}

QuantileTable build_quantile_table(const std::vector<Point>& locations,
                                   const std::vector<std::vector<double>>& samples,
                                   const std::vector<double>& levels) {
    if (locations.size() != samples.size())
        throw ConfigError("locations and sample sets differ in count");
    if (locations.empty()) throw ConfigError("empty location set");
    QuantileTable table;
    table.locations = locations;
    table.levels = levels;
    const std::size_t m = locations.size();
    const std::size_t g = levels.size();
    table.raw.assign(m, std::vector<double>(g, 0.0));
    for (std::size_t d = 0; d < m; ++d)
        for (std::size_t i = 0; i < g; ++i)
            table.raw[d][i] = estimate_quantile(samples[d], levels[i]);

    table.standardized.assign(m, std::vector<double>(g, 0.0));
    table.level_mean.assign(g, 0.0);
    table.level_sdev.assign(g, 1.0);
    for (std::size_t i = 0; i < g; ++i) {
        double mean = 0.0;
        for (std::size_t d = 0; d < m; ++d) mean += table.raw[d][i];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
            double diff = table.raw[d][i] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(m);
        double sdev = std::sqrt(var);
        table.level_mean[i] = mean;
        if (sdev < 1e-12) {
            table.level_sdev[i] = 1.0;  // degenerate level: all values identical
            for (std::size_t d = 0; d < m; ++d) table.standardized[d][i] = 0.0;
        } else {
            table.level_sdev[i] = sdev;
            for (std::size_t d = 0; d < m; ++d)
                table.standardized[d][i] = (table.raw[d][i] - mean) / sdev;
        }
    }
    return table;
}

void write_quantile_table(const std::filesystem::path& path, const QuantileTable& table) {
    CsvWriter out(path);
    out.raw_line("x_m,y_m,epsilon,quantile_raw,quantile_std");
    for (std::size_t d = 0; d < table.location_count(); ++d)
        for (std::size_t i = 0; i < table.level_count(); ++i)
            out.row(table.locations[d].x, table.locations[d].y, table.levels[i],
                    table.raw[d][i], table.standardized[d][i]);
    out.close();
}

QuantileTable read_quantile_table(const std::filesystem::path& path) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"x_m", "y_m", "epsilon", "quantile_raw", "quantile_std"}, path);
    QuantileTable table;
    std::map<std::pair<double, double>, std::size_t> index;
    std::map<double, std::size_t> level_index;
    const std::string ctx = path.string();
    for (const auto& row : csv.rows) {
        Point p{parse_double(row[0], ctx), parse_double(row[1], ctx)};
        double level = parse_double(row[2], ctx);
        auto key = std::make_pair(p.x, p.y);
        if (!index.count(key)) {
            index[key] = table.locations.size();
            table.locations.push_back(p);
        }
        if (!level_index.count(level)) {
            level_index[level] = table.levels.size();
            table.levels.push_back(level);
        }
    }
    const std::size_t m = table.locations.size();
    const std::size_t g = table.levels.size();
    if (csv.rows.size() != m * g)
        throw FileFormatError("incomplete location/level grid in " + ctx);
    table.raw.assign(m, std::vector<double>(g, 0.0));
    table.standardized.assign(m, std::vector<double>(g, 0.0));
    for (const auto& row : csv.rows) {
        auto d = index[{parse_double(row[0], ctx), parse_double(row[1], ctx)}];
        auto i = level_index[parse_double(row[2], ctx)];
        table.raw[d][i] = parse_double(row[3], ctx);
        table.standardized[d][i] = parse_double(row[4], ctx);
    }
    // Standard deviation metadata is not persisted; recompute from raw values.
    table.level_mean.assign(g, 0.0);
    table.level_sdev.assign(g, 1.0);
    for (std::size_t i = 0; i < g; ++i) {
        double mean = 0.0;
        for (std::size_t d = 0; d < m; ++d) mean += table.raw[d][i];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
            double diff = table.raw[d][i] - mean;
            var += diff * diff;
        }
        double sdev = std::sqrt(var / static_cast<double>(m));
        table.level_mean[i] = mean;
        table.level_sdev[i] = sdev < 1e-12 ? 1.0 : sdev;
    }
    return table;
}

}  // namespace txadapt
