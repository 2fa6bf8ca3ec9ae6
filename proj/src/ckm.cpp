#include "txadapt/ckm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"
#include "txadapt/parallel.hpp"

namespace txadapt {

CkmGrid build_ckm(const QuantileTable& known, const std::vector<Point>& grid, int threads) {
    if (known.location_count() < 2) throw ConfigError("map needs at least two known locations");
    if (grid.empty()) throw ConfigError("empty prediction grid");
    CkmGrid ckm;
    ckm.grid = grid;
    ckm.levels = known.levels;
    const std::size_t g = known.level_count();
    const std::size_t l = grid.size();
    ckm.q_mean.assign(l, std::vector<double>(g, 0.0));
    ckm.q_var.assign(l, std::vector<double>(g, 0.0));
    ckm.fitted.assign(g, KernelParams{});

    parallel_for(g, threads, [&](std::size_t level) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(known.location_count()));
        for (std::size_t d = 0; d < known.location_count(); ++d)
            y(static_cast<Eigen::Index>(d)) = known.standardized[d][level];
        KernelParams params = fit_kernel_params(known.locations, y);
        GpPrediction pred = gp_predict(known.locations, y, grid, params);
        const double mean = known.level_mean[level];
        const double sdev = known.level_sdev[level];
        for (std::size_t i = 0; i < l; ++i) {
            double q = pred.mean(static_cast<Eigen::Index>(i)) * sdev + mean;
            ckm.q_mean[i][level] = std::max(q, 1e-12);
            ckm.q_var[i][level] = pred.variance(static_cast<Eigen::Index>(i)) * sdev * sdev;
        }
        ckm.fitted[level] = params;
    });
    return ckm;
}

void write_ckm(const std::filesystem::path& path, const CkmGrid& ckm) {
    CsvWriter out(path);
    out.raw_line("x_m,y_m,epsilon,q_mean,q_var");
    for (std::size_t i = 0; i < ckm.location_count(); ++i)
        for (std::size_t level = 0; level < ckm.level_count(); ++level)
            out.row(ckm.grid[i].x, ckm.grid[i].y, ckm.levels[level], ckm.q_mean[i][level],
                    ckm.q_var[i][level]);
    out.close();
}

CkmGrid read_ckm(const std::filesystem::path& path) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"x_m", "y_m", "epsilon", "q_mean", "q_var"}, path);
    CkmGrid ckm;
    const std::string ctx = path.string();
    std::map<std::pair<double, double>, std::size_t> loc_index;
    std::map<double, std::size_t> level_index;
    for (const auto& row : csv.rows) {
        Point p{parse_double(row[0], ctx), parse_double(row[1], ctx)};
        double level = parse_double(row[2], ctx);
        auto key = std::make_pair(p.x, p.y);
        if (!loc_index.count(key)) {
            loc_index[key] = ckm.grid.size();
            ckm.grid.push_back(p);
        }
        if (!level_index.count(level)) {
            level_index[level] = ckm.levels.size();
            ckm.levels.push_back(level);
        }
    }
    const std::size_t l = ckm.grid.size();
    const std::size_t g = ckm.levels.size();
    if (csv.rows.size() != l * g) throw FileFormatError("incomplete map grid in " + ctx);
    ckm.q_mean.assign(l, std::vector<double>(g, 0.0));
    ckm.q_var.assign(l, std::vector<double>(g, 0.0));
    for (const auto& row : csv.rows) {
        auto i = loc_index[{parse_double(row[0], ctx), parse_double(row[1], ctx)}];
        auto level = level_index[parse_double(row[2], ctx)];
        ckm.q_mean[i][level] = parse_double(row[3], ctx);
        ckm.q_var[i][level] = parse_double(row[4], ctx);
    }
    return ckm;
}

std::size_t grid_index_of(const std::vector<Point>& grid, const Point& p) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d = distance(grid[i], p);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    if (best > 1e-6) throw ConfigError("point does not lie on the grid");
    return best_i;
}

}  // namespace txadapt
