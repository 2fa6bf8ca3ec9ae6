#include "txadapt/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"
#include "txadapt/rng.hpp"

namespace txadapt {

namespace {

Eigen::VectorXd normalized(const Eigen::VectorXd& v) {
    double n = v.norm();
    if (!(n > 0.0)) throw ConfigError("cannot normalize a zero vector");
    return v / n;
}

}  // namespace

ClusterResult cosine_kmeans(const std::vector<Eigen::VectorXd>& vectors, int k,
                            std::uint64_t seed) {
    const std::size_t n = vectors.size();
    if (k < 1) throw ConfigError("cluster count must be >= 1");
    if (n < static_cast<std::size_t>(k)) throw ConfigError("fewer vectors than clusters");

    std::vector<Eigen::VectorXd> unit(n);
    for (std::size_t i = 0; i < n; ++i) unit[i] = normalized(vectors[i]);

    // Seed centers from vectors with pairwise distinct directions.
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<Eigen::VectorXd> centers;
    for (std::size_t i = 0; i < n && centers.size() < static_cast<std::size_t>(k); ++i) {
        const Eigen::VectorXd& cand = unit[order[i]];
        bool dup = false;
        for (const auto& c : centers)
            if (c.dot(cand) > 1.0 - 1e-12) dup = true;
        if (!dup) centers.push_back(cand);
    }
    if (centers.size() < static_cast<std::size_t>(k))
        throw ConfigError("fewer distinct directions than clusters");

    std::vector<int> assignment(n, -1);
    ClusterResult res;
    const int max_iters = 500;
    for (int iter = 1; iter <= max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best_k = 0;
            double best_s = -2.0;
            for (int c = 0; c < k; ++c) {
                double s = unit[i].dot(centers[static_cast<std::size_t>(c)]);
                if (s > best_s) {  // strict: ties keep the lowest cluster index
                    best_s = s;
                    best_k = c;
                }
            }
            if (assignment[i] != best_k) {
                assignment[i] = best_k;
                changed = true;
            }
        }

        // Recompute centers; re-seed any empty cluster from the vector that
        // fits its current cluster worst.
        std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k),
                                          Eigen::VectorXd::Zero(unit[0].size()));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[static_cast<std::size_t>(assignment[i])] += unit[i];
            ++counts[static_cast<std::size_t>(assignment[i])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                std::size_t worst_i = 0;
                double worst_s = 2.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double s = unit[i].dot(centers[static_cast<std::size_t>(assignment[i])]);
                    if (s < worst_s) {
                        worst_s = s;
                        worst_i = i;
                    }
                }
                centers[static_cast<std::size_t>(c)] = unit[worst_i];
                changed = true;
            } else {
                centers[static_cast<std::size_t>(c)] = normalized(
                    sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)]);
            }
        }

        if (!changed) {
            res.iterations = iter;
            break;
        }
        if (iter == max_iters)
            throw StageError("clustering failed to converge within 500 iterations");
    }

    res.assignment = assignment;
    res.centers = centers;
    res.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        res.objective += unit[i].dot(centers[static_cast<std::size_t>(assignment[i])]);
    return res;
}

ClusterResult cosine_kmeans_best(const std::vector<Eigen::VectorXd>& vectors, int k,
                                 std::uint64_t seed, int restarts) {
    ClusterResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        ClusterResult run = cosine_kmeans(vectors, k, derive_seed(seed, "kmeans-restart",
                                                                  static_cast<std::uint64_t>(r)));
        if (!have || run.objective > best.objective) {
            best = std::move(run);
            have = true;
        }
    }
    return best;
}

std::vector<int> select_base_locations(const std::vector<Eigen::VectorXd>& centers,
                                       const QuantileTable& known) {
    const std::size_t k = centers.size();
    const std::size_t m = known.location_count();
    if (m < k) throw ConfigError("fewer known locations than clusters");

    struct Pair {
        double sim;
        std::size_t cluster;
        std::size_t loc;
    };
    std::vector<Pair> pairs;
    pairs.reserve(k * m);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < m; ++d) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(known.level_count()));
            for (std::size_t g = 0; g < known.level_count(); ++g)
                v(static_cast<Eigen::Index>(g)) = known.raw[d][g];
            pairs.push_back({normalized(v).dot(centers[c]), c, d});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        if (a.cluster != b.cluster) return a.cluster < b.cluster;
        return a.loc < b.loc;
    });
    std::vector<int> base(k, -1);
    std::vector<bool> loc_used(m, false);
    std::size_t assigned = 0;
    for (const Pair& p : pairs) {
        if (assigned == k) break;
        if (base[p.cluster] >= 0 || loc_used[p.loc]) continue;
        base[p.cluster] = static_cast<int>(p.loc);
        loc_used[p.loc] = true;
        ++assigned;
    }
    if (assigned != k) throw StageError("could not match every cluster to a base location");
    return base;
}

void write_clusters(const std::filesystem::path& path, const std::vector<Point>& grid,
                    const std::vector<int>& assignment) {
    if (grid.size() != assignment.size()) throw ConfigError("grid/assignment size mismatch");
    CsvWriter out(path);
    out.raw_line("x_m,y_m,cluster_id");
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.row(grid[i].x, grid[i].y, assignment[i]);
    out.close();
}

void write_bases(const std::filesystem::path& path, const std::vector<Point>& bases) {
    CsvWriter out(path);
    out.raw_line("cluster_id,x_m,y_m");
    for (std::size_t c = 0; c < bases.size(); ++c) out.row(static_cast<int>(c), bases[c].x, bases[c].y);
    out.close();
}

std::vector<int> read_clusters(const std::filesystem::path& path, const std::vector<Point>& grid) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"x_m", "y_m", "cluster_id"}, path);
    const std::string ctx = path.string();
    std::map<std::pair<double, double>, int> by_point;
    for (const auto& row : csv.rows)
        by_point[{parse_double(row[0], ctx), parse_double(row[1], ctx)}] =
            static_cast<int>(parse_int(row[2], ctx));
    std::vector<int> assignment(grid.size(), -1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto it = by_point.find({grid[i].x, grid[i].y});
        if (it == by_point.end()) throw FileFormatError("grid point missing from " + ctx);
        assignment[i] = it->second;
    }
    return assignment;
}

std::vector<Point> read_bases(const std::filesystem::path& path) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"cluster_id", "x_m", "y_m"}, path);
    const std::string ctx = path.string();
    std::vector<Point> bases(csv.rows.size());
    for (const auto& row : csv.rows) {
        auto c = static_cast<std::size_t>(parse_int(row[0], ctx));
        if (c >= bases.size()) throw FileFormatError("cluster id out of range in " + ctx);
        bases[c] = {parse_double(row[1], ctx), parse_double(row[2], ctx)};
    }
    return bases;
}

}  // namespace txadapt
