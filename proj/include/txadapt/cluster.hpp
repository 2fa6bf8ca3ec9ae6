#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "txadapt/geometry.hpp"
#include "txadapt/quantile.hpp"

namespace txadapt {

struct ClusterResult {
    std::vector<int> assignment;           // per input vector
    std::vector<Eigen::VectorXd> centers;  // unit norm
    double objective = 0.0;                // sum of member-to-center cosines
    int iterations = 0;
};

// K-means on cosine similarity: assignment by maximum cosine (ties to the
// lowest cluster index), centers re-normalized member means, empty clusters
// re-seeded from the worst-fitting vector. Terminates when assignments stop
// changing; throws if 500 iterations pass without convergence.
ClusterResult cosine_kmeans(const std::vector<Eigen::VectorXd>& vectors, int k,
                            std::uint64_t seed);

// Best objective over `restarts` seeded runs.
ClusterResult cosine_kmeans_best(const std::vector<Eigen::VectorXd>& vectors, int k,
                                 std::uint64_t seed, int restarts = 5);

// For each cluster, the known location whose quantile vector points closest
// to the center. Greedy by similarity; a location serves at most one cluster.
std::vector<int> select_base_locations(const std::vector<Eigen::VectorXd>& centers,
                                       const QuantileTable& known);

struct ClusterArtifacts {
    std::vector<Point> grid;
    std::vector<int> assignment;       // cluster id per grid location
    std::vector<int> base_known_index; // per cluster, index into known table
    std::vector<Point> base_points;    // per cluster
};

void write_clusters(const std::filesystem::path& path, const std::vector<Point>& grid,
                    const std::vector<int>& assignment);
void write_bases(const std::filesystem::path& path, const std::vector<Point>& bases);
std::vector<int> read_clusters(const std::filesystem::path& path, const std::vector<Point>& grid);
std::vector<Point> read_bases(const std::filesystem::path& path);

}  // namespace txadapt
