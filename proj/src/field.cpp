#include "txadapt/field.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"

namespace txadapt {

void FieldConfig::validate() const {
    if (!(x_max_m > x_min_m) || !(y_max_m > y_min_m)) throw ConfigError("empty target area");
    if (!(grid_spacing_m > 0.0)) throw ConfigError("grid spacing must be positive");
    if (!(path_loss_exponent > 0.0)) throw ConfigError("path loss exponent must be positive");
    if (shadow_sigma_db < 0.0) throw ConfigError("shadowing deviation must be non-negative");
    if (!(shadow_corr_dist_m > 0.0)) throw ConfigError("shadowing correlation distance must be positive");
    if (!(noise_power_w > 0.0)) throw ConfigError("noise power must be positive");
    if (fading == FadingKind::rician && rician_k < 0.0) throw ConfigError("LOS factor must be non-negative");
    if (bs_height_m < 0.0 || device_height_m < 0.0) throw ConfigError("heights must be non-negative");
}

std::vector<Point> make_grid(const FieldConfig& config) {
    config.validate();
    std::vector<Point> grid;
    const double tol = 1e-9 * config.grid_spacing_m;
    for (double y = config.y_min_m; y <= config.y_max_m + tol; y += config.grid_spacing_m)
        for (double x = config.x_min_m; x <= config.x_max_m + tol; x += config.grid_spacing_m)
            grid.push_back({x, y});
    return grid;
}

double path_loss_db(const FieldConfig& config, const Point& p) {
    double dxy = std::hypot(p.x - config.bs_x_m, p.y - config.bs_y_m);
    double dz = config.bs_height_m - config.device_height_m;
    double d = std::max(std::hypot(dxy, dz), 1.0);
    return config.ref_gain_db - 10.0 * config.path_loss_exponent * std::log10(d);
}

namespace {

// Dense joint draw of the correlated shadowing field (dB domain).
std::vector<double> shadow_cholesky(const std::vector<Point>& grid, const FieldConfig& cfg,
                                    Rng& rng) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double s2 = cfg.shadow_sigma_db * cfg.shadow_sigma_db;
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double c = s2 * std::exp(-distance(grid[static_cast<std::size_t>(i)],
                                               grid[static_cast<std::size_t>(j)]) /
                                     cfg.shadow_corr_dist_m);
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    cov.diagonal().array() += 1e-10 * s2;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw IllConditionedKernelError("shadowing covariance not positive definite");
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd s = llt.matrixL() * z;
    return {s.data(), s.data() + n};
}

// Sequential draw, each point conditioned on its nearest already-drawn
// neighbors; keeps memory and time bounded on very large grids.
std::vector<double> shadow_conditional(const std::vector<Point>& grid, const FieldConfig& cfg,
                                       Rng& rng) {
    const std::size_t n = grid.size();
    const std::size_t max_nbrs = 24;
    const double s2 = cfg.shadow_sigma_db * cfg.shadow_sigma_db;
    std::vector<double> s(n, 0.0);
    std::vector<std::pair<double, std::size_t>> dist_buf;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = std::min(i, max_nbrs);
        if (m == 0) {
            s[i] = cfg.shadow_sigma_db * rng.normal();
            continue;
        }
        dist_buf.clear();
        for (std::size_t j = 0; j < i; ++j) dist_buf.emplace_back(distance(grid[i], grid[j]), j);
        std::partial_sort(dist_buf.begin(), dist_buf.begin() + static_cast<std::ptrdiff_t>(m),
                          dist_buf.end());
        Eigen::MatrixXd k(m, m);
        Eigen::VectorXd kstar(m), y(m);
        for (std::size_t a = 0; a < m; ++a) {
            std::size_t ja = dist_buf[a].second;
            kstar(static_cast<Eigen::Index>(a)) = s2 * std::exp(-dist_buf[a].first / cfg.shadow_corr_dist_m);
            y(static_cast<Eigen::Index>(a)) = s[ja];
            for (std::size_t b = 0; b <= a; ++b) {
                std::size_t jb = dist_buf[b].second;
                double c = s2 * std::exp(-distance(grid[ja], grid[jb]) / cfg.shadow_corr_dist_m);
                k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
                k(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
            }
        }
        k.diagonal().array() += 1e-8 * s2;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        Eigen::VectorXd alpha = llt.solve(kstar);
        double mean = alpha.dot(y);
        double var = std::max(s2 - alpha.dot(kstar), 0.0);
        s[i] = mean + std::sqrt(var) * rng.normal();
    }
    return s;
}

double small_scale_draw(const FieldConfig& cfg, Rng& rng) {
    if (cfg.fading == FadingKind::rayleigh) return rng.exponential(1.0);
    if (std::isinf(cfg.rician_k)) return 1.0;
    double k = cfg.rician_k;
    double mu = std::sqrt(k / (k + 1.0));
    double a = std::sqrt(1.0 / (2.0 * (k + 1.0)));
    double re = mu + a * rng.normal();
    double im = a * rng.normal();
    return re * re + im * im;
}

}  // namespace

FieldRealization realize_field(const FieldConfig& config, std::uint64_t seed) {
    config.validate();
    FieldRealization field;
    field.config = config;
    field.seed = seed;
    field.grid = make_grid(config);
    const std::size_t n = field.grid.size();
    Rng rng(derive_seed(seed, "shadow-field"));
    if (config.shadow_sigma_db == 0.0) {
        field.shadow_db.assign(n, 0.0);
    } else if (n <= 2000) {
        field.shadow_db = shadow_cholesky(field.grid, config, rng);
    } else {
        field.shadow_db = shadow_conditional(field.grid, config, rng);
    }
    field.mean_gain.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gain_db = path_loss_db(config, field.grid[i]) + field.shadow_db[i];
        field.mean_gain[i] = std::pow(10.0, gain_db / 10.0) / config.noise_power_w;
    }
    return field;
}

std::vector<double> sample_location(const FieldRealization& field, std::size_t loc_index,
                                    int count, std::uint64_t seed) {
    if (loc_index >= field.grid.size()) throw ConfigError("location index out of range");
    if (count < 1) throw ConfigError("sample count must be >= 1");
    Rng rng(derive_seed(seed, "small-scale", loc_index));
    std::vector<double> samples(static_cast<std::size_t>(count));
    const double g = field.mean_gain[loc_index];
    for (auto& v : samples) v = g * small_scale_draw(field.config, rng);
    return samples;
}

LocationDataset sample_dataset(const FieldRealization& field, std::span<const std::size_t> loc_indices,
                               int count, std::uint64_t seed) {
    LocationDataset out;
    out.locations.reserve(loc_indices.size());
    out.samples.reserve(loc_indices.size());
    out.mean_gain.reserve(loc_indices.size());
    for (std::size_t li : loc_indices) {
        out.locations.push_back(field.grid.at(li));
        out.samples.push_back(sample_location(field, li, count, seed));
        out.mean_gain.push_back(field.mean_gain[li]);
    }
    return out;
}

void write_field(const std::filesystem::path& path, const FieldRealization& field) {
    CsvWriter out(path);
    out.raw_line("x_m,y_m,mean_gain,shadow_db");
    for (std::size_t i = 0; i < field.grid.size(); ++i)
        out.row(field.grid[i].x, field.grid[i].y, field.mean_gain[i], field.shadow_db[i]);
    out.close();
}

FieldRealization read_field(const std::filesystem::path& path, const FieldConfig& config,
                            std::uint64_t seed) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"x_m", "y_m", "mean_gain", "shadow_db"}, path);
    FieldRealization field;
    field.config = config;
    field.seed = seed;
    const std::string ctx = path.string();
    for (const auto& row : csv.rows) {
        field.grid.push_back({parse_double(row[0], ctx), parse_double(row[1], ctx)});
        field.mean_gain.push_back(parse_double(row[2], ctx));
        field.shadow_db.push_back(parse_double(row[3], ctx));
    }
    return field;
}

void write_dataset(const std::filesystem::path& path, const LocationDataset& dataset) {
    CsvWriter out(path);
    out.raw_line("x_m,y_m,sample_idx,gain_linear");
    for (std::size_t d = 0; d < dataset.locations.size(); ++d) {
        const auto& p = dataset.locations[d];
        for (std::size_t s = 0; s < dataset.samples[d].size(); ++s) {
            out.raw_line(format_sig9(p.x) + "," + format_sig9(p.y) + "," + std::to_string(s) +
                         "," + format_sig9(dataset.samples[d][s]));
        }
    }
    out.close();
}

LocationDataset read_dataset(const std::filesystem::path& path) {
    CsvTable csv = read_csv(path);
    require_header(csv, {"x_m", "y_m", "sample_idx", "gain_linear"}, path);
    LocationDataset out;
    const std::string ctx = path.string();
    double last_x = std::numeric_limits<double>::quiet_NaN();
    double last_y = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : csv.rows) {
        double x = parse_double(row[0], ctx);
        double y = parse_double(row[1], ctx);
        if (x != last_x || y != last_y) {
            out.locations.push_back({x, y});
            out.samples.emplace_back();
            last_x = x;
            last_y = y;
        }
        out.samples.back().push_back(parse_double(row[3], ctx));
    }
    std::size_t u = out.samples.empty() ? 0 : out.samples[0].size();
    for (const auto& s : out.samples)
        if (s.size() != u) throw FileFormatError("unequal sample counts in " + ctx);
    return out;
}

FadingKind parse_fading(const std::string& name) {
    if (name == "rayleigh") return FadingKind::rayleigh;
    if (name == "rician") return FadingKind::rician;
    throw ConfigError("unknown fading kind: " + name);
}

}  // namespace txadapt
