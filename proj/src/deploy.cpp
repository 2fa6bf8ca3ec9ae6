#include "txadapt/deploy.hpp"

#include <cmath>
#include <limits>

#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"
#include "txadapt/parallel.hpp"

namespace txadapt {

double scale_power(double source_power_w, double source_quantile, double target_quantile) {
    if (!(source_power_w > 0.0)) throw ConfigError("source power must be positive");
    if (!(source_quantile > 0.0) || !(target_quantile > 0.0))
        throw ConfigError("gain quantiles must be positive");
    return source_power_w * source_quantile / target_quantile;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::power_scaling: return "power_scaling";
        case Scheme::benchmark1: return "benchmark1";
        case Scheme::benchmark2: return "benchmark2";
        case Scheme::meta_adapt: return "meta_adapt";
    }
    throw ConfigError("unknown scheme");
}

namespace {

std::size_t nearest_base(const Point& p, const std::vector<Point>& bases) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < bases.size(); ++c) {
        double d = distance(p, bases[c]);
        if (d < best) {
            best = d;
            best_c = c;
        }
    }
    return best_c;
}

}  // namespace

DeploymentPlan make_plan(Scheme scheme, const CkmGrid& ckm, const std::vector<int>& assignment,
                         const std::vector<int>& base_known_index, const QuantileTable& known,
                         const std::vector<Point>& base_points) {
    if (scheme == Scheme::meta_adapt)
        throw ConfigError("meta adaptation does not use a deployment plan");
    if (assignment.size() != ckm.location_count())
        throw ConfigError("assignment does not cover the map grid");
    DeploymentPlan plan;
    plan.scheme = scheme;
    const std::size_t l = ckm.location_count();
    const std::size_t g = ckm.level_count();
    plan.source_cluster.resize(l);
    plan.level_scale.assign(l, std::vector<double>(g, 1.0));

    for (std::size_t i = 0; i < l; ++i) {
        std::size_t cluster;
        if (scheme == Scheme::power_scaling) {
            cluster = static_cast<std::size_t>(assignment[i]);
        } else {
            cluster = nearest_base(ckm.grid[i], base_points);
        }
        plan.source_cluster[i] = static_cast<int>(cluster);
        if (scheme == Scheme::power_scaling || scheme == Scheme::benchmark1) {
            auto src = static_cast<std::size_t>(base_known_index.at(cluster));
            for (std::size_t level = 0; level < g; ++level) {
                plan.level_scale[i][level] =
                    known.raw[src][level] / ckm.q_mean[i][level];
            }
        }
    }
    return plan;
}

std::vector<LocationOutcome> evaluate_plan(const DeploymentPlan& plan,
                                           const std::vector<SourcePolicy>& bank,
                                           const FieldRealization& field,
                                           const SchemeEvalConfig& config, std::uint64_t seed) {
    const std::size_t l = field.grid.size();
    if (plan.source_cluster.size() != l) throw ConfigError("plan does not cover the field grid");
    std::vector<LocationOutcome> outcomes(l);
    parallel_for(l, config.threads, [&](std::size_t i) {
        const auto& source = bank.at(static_cast<std::size_t>(plan.source_cluster[i]));
        EnvConfig env_cfg = config.env;
        env_cfg.p_max_w = source.actions.powers_w.back();
        ChannelSource channel;
        channel.pool = sample_location(field, i, config.pool_size, derive_seed(seed, "eval-pool", i));
        Env env(env_cfg, std::move(channel), derive_seed(seed, "eval-env", i));
        ActionSpec spec;
        spec.discrete = source.actions;
        EvalResult r = evaluate_policy(source.net, env, spec, config.horizon,
                                       derive_seed(seed, "eval-run", i), &plan.level_scale[i]);
        outcomes[i] = {field.grid[i], r.avg_power_w, r.dvp};
    });
    return outcomes;
}

void write_results(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::vector<LocationOutcome>>>& by_scheme) {
    CsvWriter out(path);
    out.raw_line("scheme,x_m,y_m,avg_power_mw,dvp");
    for (const auto& [name, rows] : by_scheme)
        for (const auto& r : rows)
            out.row(name, r.where.x, r.where.y, r.avg_power_w * 1e3, r.dvp);
    out.close();
}

}  // namespace txadapt
