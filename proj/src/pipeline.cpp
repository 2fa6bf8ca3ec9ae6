#include "txadapt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "txadapt/ckm.hpp"
#include "txadapt/cluster.hpp"
#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"
#include "txadapt/meta.hpp"
#include "txadapt/parallel.hpp"
#include "txadapt/report.hpp"

namespace txadapt {

namespace fs = std::filesystem;

namespace {

struct Paths {
    fs::path dir;

    fs::path field() const { return dir / "field.csv"; }
    fs::path dataset() const { return dir / "dataset.csv"; }
    fs::path quantiles() const { return dir / "quantiles.csv"; }
    fs::path ckm() const { return dir / "ckm.csv"; }
    fs::path clusters() const { return dir / "clusters.csv"; }
    fs::path bases() const { return dir / "bases.csv"; }
    fs::path policy(int k) const { return dir / ("policy_" + std::to_string(k) + ".bin"); }
    fs::path actions(int k) const { return dir / ("actions_" + std::to_string(k) + ".csv"); }
    fs::path curve(int k) const { return dir / ("curve_" + std::to_string(k) + ".csv"); }
    fs::path meta_policy() const { return dir / "meta_policy.bin"; }
    fs::path meta_curve() const { return dir / "meta_curve.csv"; }
    fs::path results() const { return dir / "results.csv"; }
    fs::path report_md() const { return dir / "report.md"; }
};

void require_input(const fs::path& p, Stage producer) {
    if (!fs::exists(p))
        throw StageError("missing input " + p.string() + "; run stage '" + stage_name(producer) +
                         "' first");
}

bool wants_meta(const ExperimentConfig& cfg) {
    return std::find(cfg.schemes.begin(), cfg.schemes.end(), Scheme::meta_adapt) !=
           cfg.schemes.end();
}

std::size_t known_index_of(const std::vector<Point>& locations, const Point& p) {
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (std::abs(locations[i].x - p.x) < 1e-6 && std::abs(locations[i].y - p.y) < 1e-6)
            return i;
    throw ConfigError("base location not found among known locations");
}

// Dataset files carry coordinates and samples only; the large-scale means
// come from the field realization.
void attach_mean_gains(LocationDataset& ds, const FieldRealization& field) {
    ds.mean_gain.resize(ds.locations.size());
    for (std::size_t i = 0; i < ds.locations.size(); ++i)
        ds.mean_gain[i] = field.mean_gain[grid_index_of(field.grid, ds.locations[i])];
}

void log_line(const std::string& msg) { std::cout << msg << "\n" << std::flush; }

bool stage_field(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && fs::exists(paths.field()) && fs::exists(paths.dataset())) return false;
    FieldRealization field = realize_field(cfg.field, cfg.seed);
    const std::size_t l = field.grid.size();
    if (static_cast<std::size_t>(cfg.M) > l)
        throw ConfigError("M exceeds the number of grid locations");
    std::vector<std::size_t> indices(l);
    std::iota(indices.begin(), indices.end(), 0);
    Rng chooser(derive_seed(cfg.seed, "known-locations"));
    chooser.shuffle(indices);
    indices.resize(static_cast<std::size_t>(cfg.M));
    std::sort(indices.begin(), indices.end());
    LocationDataset ds = sample_dataset(field, indices, cfg.U, derive_seed(cfg.seed, "known-samples"));
    write_field(paths.field(), field);
    write_dataset(paths.dataset(), ds);
    log_line("generate-field: " + std::to_string(l) + " locations, " + std::to_string(cfg.M) +
             " known with " + std::to_string(cfg.U) + " samples each");
    return true;
}

bool stage_quantiles(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && fs::exists(paths.quantiles())) return false;
    require_input(paths.dataset(), Stage::field);
    LocationDataset ds = read_dataset(paths.dataset());
    QuantileTable table = build_quantile_table(ds.locations, ds.samples, cfg.level_grid());
    write_quantile_table(paths.quantiles(), table);
    log_line("estimate-quantiles: " + std::to_string(table.location_count()) + " locations x " +
             std::to_string(table.level_count()) + " levels");
    return true;
}

bool stage_ckm(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && fs::exists(paths.ckm())) return false;
    require_input(paths.quantiles(), Stage::quantiles);
    require_input(paths.field(), Stage::field);
    QuantileTable known = read_quantile_table(paths.quantiles());
    FieldRealization field = read_field(paths.field(), cfg.field, cfg.seed);
    CkmGrid map = build_ckm(known, field.grid, cfg.threads);
    write_ckm(paths.ckm(), map);
    log_line("build-ckm: " + std::to_string(map.location_count()) + " locations x " +
             std::to_string(map.level_count()) + " levels");
    return true;
}

bool stage_cluster(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && fs::exists(paths.clusters()) && fs::exists(paths.bases())) return false;
    require_input(paths.ckm(), Stage::ckm);
    require_input(paths.quantiles(), Stage::quantiles);
    CkmGrid map = read_ckm(paths.ckm());
    QuantileTable known = read_quantile_table(paths.quantiles());
    std::vector<Eigen::VectorXd> vectors(map.location_count());
    for (std::size_t i = 0; i < map.location_count(); ++i)
        vectors[i] = Eigen::Map<const Eigen::VectorXd>(map.q_mean[i].data(),
                                                       static_cast<Eigen::Index>(map.level_count()));
    ClusterResult res = cosine_kmeans_best(vectors, cfg.K, cfg.seed, cfg.restarts);
    std::vector<int> base_known = select_base_locations(res.centers, known);
    std::vector<Point> base_points;
    for (int b : base_known) base_points.push_back(known.locations.at(static_cast<std::size_t>(b)));
    write_clusters(paths.clusters(), map.grid, res.assignment);
    write_bases(paths.bases(), base_points);
    log_line("cluster: K=" + std::to_string(cfg.K) + ", objective " + format_sig9(res.objective) +
             " after " + std::to_string(res.iterations) + " iterations");
    return true;
}

bool base_outputs_exist(const ExperimentConfig& cfg, const Paths& paths) {
    for (int k = 0; k < cfg.K; ++k)
        if (!fs::exists(paths.policy(k)) || !fs::exists(paths.actions(k)) ||
            !fs::exists(paths.curve(k)))
            return false;
    return true;
}

bool stage_train_base(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && base_outputs_exist(cfg, paths)) return false;
    require_input(paths.quantiles(), Stage::quantiles);
    require_input(paths.bases(), Stage::cluster);
    require_input(paths.dataset(), Stage::field);
    require_input(paths.field(), Stage::field);
    QuantileTable known = read_quantile_table(paths.quantiles());
    LocationDataset ds = read_dataset(paths.dataset());
    FieldRealization field = read_field(paths.field(), cfg.field, cfg.seed);
    std::vector<Point> base_points = read_bases(paths.bases());
    if (base_points.size() != static_cast<std::size_t>(cfg.K))
        throw StageError("base file does not match K");

    parallel_for(base_points.size(), cfg.threads, [&](std::size_t k) {
        std::size_t b = known_index_of(known.locations, base_points[k]);
        double mean_gain = field.mean_gain[grid_index_of(field.grid, known.locations[b])];
        double p_max = peak_power(cfg.lambda, cfg.n, cfg.xi, cfg.D_max, mean_gain);
        DiscreteActionSpace space;
        space.levels = known.levels;
        space.quantiles = known.raw[b];
        space.powers_w = power_grid(p_max, cfg.power_levels);
        EnvConfig ec = cfg.env_template();
        ec.p_max_w = p_max;
        ChannelSource channel;
        channel.pool = ds.samples[b];
        Env env(ec, std::move(channel), derive_seed(cfg.seed, "base-env", k));
        Rng init(derive_seed(cfg.seed, "base-init", k));
        PolicyNet net = PolicyNet::make_categorical(2, space.count(), init);
        ActionSpec spec;
        spec.discrete = space;
        TrainResult tr = train_policy(net, env, spec, cfg.train, cfg.Z,
                                      derive_seed(cfg.seed, "base-train", k));
        int ki = static_cast<int>(k);
        save_checkpoint(paths.policy(ki), net);
        write_action_space(paths.actions(ki), space);
        CsvWriter curve(paths.curve(ki));
        curve.raw_line("episode,total_reward,avg_power_w,dvp,violations");
        for (std::size_t e = 0; e < tr.curve.size(); ++e)
            curve.row(static_cast<long long>(e), tr.curve[e].total_reward, tr.curve[e].avg_power_w,
                      tr.curve[e].dvp, static_cast<long long>(tr.curve[e].violations));
        curve.close();
    });
    log_line("train-base: " + std::to_string(cfg.K) + " policies, " + std::to_string(cfg.Z) +
             " episodes each");
    return true;
}

bool stage_train_meta(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!wants_meta(cfg)) {
        log_line("train-meta: meta_adapt not in scheme list, nothing to do");
        return false;
    }
    if (!force && fs::exists(paths.meta_policy()) && fs::exists(paths.meta_curve())) return false;
    require_input(paths.dataset(), Stage::field);
    require_input(paths.field(), Stage::field);
    LocationDataset ds = read_dataset(paths.dataset());
    FieldRealization field = read_field(paths.field(), cfg.field, cfg.seed);
    attach_mean_gains(ds, field);
    std::vector<MetaTask> tasks =
        build_task_set(ds, cfg.env_template(), cfg.level_grid(), cfg.N, cfg.seed);
    MetaConfig mc;
    mc.inner = cfg.inner_train();
    mc.outer_lr = cfg.beta;
    mc.episodes = cfg.Z_meta;
    mc.threads = cfg.threads;
    MetaResult mr = meta_train(tasks, mc, cfg.seed);
    save_checkpoint(paths.meta_policy(), mr.net);
    CsvWriter curve(paths.meta_curve());
    curve.raw_line("episode,mean_reward");
    for (std::size_t e = 0; e < mr.outer_reward_curve.size(); ++e)
        curve.row(static_cast<long long>(e), mr.outer_reward_curve[e]);
    curve.close();
    log_line("train-meta: " + std::to_string(cfg.N) + " tasks, " + std::to_string(cfg.Z_meta) +
             " episodes, " + std::to_string(mr.skipped_outer) + " skipped outer updates");
    return true;
}

// The meta scheme mirrors evaluate_plan's per-location seeding so every scheme
// faces the same held-out pools and draw sequences.
std::vector<LocationOutcome> evaluate_meta(const ExperimentConfig& cfg, const Paths& paths,
                                           const FieldRealization& field, const CkmGrid& map) {
    require_input(paths.meta_policy(), Stage::train_meta);
    PolicyNet meta = load_checkpoint(paths.meta_policy());
    const std::size_t l = field.grid.size();
    std::vector<LocationOutcome> outcomes(l);
    parallel_for(l, cfg.threads, [&](std::size_t i) {
        double p_max = peak_power(cfg.lambda, cfg.n, cfg.xi, cfg.D_max, field.mean_gain[i]);
        ContinuousActionSpace space;
        space.p_max_w = p_max;
        space.rate_cap = epsilon_outage_rate(p_max, map.q_mean[i].back());
        std::vector<double> pool =
            sample_location(field, i, cfg.eval_pool, derive_seed(cfg.seed, "eval-pool", i));

        EnvConfig adapt_cfg = cfg.env_template();
        adapt_cfg.p_max_w = p_max;
        adapt_cfg.episode_slots = cfg.T_ap;
        ChannelSource adapt_channel;
        adapt_channel.pool = pool;
        Env adapt_env(adapt_cfg, std::move(adapt_channel), derive_seed(cfg.seed, "adapt-env", i));
        AdaptConfig ac;
        ac.inner = cfg.inner_train();
        ac.steps = cfg.adapt_steps;
        AdaptResult ar = adapt(meta, adapt_env, space, ac, derive_seed(cfg.seed, "adapt-run", i));

        EnvConfig eval_cfg = cfg.env_template();
        eval_cfg.p_max_w = p_max;
        ChannelSource eval_channel;
        eval_channel.pool = std::move(pool);
        Env eval_env(eval_cfg, std::move(eval_channel), derive_seed(cfg.seed, "eval-env", i));
        ActionSpec spec;
        spec.continuous = space;
        EvalResult r = evaluate_policy(ar.net, eval_env, spec, cfg.eval_slots,
                                       derive_seed(cfg.seed, "eval-run", i));
        outcomes[i] = {field.grid[i], r.avg_power_w, r.dvp};
    });
    return outcomes;
}

bool stage_evaluate(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    if (!force && fs::exists(paths.results())) return false;
    require_input(paths.field(), Stage::field);
    require_input(paths.quantiles(), Stage::quantiles);
    require_input(paths.ckm(), Stage::ckm);
    require_input(paths.clusters(), Stage::cluster);
    require_input(paths.bases(), Stage::cluster);
    FieldRealization field = read_field(paths.field(), cfg.field, cfg.seed);
    QuantileTable known = read_quantile_table(paths.quantiles());
    CkmGrid map = read_ckm(paths.ckm());
    std::vector<int> assignment = read_clusters(paths.clusters(), field.grid);
    std::vector<Point> base_points = read_bases(paths.bases());
    std::vector<int> base_known;
    for (const auto& p : base_points)
        base_known.push_back(static_cast<int>(known_index_of(known.locations, p)));

    bool needs_bank = false;
    for (Scheme s : cfg.schemes)
        if (s != Scheme::meta_adapt) needs_bank = true;
    std::vector<SourcePolicy> bank;
    if (needs_bank) {
        for (int k = 0; k < cfg.K; ++k) {
            require_input(paths.policy(k), Stage::train_base);
            require_input(paths.actions(k), Stage::train_base);
            SourcePolicy sp;
            sp.net = load_checkpoint(paths.policy(k));
            sp.actions = read_action_space(paths.actions(k));
            bank.push_back(std::move(sp));
        }
    }

    SchemeEvalConfig sec;
    sec.env = cfg.env_template();
    sec.horizon = cfg.eval_slots;
    sec.pool_size = cfg.eval_pool;
    sec.threads = cfg.threads;

    std::vector<std::pair<std::string, std::vector<LocationOutcome>>> by_scheme;
    for (Scheme s : cfg.schemes) {
        std::vector<LocationOutcome> rows;
        if (s == Scheme::meta_adapt) {
            rows = evaluate_meta(cfg, paths, field, map);
        } else {
            DeploymentPlan plan = make_plan(s, map, assignment, base_known, known, base_points);
            rows = evaluate_plan(plan, bank, field, sec, cfg.seed);
        }
        by_scheme.push_back({scheme_name(s), std::move(rows)});
        log_line("evaluate: " + scheme_name(s) + " done");
    }
    write_results(paths.results(), by_scheme);
    return true;
}

bool stage_report(const ExperimentConfig& cfg, const Paths& paths, bool force) {
    bool have_all = fs::exists(paths.report_md());
    if (have_all) {
        for (Scheme s : cfg.schemes) {
            if (!fs::exists(paths.dir / ("power_" + scheme_name(s) + ".svg")) ||
                !fs::exists(paths.dir / ("dvp_" + scheme_name(s) + ".svg")))
                have_all = false;
        }
    }
    if (!force && have_all) return false;
    require_input(paths.results(), Stage::evaluate);
    auto by_scheme = read_results(paths.results());
    write_report(paths.dir, cfg, by_scheme);
    log_line("report: wrote report.md and " + std::to_string(2 * by_scheme.size()) + " maps");
    return true;
}

}  // namespace

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::field: return "generate-field";
        case Stage::quantiles: return "estimate-quantiles";
        case Stage::ckm: return "build-ckm";
        case Stage::cluster: return "cluster";
        case Stage::train_base: return "train-base";
        case Stage::train_meta: return "train-meta";
        case Stage::evaluate: return "evaluate";
        case Stage::report: return "report";
    }
    throw ConfigError("unknown stage");
}

Stage parse_stage(const std::string& name) {
    for (Stage s : all_stages())
        if (stage_name(s) == name) return s;
    throw ConfigError("unknown stage '" + name + "'");
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = {Stage::field,      Stage::quantiles,
                                              Stage::ckm,        Stage::cluster,
                                              Stage::train_base, Stage::train_meta,
                                              Stage::evaluate,   Stage::report};
    return stages;
}

bool run_stage(const ExperimentConfig& cfg, Stage stage, bool force) {
    Paths paths{cfg.out};
    fs::create_directories(paths.dir);
    bool ran = false;
    switch (stage) {
        case Stage::field: ran = stage_field(cfg, paths, force); break;
        case Stage::quantiles: ran = stage_quantiles(cfg, paths, force); break;
        case Stage::ckm: ran = stage_ckm(cfg, paths, force); break;
        case Stage::cluster: ran = stage_cluster(cfg, paths, force); break;
        case Stage::train_base: ran = stage_train_base(cfg, paths, force); break;
        case Stage::train_meta: ran = stage_train_meta(cfg, paths, force); break;
        case Stage::evaluate: ran = stage_evaluate(cfg, paths, force); break;
        case Stage::report: ran = stage_report(cfg, paths, force); break;
    }
    if (!ran) log_line(stage_name(stage) + ": outputs present, skipping");
    return ran;
}

void run_pipeline(const ExperimentConfig& cfg, bool force) {
    for (Stage s : all_stages()) run_stage(cfg, s, force);
}

void write_action_space(const std::filesystem::path& path, const DiscreteActionSpace& space) {
    CsvWriter out(path);
    out.raw_line("component,index,value");
    for (std::size_t i = 0; i < space.levels.size(); ++i)
        out.row("level", static_cast<long long>(i), space.levels[i]);
    for (std::size_t i = 0; i < space.quantiles.size(); ++i)
        out.row("quantile", static_cast<long long>(i), space.quantiles[i]);
    for (std::size_t i = 0; i < space.powers_w.size(); ++i)
        out.row("power_w", static_cast<long long>(i), space.powers_w[i]);
    out.close();
}

DiscreteActionSpace read_action_space(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    require_header(table, {"component", "index", "value"}, path);
    DiscreteActionSpace space;
    for (const auto& row : table.rows) {
        double v = parse_double(row[2], "value");
        if (row[0] == "level") space.levels.push_back(v);
        else if (row[0] == "quantile") space.quantiles.push_back(v);
        else if (row[0] == "power_w") space.powers_w.push_back(v);
        else throw FileFormatError("unknown action component '" + row[0] + "' in " + path.string());
    }
    if (space.levels.size() != space.quantiles.size() || space.levels.empty() ||
        space.powers_w.empty())
        throw FileFormatError("incomplete action space in " + path.string());
    return space;
}

std::vector<SweepCell> sweep_qos(const ExperimentConfig& cfg, const std::vector<double>& xis,
                                 const std::vector<int>& dmaxs, std::uint64_t seed) {
    if (xis.empty() || dmaxs.empty()) throw ConfigError("sweep needs at least one xi and one D_max");
    std::vector<SweepCell> cells;
    for (double xi : xis)
        for (int d : dmaxs) cells.push_back({xi, d, 0.0, 0.0});

    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        SweepCell& cell = cells[idx];
        ExperimentConfig c = cfg;
        c.xi = cell.xi;
        c.D_max = cell.d_max;
        std::vector<double> levels = c.level_grid();

        // Unit-mean fading channel; known samples on one side, a fresh pool
        // on the other.
        Rng sampler(derive_seed(seed, "sweep-pool", idx));
        std::vector<double> pool(static_cast<std::size_t>(c.U));
        for (double& g : pool) g = sampler.exponential(1.0);
        std::vector<double> quantiles;
        for (double lvl : levels) quantiles.push_back(estimate_quantile(pool, lvl));

        double p_max = peak_power(c.lambda, c.n, c.xi, c.D_max, 1.0);
        DiscreteActionSpace space;
        space.levels = levels;
        space.quantiles = quantiles;
        space.powers_w = power_grid(p_max, c.power_levels);
        EnvConfig ec = c.env_template();
        ec.p_max_w = p_max;

        ChannelSource train_channel;
        train_channel.pool = pool;
        Env env(ec, std::move(train_channel), derive_seed(seed, "sweep-env", idx));
        Rng init(derive_seed(seed, "sweep-init", idx));
        PolicyNet net = PolicyNet::make_categorical(2, space.count(), init);
        ActionSpec spec;
        spec.discrete = space;
        train_policy(net, env, spec, c.train, c.Z, derive_seed(seed, "sweep-train", idx));

        Rng eval_sampler(derive_seed(seed, "sweep-eval-pool", idx));
        std::vector<double> eval_pool(static_cast<std::size_t>(c.eval_pool));
        for (double& g : eval_pool) g = eval_sampler.exponential(1.0);
        ChannelSource eval_channel;
        eval_channel.pool = std::move(eval_pool);
        Env eval_env(ec, std::move(eval_channel), derive_seed(seed, "sweep-eval-env", idx));
        EvalResult r = evaluate_policy(net, eval_env, spec, cfg.eval_slots,
                                       derive_seed(seed, "sweep-eval-run", idx));
        cell.avg_power_w = r.avg_power_w;
        cell.dvp = r.dvp;
    });
    return cells;
}

void write_sweep(const std::filesystem::path& path, const std::vector<SweepCell>& cells) {
    CsvWriter out(path);
    out.raw_line("xi,D_max,avg_power_mw,dvp");
    for (const auto& c : cells) out.row(c.xi, c.d_max, c.avg_power_w * 1e3, c.dvp);
    out.close();
}

}  // namespace txadapt
