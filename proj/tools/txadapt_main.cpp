#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "txadapt/config.hpp"
#include "txadapt/errors.hpp"
#include "txadapt/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    bool force = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Location-adaptive transmission control under delay-violation constraints"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    common.seed_opt = app.add_option("--seed", common.seed, "override the config's [run] seed");
    common.out_opt = app.add_option("--out", common.out, "override the output directory");
    common.threads_opt =
        app.add_option("--threads", common.threads, "override the worker count (1 = deterministic)");
    app.add_flag("--force", common.force, "redo stages whose outputs already exist");

    std::vector<std::string> stage_cmds;
    for (txadapt::Stage s : txadapt::all_stages()) stage_cmds.push_back(txadapt::stage_name(s));

    app.add_subcommand("pipeline", "run every stage in order")->fallthrough();
    for (const auto& name : stage_cmds)
        app.add_subcommand(name, "run the " + name + " stage")->fallthrough();

    std::vector<double> sweep_xis;
    std::vector<int> sweep_dmaxs;
    auto* sweep = app.add_subcommand(
        "sweep-qos", "train/evaluate one policy per (xi, D_max) pair on a unit-mean channel");
    sweep->fallthrough();
    sweep->add_option("--xi", sweep_xis, "comma-separated DVP targets")->delimiter(',')->required();
    sweep->add_option("--dmax", sweep_dmaxs, "comma-separated delay bounds")
        ->delimiter(',')
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        txadapt::ExperimentConfig cfg = txadapt::load_config(common.config_path);
        if (common.seed_opt->count() > 0) cfg.seed = common.seed;
        if (common.out_opt->count() > 0) cfg.out = common.out;
        if (common.threads_opt->count() > 0) cfg.threads = common.threads;
        cfg.validate();

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "pipeline") {
            txadapt::run_pipeline(cfg, common.force);
        } else if (cmd == "sweep-qos") {
            auto cells = txadapt::sweep_qos(cfg, sweep_xis, sweep_dmaxs, cfg.seed);
            std::filesystem::create_directories(cfg.out);
            txadapt::write_sweep(std::filesystem::path(cfg.out) / "sweep.csv", cells);
            std::cout << "sweep-qos: wrote " << cells.size() << " cells\n";
        } else {
            txadapt::run_stage(cfg, txadapt::parse_stage(cmd), common.force);
        }
        return 0;
    } catch (const txadapt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const txadapt::StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
