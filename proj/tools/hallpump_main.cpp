#include <CLI11.hpp>
#include <iostream>

#include "hallpump/pipeline.hpp"

using hallpump::config::ExperimentConfig;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = -1;
    long long seed = -1;
    std::string stage;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool stage_flag = true) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", args.threads, "worker threads (overrides config)");
    cmd->add_option("--seed", args.seed, "deterministic seed (overrides config)");
    if (stage_flag) cmd->add_option("--stage", args.stage, "run a single pipeline stage");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = hallpump::config::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.threads >= 0) cfg.threads = args.threads;
    if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
    if (!args.stage.empty()) cfg.stages = {"validate", args.stage};
    hallpump::config::validate_config(cfg);
    return cfg;
}

int report(const hallpump::pipeline::PipelineResult& res) {
    for (const auto& s : res.stages)
        std::cout << "stage " << s.stage << ": " << (s.ok ? "ok" : "FAILED " + s.diagnostic)
                  << "\n";
    for (const auto& c : res.checks)
        std::cout << "check " << c.name << ": value=" << hallpump::io::format_g17(c.value)
                  << " threshold=" << hallpump::io::format_g17(c.threshold) << " "
                  << (c.pass ? "pass" : "FAIL") << "\n";
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hallpump: quantum Hall charge-pump experiments on finite torus lattices"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, index_args, lr_args, oracle_args, val_args;

    auto* run = app.add_subcommand("run", "full experiment pipeline");
    add_common(run, run_args);
    auto* sweep = app.add_subcommand("sweep-eps", "driving-rate sweep and exactness fit");
    add_common(sweep, sweep_args, false);
    auto* index = app.add_subcommand("index", "many-body index suite");
    add_common(index, index_args, false);
    auto* lr = app.add_subcommand("lr-cone", "Lieb-Robinson cone scan");
    add_common(lr, lr_args, false);
    auto* oracle = app.add_subcommand("oracle", "print the Chern oracle integer");
    add_common(oracle, oracle_args, false);
    auto* validate = app.add_subcommand("validate-config", "check a config file");
    add_common(validate, val_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return report(hallpump::pipeline::run_experiment(load(run_args)));
        if (sweep->parsed()) {
            auto cfg = load(sweep_args);
            cfg.stages = {"validate", "gapscan", "parallel", "sweep"};
            return report(hallpump::pipeline::run_experiment(cfg));
        }
        if (index->parsed()) {
            auto cfg = load(index_args);
            cfg.stages = {"validate", "gapscan", "index"};
            return report(hallpump::pipeline::run_experiment(cfg));
        }
        if (lr->parsed()) {
            auto cfg = load(lr_args);
            cfg.stages = {"validate", "lrcone"};
            cfg.run_lr_cone = true;
            return report(hallpump::pipeline::run_experiment(cfg));
        }
        if (oracle->parsed()) {
            auto cfg = load(oracle_args);
            std::cout << hallpump::pipeline::oracle_chern_number(cfg) << "\n";
            return 0;
        }
        if (validate->parsed()) {
            auto cfg = load(val_args);
            std::cout << "config ok\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
