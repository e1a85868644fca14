// Experiment driver: train / eval / truthify / online / report, all driven by
// a JSON experiment config. See README for the schema.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alab/experiment.hpp"

namespace fs = std::filesystem;
using namespace alab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::string checkpoint;
    std::string oracle;
    int64_t seed = -1;
};

ExperimentConfig load_with_overrides(const CommonArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (args.seed >= 0) cfg.seeds = {static_cast<uint64_t>(args.seed)};
    if (!args.oracle.empty()) cfg.oracle.kind = regret_estimator_from_string(args.oracle);
    cfg.validate();
    return cfg;
}

void print_record(const MetricsRecord& rec) {
    std::printf("rev=%.6f rgt=%.6g total_regret=%.6g p_star=%.6f estimator=%s samples=%d\n",
                rec.rev, rec.rgt, rec.total_regret, rec.p_star,
                to_string(rec.estimator).c_str(), rec.sample_count);
}

int do_train(const CommonArgs& args, bool force_online) {
    ExperimentConfig cfg = load_with_overrides(args);
    if (force_online) {
        if (cfg.algorithm == Algorithm::algnet) cfg.algorithm = Algorithm::algnet_online;
        if (cfg.algorithm == Algorithm::regretnet) cfg.algorithm = Algorithm::regretnet_online;
    }
    const auto results = cmd_train(cfg, args.out.empty() ? fs::path() : fs::path(args.out));
    int failures = 0;
    for (const auto& r : results) {
        std::printf("seed %llu -> %s%s\n", static_cast<unsigned long long>(r.seed),
                    r.dir.string().c_str(), r.diverged ? "  [DIVERGED]" : "");
        if (!r.diverged) {
            std::printf("  final: ");
            print_record(r.final_metrics);
        } else {
            ++failures;
        }
    }
    return failures == static_cast<int>(results.size()) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"auction lab: learning revenue-maximizing, approximately-truthful auctions"};
    app.require_subcommand(1);

    CommonArgs args;

    auto add_common = [&](CLI::App* cmd, bool needs_checkpoint) {
        cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
        cmd->add_option("--out", args.out, "output directory override");
        cmd->add_option("--seed", args.seed, "single-seed override");
        cmd->add_option("--oracle", args.oracle, "regret oracle: grid|ascent|misreporter");
        if (needs_checkpoint)
            cmd->add_option("--checkpoint", args.checkpoint, "auctioneer checkpoint")->required();
    };

    CLI::App* train = app.add_subcommand("train", "train one experiment (all seeds)");
    add_common(train, false);
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test protocol");
    add_common(eval, true);
    CLI::App* truthify_cmd =
        app.add_subcommand("truthify", "truthify a single-bidder checkpoint");
    add_common(truthify_cmd, true);
    CLI::App* online = app.add_subcommand("online", "run the time-varying variant");
    add_common(online, false);

    CLI::App* report = app.add_subcommand("report", "aggregate finished runs");
    std::vector<std::string> run_dirs;
    std::string report_out = "report";
    report->add_option("dirs", run_dirs, "run directories")->required();
    report->add_option("--out", report_out, "report output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return do_train(args, false);
        if (online->parsed()) return do_train(args, true);
        if (eval->parsed()) {
            const ExperimentConfig cfg = load_with_overrides(args);
            const fs::path csv = args.out.empty() ? fs::path() : fs::path(args.out);
            const MetricsRecord rec = cmd_eval(args.checkpoint, cfg, csv);
            print_record(rec);
            return 0;
        }
        if (truthify_cmd->parsed()) {
            const ExperimentConfig cfg = load_with_overrides(args);
            const fs::path out = args.out.empty() ? fs::path("truthified") : fs::path(args.out);
            const TruthifyResult res = cmd_truthify(args.checkpoint, cfg, out);
            std::printf("epsilon=%.6f menu_entries=%zu\n", res.epsilon, res.menu.entries.size());
            std::printf("input:  ");
            print_record(res.input_metrics);
            std::printf("output: ");
            print_record(res.output_metrics);
            return 0;
        }
        if (report->parsed()) {
            std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
            const auto rows = cmd_report(dirs, report_out);
            for (const auto& r : rows)
                std::printf("%s/%s: runs=%d rev=%.4f (+/-%.4f) rgt=%.6f (+/-%.6f) p*=%.4f\n",
                            r.name.c_str(), r.algorithm.c_str(), r.runs, r.rev_mean, r.rev_std,
                            r.rgt_mean, r.rgt_std, r.p_star_mean);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
