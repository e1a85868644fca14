#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alab/auction.hpp"
#include "alab/trainers.hpp"
#include "alab/truthify.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Config-file-driven experiment orchestration. One JSON file = one
// experiment; the seed list fans out into independent runs.
// ---------------------------------------------------------------------------

enum class Algorithm { algnet, regretnet, regretnet_online, algnet_online };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ExperimentConfig {
    std::string name;
    ProductDistribution dist;
    Algorithm algorithm = Algorithm::algnet;
    bool has_game = false;
    GameTrainConfig game;
    bool has_regretnet = false;
    RegretNetConfig regretnet;
    std::vector<uint64_t> seeds;
    int test_profiles = 10000;  // final evaluation set size
    // final-eval oracle (in-run cadence/oracle live inside the trainer configs)
    EstimatorSpec oracle;
    std::string output_dir = "runs";

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);  // manifest-ready echo
std::string config_hash(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

struct RunResult {
    std::filesystem::path dir;
    uint64_t seed = 0;
    bool diverged = false;
    MetricsRecord final_metrics;
};

// One sub-run per seed under <out>/<name>/seed_<s>/: manifest.json,
// metrics.csv (in-run curve), final_eval.csv, checkpoints. Divergence in one
// seed is recorded without aborting the siblings.
std::vector<RunResult> cmd_train(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_override = {});

// Evaluate a saved auctioneer checkpoint and append a CSV row.
MetricsRecord cmd_eval(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg,
                       const std::filesystem::path& csv_out = {});

// Truthify a single-bidder checkpoint: writes menu.csv and certificate.csv
// into out_dir and returns the full result. Multi-bidder checkpoints are
// rejected (the multi-bidder transform is not constructive here).
TruthifyResult cmd_truthify(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir);

struct AggregateRow {
    std::string name;
    std::string algorithm;
    RegretEstimatorKind estimator = RegretEstimatorKind::gradient_ascent;
    int runs = 0;
    double rev_mean = 0, rev_std = 0;
    double rgt_mean = 0, rgt_std = 0;
    double p_star_mean = 0, p_star_std = 0;
};

// Aggregate finished runs (mean +/- std of per-seed finals) and emit
// aggregate.csv plus per-run series files for external plotting. Refuses to
// aggregate across regret estimators.
std::vector<AggregateRow> cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                                     const std::filesystem::path& out_dir);

// CSV helpers shared by the CLI and tests.
std::string metrics_csv_header();
std::string metrics_csv_row(int step, double t, const MetricsRecord& rec);
MetricsRecord parse_metrics_csv_row(const std::string& line, int* step = nullptr,
                                    double* t = nullptr);

}  // namespace alab
