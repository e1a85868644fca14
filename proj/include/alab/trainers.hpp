#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "alab/auction.hpp"
#include "alab/auctioneer.hpp"
#include "alab/losses.hpp"
#include "alab/misreporter.hpp"
#include "alab/oracles.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Training drivers. All randomness is derived from (seed, purpose, step,
// index), so runs are reproducible and resume bitwise-continues.
// ---------------------------------------------------------------------------

struct EvalOptions {
    int cadence = 1000;       // evaluate every this many steps (and at the end)
    int test_profiles = 2000;
    EstimatorSpec estimator;  // independent oracle; defaults to gradient ascent
};

struct GameTrainConfig {
    double lr = 1e-3;     // gamma, shared by both players
    int batch = 128;      // B
    int steps = 20000;    // T, counted in auctioneer updates
    int t_init = 500;     // misreporter reinit period
    int t_limit = 6000;   // reinit cutoff
    int tau = 10;         // misreporter updates per auctioneer update
    AuctioneerSizes auct_sizes;
    MisreporterSizes mis_sizes;
    AdamWConfig adamw;        // lr field is overridden by `lr`
    bool time_ramp = false;   // t rises linearly 0 -> 1 over the step budget
    EvalOptions eval;
    uint64_t seed = 1;

    void validate() const;
    double time_of_step(int step) const;
};

struct RegretNetConfig {
    double lr_misreport = 0.1;  // gamma, inner ascent step on misreports
    double lr_params = 1e-3;    // eta
    int inner_steps = 10;       // misreport updates per batch
    double lambda0 = 5.0;
    double rho0 = 1.0;
    double c = 50.0;
    uint64_t t_rho = 10000;
    uint64_t t_lambda = 100;
    int batch = 128;
    int steps = 20000;
    int dataset_size = 0;  // offline mode: fixed dataset with persistent misreports
    AuctioneerSizes auct_sizes;
    AdamWConfig adamw;  // lr field is overridden by lr_params
    bool time_ramp = false;
    EvalOptions eval;
    uint64_t seed = 1;

    void validate(bool offline) const;
    double time_of_step(int step) const;
};

struct TrainPoint {
    int step = 0;
    double t = 0.0;
    double wall_seconds = 0.0;
    MetricsRecord metrics;
};

struct TrainLog {
    std::vector<TrainPoint> points;
    uint64_t seed = 0;
    std::string config_hash;
    enum class Status { completed, diverged } status = Status::completed;
    int diverged_at_step = -1;
};

// Full mutable state of an ALGnet run; checkpointable.
struct AlgnetState {
    int step = 0;  // completed auctioneer updates
    AuctioneerParams auctioneer;
    AdamWState opt_f1, opt_f2, opt_pay;
    MisreporterParams misreporter;
    AdamWState opt_mis;
};

struct RegretNetState {
    int step = 0;
    AuctioneerParams auctioneer;
    AdamWState opt_f1, opt_f2, opt_pay;
    LagrangianState lagrangian;
    std::vector<Mat> misreports;  // offline mode: one per dataset sample
};

struct AlgnetResult {
    AuctioneerParams auctioneer;
    MisreporterParams misreporter;
    TrainLog log;
};

struct RegretNetResult {
    AuctioneerParams auctioneer;
    TrainLog log;
};

using AlgnetEvalHook = std::function<void(const AlgnetState&, const TrainPoint&)>;
using RegretNetEvalHook = std::function<void(const RegretNetState&, const TrainPoint&)>;

// Batch loss pipelines (exposed for direct gradient checking).
// Stationary game loss on a batch: misreports come from the misreporter and
// are treated as constants; gradient is with respect to auctioneer params.
double algnet_loss_and_grads(const AuctioneerParams& auct, const MisreporterParams& mis,
                             std::span<const Mat> profiles, AuctioneerGrads* grads);
// Augmented-Lagrangian loss on a batch with fixed misreports (one matrix per
// profile).
double regretnet_loss_and_grads(const AuctioneerParams& auct, const LagrangianState& lagr,
                                std::span<const Mat> profiles, std::span<const Mat> misreports,
                                AuctioneerGrads* grads,
                                std::vector<double>* mean_bidder_regrets = nullptr);

AlgnetState algnet_init(const GameTrainConfig& cfg, const ProductDistribution& dist);
AlgnetResult train_algnet(const GameTrainConfig& cfg, const ProductDistribution& dist,
                          const AlgnetState* resume = nullptr, const AlgnetEvalHook& on_eval = {});

RegretNetState regretnet_init(const RegretNetConfig& cfg, const ProductDistribution& dist,
                              bool offline);
// Offline variant (Alg. 2): fixed pre-sampled dataset, misreports persist
// across epochs. cfg.dataset_size must be > 0.
RegretNetResult train_regretnet(const RegretNetConfig& cfg, const ProductDistribution& dist,
                                const RegretNetState* resume = nullptr,
                                const RegretNetEvalHook& on_eval = {});
// Online variant (Alg. 3): fresh minibatch each step, misreports
// re-initialized per batch.
RegretNetResult train_regretnet_online(const RegretNetConfig& cfg, const ProductDistribution& dist,
                                       const RegretNetState* resume = nullptr,
                                       const RegretNetEvalHook& on_eval = {});

// Time-varying experiment helpers: force the linear 0 -> 1 ramp and run.
AlgnetResult run_online_experiment(GameTrainConfig cfg, const ProductDistribution& dist,
                                   const AlgnetEvalHook& on_eval = {});
RegretNetResult run_online_experiment(RegretNetConfig cfg, bool online,
                                      const ProductDistribution& dist,
                                      const RegretNetEvalHook& on_eval = {});

// Trainer checkpoints (full state; resumed runs continue bitwise).
void save_algnet_state(const std::filesystem::path& path, const AlgnetState& state);
AlgnetState load_algnet_state(const std::filesystem::path& path);
void save_regretnet_state(const std::filesystem::path& path, const RegretNetState& state);
RegretNetState load_regretnet_state(const std::filesystem::path& path);

}  // namespace alab
