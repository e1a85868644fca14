#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "alab/auction.hpp"
#include "alab/auctioneer.hpp"
#include "alab/misreporter.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Independent regret estimators. All of them include the truthful report in
// the candidate set, so estimates are nonnegative by construction and lower
// bounds on the true ex-post regret.
// ---------------------------------------------------------------------------

struct RegretResult {
    double regret = 0.0;
    std::vector<double> misreport;  // argmax candidate
};

// Hard cap on lattice size; beyond this regret_grid refuses rather than
// silently degrading.
constexpr long long kGridBudget = 1'000'000;

// Exhaustive max over a lattice spanning the search box (points_per_dim per
// item; 0 means the truthful report is the only candidate).
RegretResult regret_grid(const Mechanism& mech, const ProductDistribution& dist,
                         const ValuationProfile& profile, int bidder, int points_per_dim,
                         double t = 0.0);

struct AscentOptions {
    int restarts = 10;
    int steps = 200;
    double step_frac = 0.05;  // step size as a fraction of each item's box span
};

// Projected gradient ascent on the bidder's misreport; restart 0 starts from
// the truthful report, the rest from random points in the search box. Best
// utility over every iterate visited.
RegretResult regret_gradient_ascent(const NeuralMechanism& mech, const ProductDistribution& dist,
                                    const ValuationProfile& profile, int bidder,
                                    const AscentOptions& opt, uint64_t seed, double t = 0.0);

// Regret implied by a trained misreporter's predicted misreport (clamped at
// zero). A lower bound on the max; never a certification.
double regret_from_misreporter(const Mechanism& mech, const MisreporterParams& mis,
                               const ValuationProfile& profile, int bidder);

// ---------------------------------------------------------------------------
// Test-set metric estimation.
// ---------------------------------------------------------------------------

struct EstimatorSpec {
    RegretEstimatorKind kind = RegretEstimatorKind::gradient_ascent;
    int grid_points = 51;
    AscentOptions ascent;
    const MisreporterParams* misreporter = nullptr;  // required for kind == misreporter
};

// rev = mean_l sum_i p_i(V^l), rgt = mean over (l, i) of r_i(V^l); profiles
// drawn with per-index RNG streams so results are independent of worker
// count. Gradient ascent requires a NeuralMechanism.
MetricsRecord empirical_metrics(const Mechanism& mech, const ProductDistribution& dist,
                                int sample_count, const EstimatorSpec& est, uint64_t seed,
                                double t = 0.0);

}  // namespace alab
