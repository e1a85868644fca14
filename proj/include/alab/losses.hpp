#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alab/auction.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Stationary comparison metric and game losses.
// ---------------------------------------------------------------------------

// Truthful-equivalent revenue (sqrt(P) - sqrt(R))^2 of a mechanism with
// revenue P and total regret R; 0 once R exceeds P (the transform can no
// longer certify positive revenue). R is the *total* regret n * rgt.
double p_star(double revenue, double total_regret);

// Revenue-discount fraction that maximizes the certified revenue:
// min(sqrt(R/P), 1), with the no-revenue edge case pinned to 1.
double epsilon_star(double revenue, double total_regret);

enum class MechOrder { first_better, equal, second_better };

// Total order by sqrt(P) - sqrt(R); ties broken by lower R. Refuses records
// whose regrets came from different estimators.
MechOrder compare(const MetricsRecord& a, const MetricsRecord& b);

// Stationary auctioneer loss -(sqrt(P) - sqrt(R)) + R on batch means, with a
// small stabilizer inside each root (d sqrt(R)/dR diverges at R = 0, the
// attractor of training).
struct LossM {
    double loss = 0.0;
    double rev = 0.0;       // P, batch mean of per-profile revenue
    double regret = 0.0;    // R, batch mean of per-profile total clamped regret
    double d_rev = 0.0;     // d loss / d P
    double d_regret = 0.0;  // d loss / d R
};

// profile_revenue[l]  = sum_i p_i(V^l) at truthful bids
// profile_regret[l]   = sum_i max(0, r_i(V^l)) from the current misreporter
LossM loss_m(std::span<const double> profile_revenue, std::span<const double> profile_regret);

constexpr double kSqrtStabilizer = 1e-8;

// ---------------------------------------------------------------------------
// Augmented Lagrangian baseline.
// ---------------------------------------------------------------------------

struct LagrangianState {
    std::vector<double> lambda;    // one multiplier per bidder
    double rho = 1.0;              // quadratic penalty weight
    double c = 1.0;                // rho increment
    uint64_t t_rho = 10000;        // rho update period, steps
    uint64_t t_lambda = 100;       // lambda update period, steps

    void validate() const;
};

// L(w; lambda; rho) = -mean_rev + sum_i lambda_i rhat_i + (rho/2)(sum_i rhat_i)^2
double lagrangian_loss(double mean_revenue, std::span<const double> mean_bidder_regrets,
                       const LagrangianState& state);

// d L / d rhat_i = lambda_i + rho * sum_k rhat_k (the -mean_rev term
// contributes -1 per unit of mean revenue).
void lagrangian_regret_grads(std::span<const double> mean_bidder_regrets,
                             const LagrangianState& state, std::span<double> d_regret);

// rho += c every t_rho steps; lambda_i += rho_old * rhat_i every t_lambda
// steps.
void schedule_step(LagrangianState& state, uint64_t step,
                   std::span<const double> mean_bidder_regrets);

}  // namespace alab
