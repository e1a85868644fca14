#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alab/mat.hpp"
#include "alab/rng.hpp"

namespace alab {

struct AuctionShape {
    int bidders = 1;  // n
    int items = 1;    // m
    void validate() const;
    bool operator==(const AuctionShape&) const = default;
};

// An n x m matrix of nonnegative bidder-item values; bid matrices share the
// representation.
using ValuationProfile = Mat;

// ---------------------------------------------------------------------------
// Valuation distributions. Bidders are i.i.d.; items may differ. The time
// parameter t only affects time-scaled marginals (support scaled by 1+rate*t).
// ---------------------------------------------------------------------------

struct MarginalDistribution {
    enum class Kind { uniform, power_tail, time_scaled_uniform };
    Kind kind = Kind::uniform;
    double lo = 0.0, hi = 1.0;  // uniform / time-scaled base support
    double tail_k = 2.0;        // power tail: density k/(1+x)^(k+1) on [0, inf)
    double rate = 1.0;          // time-scaled: support multiplier 1 + rate*t

    static MarginalDistribution uniform(double lo, double hi);
    static MarginalDistribution power_tail(double k);
    static MarginalDistribution time_scaled_uniform(double lo, double hi, double rate = 1.0);

    void validate() const;
    double sample(double t, Rng& rng) const;
    double quantile(double q, double t) const;

    // Bounded box used for misreport search and projections. Equals the
    // support for bounded marginals; power tails are cut at the 99.99%
    // quantile.
    double search_lo(double t) const;
    double search_hi(double t) const;

    bool operator==(const MarginalDistribution&) const = default;
};

struct ProductDistribution {
    AuctionShape shape;
    std::vector<MarginalDistribution> marginals;  // one per item, shared by all bidders

    void validate() const;
    bool operator==(const ProductDistribution&) const = default;
};

ValuationProfile sample_profile(const ProductDistribution& dist, double t, Rng& rng);

// ---------------------------------------------------------------------------
// Mechanisms
// ---------------------------------------------------------------------------

struct AuctionOutcome {
    Mat alloc;                // [0,1]^{n x m}, per-item column sums <= 1
    std::vector<double> pay;  // nonnegative, length n
};

class Mechanism {
public:
    virtual ~Mechanism() = default;
    virtual AuctionShape shape() const = 0;
    virtual AuctionOutcome run(const ValuationProfile& bids) const = 0;

    Mat allocate(const ValuationProfile& bids) const { return run(bids).alloc; }
    std::vector<double> pay(const ValuationProfile& bids) const { return run(bids).pay; }
};

// u_i = <g_i(bids), true_values> - p_i(bids); allocations are exact
// fractional quantities.
double utility(const Mechanism& mech, int bidder, std::span<const double> true_values,
               const ValuationProfile& bids);
double utility(const AuctionOutcome& outcome, int bidder, std::span<const double> true_values);

// Single-bidder take-it-or-leave-it prices, one per item. Truthful by
// construction; used as an analytic baseline and oracle sanity case.
class PostedPriceMechanism final : public Mechanism {
public:
    explicit PostedPriceMechanism(std::vector<double> prices);
    AuctionShape shape() const override { return {1, static_cast<int>(prices_.size())}; }
    AuctionOutcome run(const ValuationProfile& bids) const override;
    const std::vector<double>& prices() const { return prices_; }

private:
    std::vector<double> prices_;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class RegretEstimatorKind { misreporter, gradient_ascent, grid };

std::string to_string(RegretEstimatorKind kind);
RegretEstimatorKind regret_estimator_from_string(const std::string& s);

struct MetricsRecord {
    double rev = 0.0;           // expected total revenue P
    double rgt = 0.0;           // per-bidder average regret
    double total_regret = 0.0;  // R = n * rgt
    double p_star = 0.0;        // (sqrt(P) - sqrt(R))^2, 0 when R > P
    RegretEstimatorKind estimator = RegretEstimatorKind::grid;
    int sample_count = 0;
    uint64_t seed = 0;
};

}  // namespace alab
