#include "alab/auction.hpp"

#include <cmath>
#include <stdexcept>

namespace alab {

void AuctionShape::validate() const {
    if (bidders < 1 || items < 1) throw std::invalid_argument("AuctionShape: n, m must be >= 1");
}

MarginalDistribution MarginalDistribution::uniform(double lo, double hi) {
    MarginalDistribution d;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    d.validate();
    return d;
}

MarginalDistribution MarginalDistribution::power_tail(double k) {
    MarginalDistribution d;
    d.kind = Kind::power_tail;
    d.tail_k = k;
    d.validate();
    return d;
}

MarginalDistribution MarginalDistribution::time_scaled_uniform(double lo, double hi, double rate) {
    MarginalDistribution d;
    d.kind = Kind::time_scaled_uniform;
    d.lo = lo;
    d.hi = hi;
    d.rate = rate;
    d.validate();
    return d;
}

void MarginalDistribution::validate() const {
    switch (kind) {
        case Kind::uniform:
        case Kind::time_scaled_uniform:
            if (!(lo < hi)) throw std::invalid_argument("uniform marginal requires lo < hi");
            if (lo < 0.0) throw std::invalid_argument("valuations must be nonnegative");
            break;
        case Kind::power_tail:
            if (!(tail_k > 1.0)) throw std::invalid_argument("power tail requires k > 1");
            break;
    }
}

static double time_scale(const MarginalDistribution& d, double t) {
    return d.kind == MarginalDistribution::Kind::time_scaled_uniform ? 1.0 + d.rate * t : 1.0;
}

double MarginalDistribution::sample(double t, Rng& rng) const {
    switch (kind) {
        case Kind::uniform: return rng.uniform(lo, hi);
        case Kind::time_scaled_uniform: {
            const double s = time_scale(*this, t);
            return rng.uniform(lo * s, hi * s);
        }
        case Kind::power_tail: {
            // inverse CDF of F(x) = 1 - (1+x)^-k
            const double u = rng.uniform01();
            return std::pow(1.0 - u, -1.0 / tail_k) - 1.0;
        }
    }
    return 0.0;
}

double MarginalDistribution::quantile(double q, double t) const {
    switch (kind) {
        case Kind::uniform: return lo + q * (hi - lo);
        case Kind::time_scaled_uniform: {
            const double s = time_scale(*this, t);
            return (lo + q * (hi - lo)) * s;
        }
        case Kind::power_tail: return std::pow(1.0 - q, -1.0 / tail_k) - 1.0;
    }
    return 0.0;
}

double MarginalDistribution::search_lo(double t) const {
    switch (kind) {
        case Kind::uniform: return lo;
        case Kind::time_scaled_uniform: return lo * time_scale(*this, t);
        case Kind::power_tail: return 0.0;
    }
    return 0.0;
}

double MarginalDistribution::search_hi(double t) const {
    switch (kind) {
        case Kind::uniform: return hi;
        case Kind::time_scaled_uniform: return hi * time_scale(*this, t);
        case Kind::power_tail: return quantile(0.9999, t);
    }
    return 1.0;
}

void ProductDistribution::validate() const {
    shape.validate();
    if (static_cast<int>(marginals.size()) != shape.items)
        throw std::invalid_argument("ProductDistribution: need one marginal per item");
    for (const auto& m : marginals) m.validate();
}

ValuationProfile sample_profile(const ProductDistribution& dist, double t, Rng& rng) {
    Mat v(dist.shape.bidders, dist.shape.items);
    for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) v(i, j) = dist.marginals[j].sample(t, rng);
    return v;
}

double utility(const AuctionOutcome& outcome, int bidder, std::span<const double> true_values) {
    return dot(outcome.alloc.row(bidder), true_values) - outcome.pay[bidder];
}

double utility(const Mechanism& mech, int bidder, std::span<const double> true_values,
               const ValuationProfile& bids) {
    const AuctionShape s = mech.shape();
    if (bids.rows != s.bidders || bids.cols != s.items)
        throw std::invalid_argument("utility: bid matrix shape mismatch");
    if (static_cast<int>(true_values.size()) != s.items)
        throw std::invalid_argument("utility: true value vector length mismatch");
    if (bidder < 0 || bidder >= s.bidders) throw std::invalid_argument("utility: bad bidder index");
    return utility(mech.run(bids), bidder, true_values);
}

PostedPriceMechanism::PostedPriceMechanism(std::vector<double> prices) : prices_(std::move(prices)) {
    if (prices_.empty()) throw std::invalid_argument("PostedPriceMechanism: need >= 1 price");
    for (double p : prices_)
        if (!(p >= 0.0)) throw std::invalid_argument("PostedPriceMechanism: negative price");
}

AuctionOutcome PostedPriceMechanism::run(const ValuationProfile& bids) const {
    const int m = static_cast<int>(prices_.size());
    if (bids.rows != 1 || bids.cols != m)
        throw std::invalid_argument("PostedPriceMechanism: bid shape mismatch");
    AuctionOutcome out;
    out.alloc = Mat(1, m);
    out.pay.assign(1, 0.0);
    for (int j = 0; j < m; ++j) {
        if (bids(0, j) >= prices_[j]) {
            out.alloc(0, j) = 1.0;
            out.pay[0] += prices_[j];
        }
    }
    return out;
}

std::string to_string(RegretEstimatorKind kind) {
    switch (kind) {
        case RegretEstimatorKind::misreporter: return "misreporter";
        case RegretEstimatorKind::gradient_ascent: return "ascent";
        case RegretEstimatorKind::grid: return "grid";
    }
    return "?";
}

RegretEstimatorKind regret_estimator_from_string(const std::string& s) {
    if (s == "misreporter") return RegretEstimatorKind::misreporter;
    if (s == "ascent" || s == "gradient_ascent") return RegretEstimatorKind::gradient_ascent;
    if (s == "grid") return RegretEstimatorKind::grid;
    throw std::invalid_argument("unknown regret estimator: " + s);
}

}  // namespace alab
