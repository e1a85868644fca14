#include "alab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alab/losses.hpp"
#include "alab/parallel.hpp"

namespace alab {

namespace {

struct SearchBox {
    std::vector<double> lo, hi;
};

SearchBox search_box(const ProductDistribution& dist, double t) {
    SearchBox box;
    for (const auto& marg : dist.marginals) {
        box.lo.push_back(marg.search_lo(t));
        box.hi.push_back(marg.search_hi(t));
    }
    return box;
}

}  // namespace

RegretResult regret_grid(const Mechanism& mech, const ProductDistribution& dist,
                         const ValuationProfile& profile, int bidder, int points_per_dim,
                         double t) {
    const int m = dist.shape.items;
    if (points_per_dim < 0) throw std::invalid_argument("regret_grid: negative grid");
    long long total = 1;
    for (int j = 0; j < m; ++j) {
        total *= points_per_dim;
        if (total > kGridBudget)
            throw std::runtime_error("regret_grid: grid budget exceeded (points^m too large)");
    }

    const std::vector<double> true_values(profile.row(bidder).begin(), profile.row(bidder).end());
    const double truthful_u = utility(mech, bidder, true_values, profile);

    RegretResult best;
    best.regret = 0.0;  // truthful report is always a candidate
    best.misreport = true_values;

    if (points_per_dim == 0) return best;

    const SearchBox box = search_box(dist, t);
    auto grid_coord = [&](int item, int idx) {
        if (points_per_dim == 1) return box.lo[item];
        return box.lo[item] +
               (box.hi[item] - box.lo[item]) * idx / static_cast<double>(points_per_dim - 1);
    };

    Mat bids = profile;
    std::vector<int> odo(m, 0);
    std::vector<double> candidate(m);
    for (long long count = 0; count < total; ++count) {
        for (int j = 0; j < m; ++j) candidate[j] = grid_coord(j, odo[j]);
        for (int j = 0; j < m; ++j) bids(bidder, j) = candidate[j];
        const double u = utility(mech.run(bids), bidder, true_values);
        if (u - truthful_u > best.regret) {
            best.regret = u - truthful_u;
            best.misreport = candidate;
        }
        for (int j = m - 1; j >= 0; --j) {
            if (++odo[j] < points_per_dim) break;
            odo[j] = 0;
        }
    }
    return best;
}

RegretResult regret_gradient_ascent(const NeuralMechanism& mech, const ProductDistribution& dist,
                                    const ValuationProfile& profile, int bidder,
                                    const AscentOptions& opt, uint64_t seed, double t) {
    const int m = dist.shape.items;
    const std::vector<double> true_values(profile.row(bidder).begin(), profile.row(bidder).end());
    const double truthful_u = utility(mech, bidder, true_values, profile);
    const SearchBox box = search_box(dist, t);

    RegretResult best;
    best.regret = 0.0;
    best.misreport = true_values;

    Mat bids = profile;
    std::vector<double> point(m), grad(m);
    for (int r = 0; r < opt.restarts; ++r) {
        if (r == 0) {
            for (int j = 0; j < m; ++j) point[j] = std::clamp(true_values[j], box.lo[j], box.hi[j]);
        } else {
            Rng rng = derive_rng(seed, "ascent_restart", static_cast<uint64_t>(r),
                                 static_cast<uint64_t>(bidder));
            for (int j = 0; j < m; ++j) point[j] = rng.uniform(box.lo[j], box.hi[j]);
        }
        for (int s = 0; s <= opt.steps; ++s) {
            for (int j = 0; j < m; ++j) bids(bidder, j) = point[j];
            const double u = mech.utility_and_bid_grad(bidder, true_values, bids, grad);
            if (u - truthful_u > best.regret) {
                best.regret = u - truthful_u;
                best.misreport = point;
            }
            if (s == opt.steps) break;
            if (!all_finite(std::span<const double>(grad)))
                throw std::runtime_error("regret_gradient_ascent: non-finite utility gradient");
            for (int j = 0; j < m; ++j) {
                point[j] += opt.step_frac * (box.hi[j] - box.lo[j]) * grad[j];
                point[j] = std::clamp(point[j], box.lo[j], box.hi[j]);
            }
        }
    }
    return best;
}

double regret_from_misreporter(const Mechanism& mech, const MisreporterParams& mis,
                               const ValuationProfile& profile, int bidder) {
    const Mat reports = misreport(mis, profile);
    const std::vector<double> true_values(profile.row(bidder).begin(), profile.row(bidder).end());
    const double truthful_u = utility(mech, bidder, true_values, profile);
    const Mat bids = profile.with_row(bidder, reports.row(bidder));
    const double u = utility(mech, bidder, true_values, bids);
    return std::max(0.0, u - truthful_u);
}

MetricsRecord empirical_metrics(const Mechanism& mech, const ProductDistribution& dist,
                                int sample_count, const EstimatorSpec& est, uint64_t seed,
                                double t) {
    dist.validate();
    if (sample_count < 1) throw std::invalid_argument("empirical_metrics: sample_count < 1");
    if (dist.shape != mech.shape())
        throw std::invalid_argument("empirical_metrics: mechanism/distribution shape mismatch");
    const NeuralMechanism* neural = dynamic_cast<const NeuralMechanism*>(&mech);
    if (est.kind == RegretEstimatorKind::gradient_ascent && neural == nullptr)
        throw std::invalid_argument("empirical_metrics: gradient ascent needs a neural mechanism");
    if (est.kind == RegretEstimatorKind::misreporter && est.misreporter == nullptr)
        throw std::invalid_argument("empirical_metrics: misreporter estimator without network");

    const int n = dist.shape.bidders;
    std::vector<double> revenue(sample_count, 0.0);
    std::vector<double> regret_sum(sample_count, 0.0);

    parallel_for(static_cast<size_t>(sample_count), [&](size_t l) {
        Rng rng = derive_rng(seed, "testset", static_cast<uint64_t>(l));
        const ValuationProfile profile = sample_profile(dist, t, rng);
        const AuctionOutcome outcome = mech.run(profile);
        double rev = 0.0;
        for (double p : outcome.pay) rev += p;
        revenue[l] = rev;
        double rsum = 0.0;
        for (int i = 0; i < n; ++i) {
            switch (est.kind) {
                case RegretEstimatorKind::grid:
                    rsum += regret_grid(mech, dist, profile, i, est.grid_points, t).regret;
                    break;
                case RegretEstimatorKind::gradient_ascent:
                    rsum += regret_gradient_ascent(*neural, dist, profile, i, est.ascent,
                                                   splitmix64(seed ^ (0x517cc1b727220a95ULL + l)), t)
                                .regret;
                    break;
                case RegretEstimatorKind::misreporter:
                    rsum += regret_from_misreporter(mech, *est.misreporter, profile, i);
                    break;
            }
        }
        regret_sum[l] = rsum;
    });

    MetricsRecord rec;
    rec.estimator = est.kind;
    rec.sample_count = sample_count;
    rec.seed = seed;
    double rev_total = 0.0, regret_total = 0.0;
    for (int l = 0; l < sample_count; ++l) {
        rev_total += revenue[l];
        regret_total += regret_sum[l];
    }
    rec.rev = rev_total / sample_count;
    rec.rgt = regret_total / (static_cast<double>(sample_count) * n);
    rec.total_regret = static_cast<double>(n) * rec.rgt;
    rec.p_star = p_star(rec.rev, rec.total_regret);
    return rec;
}

}  // namespace alab
