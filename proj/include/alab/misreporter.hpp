#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "alab/auction.hpp"
#include "alab/auctioneer.hpp"
#include "alab/nn.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Amortized misreport predictor: one shared MLP maps the bidder-rotated
// profile to that bidder's misreport, followed by a per-item projection onto
// the valuation domain.
// ---------------------------------------------------------------------------

struct ProjectionSpec {
    enum class Kind : uint32_t { scaled_sigmoid = 0, capped_softplus = 1 };
    struct Item {
        Kind kind = Kind::scaled_sigmoid;
        double lo = 0.0;  // scaled_sigmoid range; capped_softplus uses [0, hi]
        double hi = 1.0;
        bool operator==(const Item&) const = default;
    };
    std::vector<Item> items;

    // Bounded marginals get a scaled sigmoid onto their support; power tails
    // get softplus clipped at the 99.99% quantile.
    static ProjectionSpec for_distribution(const ProductDistribution& dist, double t = 0.0);

    double apply(int item, double x) const;
    double deriv(int item, double x) const;  // d apply / dx
    double range_lo(int item) const;
    double range_hi(int item) const;

    bool operator==(const ProjectionSpec&) const = default;
};

struct MisreporterSizes {
    int layers = 2;
    int width = 50;
};

struct MisreporterParams {
    AuctionShape shape;
    MlpSpec spec;  // nm -> m, identity output; projection applied on top
    MlpParams net;
    ProjectionSpec proj;

    static MisreporterParams init(const AuctionShape& shape, const MisreporterSizes& sizes,
                                  ProjectionSpec proj, uint64_t seed);
    bool operator==(const MisreporterParams&) const = default;
};

struct MisreporterCache {
    std::vector<MlpCache> per_bidder;
    Mat raw;      // pre-projection outputs, n x m
    Mat reports;  // projected misreports
};

// Row i = Proj(MLP(bidder_rotate(B, i))).
void misreporter_forward(const MisreporterParams& params, const Mat& bids, MisreporterCache& cache);
Mat misreport(const MisreporterParams& params, const Mat& bids);

// Accumulates d<upstream, reports>/d(net params) into grads.
void misreporter_backward(const MisreporterParams& params, const MisreporterCache& cache,
                          const Mat& d_reports, MlpParams& grads);

// L_r(phi, w) = -mean_profiles sum_i u_i^w(v_i, (M_i, V_-i)); the auctioneer
// is frozen. If grads is non-null it receives the parameter gradient.
double misreporter_loss(const MisreporterParams& mis, const AuctioneerParams& auct,
                        std::span<const Mat> profiles, MlpParams* grads);

void save_misreporter(const std::filesystem::path& path, const MisreporterParams& params);
MisreporterParams load_misreporter(const std::filesystem::path& path);

class ByteWriter;
class ByteReader;
void write_misreporter(ByteWriter& w, const MisreporterParams& params);
MisreporterParams read_misreporter(ByteReader& r);

}  // namespace alab
