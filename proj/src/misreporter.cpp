#include "alab/misreporter.hpp"

#include <cmath>
#include <stdexcept>

#include "alab/io.hpp"

namespace alab {

ProjectionSpec ProjectionSpec::for_distribution(const ProductDistribution& dist, double t) {
    ProjectionSpec p;
    p.items.reserve(dist.marginals.size());
    for (const auto& marg : dist.marginals) {
        Item item;
        if (marg.kind == MarginalDistribution::Kind::power_tail) {
            item.kind = Kind::capped_softplus;
            item.lo = 0.0;
            item.hi = marg.search_hi(t);
        } else {
            item.kind = Kind::scaled_sigmoid;
            item.lo = marg.search_lo(t);
            item.hi = marg.search_hi(t);
        }
        p.items.push_back(item);
    }
    return p;
}

double ProjectionSpec::apply(int item, double x) const {
    const Item& it = items[item];
    switch (it.kind) {
        case Kind::scaled_sigmoid: return it.lo + (it.hi - it.lo) * sigmoid(x);
        case Kind::capped_softplus: return std::min(softplus(x), it.hi);
    }
    return x;
}

double ProjectionSpec::deriv(int item, double x) const {
    const Item& it = items[item];
    switch (it.kind) {
        case Kind::scaled_sigmoid: {
            const double s = sigmoid(x);
            return (it.hi - it.lo) * s * (1.0 - s);
        }
        case Kind::capped_softplus: return softplus(x) < it.hi ? sigmoid(x) : 0.0;
    }
    return 1.0;
}

double ProjectionSpec::range_lo(int item) const { return items[item].lo; }
double ProjectionSpec::range_hi(int item) const { return items[item].hi; }

MisreporterParams MisreporterParams::init(const AuctionShape& shape, const MisreporterSizes& sizes,
                                          ProjectionSpec proj, uint64_t seed) {
    shape.validate();
    if (static_cast<int>(proj.items.size()) != shape.items)
        throw std::invalid_argument("MisreporterParams: projection/items mismatch");
    MisreporterParams p;
    p.shape = shape;
    p.spec = {shape.bidders * shape.items, sizes.layers, sizes.width, shape.items,
              OutputActivation::identity};
    p.net = mlp_init(p.spec, splitmix64(seed ^ hash_tag("misreporter")));
    p.proj = std::move(proj);
    return p;
}

void misreporter_forward(const MisreporterParams& params, const Mat& bids,
                         MisreporterCache& cache) {
    const int n = params.shape.bidders, m = params.shape.items;
    if (bids.rows != n || bids.cols != m)
        throw std::invalid_argument("misreporter_forward: bid shape mismatch");
    cache.per_bidder.resize(n);
    cache.raw = Mat(n, m);
    cache.reports = Mat(n, m);
    for (int i = 0; i < n; ++i) {
        const std::vector<double> rotated = bidder_rotate(bids, i);
        mlp_forward(params.spec, params.net, rotated, cache.per_bidder[i]);
        for (int j = 0; j < m; ++j) {
            cache.raw(i, j) = cache.per_bidder[i].out[j];
            cache.reports(i, j) = params.proj.apply(j, cache.raw(i, j));
        }
    }
}

Mat misreport(const MisreporterParams& params, const Mat& bids) {
    MisreporterCache cache;
    misreporter_forward(params, bids, cache);
    return std::move(cache.reports);
}

void misreporter_backward(const MisreporterParams& params, const MisreporterCache& cache,
                          const Mat& d_reports, MlpParams& grads) {
    const int n = params.shape.bidders, m = params.shape.items;
    std::vector<double> up(m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) up[j] = d_reports(i, j) * params.proj.deriv(j, cache.raw(i, j));
        mlp_backward(params.spec, params.net, cache.per_bidder[i], up, &grads, {});
    }
}

double misreporter_loss(const MisreporterParams& mis, const AuctioneerParams& auct,
                        std::span<const Mat> profiles, MlpParams* grads) {
    if (profiles.empty()) throw std::invalid_argument("misreporter_loss: empty batch");
    const int n = mis.shape.bidders, m = mis.shape.items;
    const double inv_count = 1.0 / static_cast<double>(profiles.size());

    double total_utility = 0.0;
    MisreporterCache mis_cache;
    AuctioneerCache auct_cache;
    Mat d_reports(n, m);
    Mat d_alloc(n, m);
    std::vector<double> d_pay(n);
    Mat d_bids(n, m);

    for (const Mat& profile : profiles) {
        misreporter_forward(mis, profile, mis_cache);
        if (grads) std::fill(d_reports.a.begin(), d_reports.a.end(), 0.0);

        for (int i = 0; i < n; ++i) {
            const Mat bid = profile.with_row(i, mis_cache.reports.row(i));
            auctioneer_forward(auct, bid, auct_cache);
            total_utility += utility({auct_cache.alloc, auct_cache.pay}, i, profile.row(i));

            if (grads) {
                // d L_r / d u_i = -1/L; push through the auctioneer into the
                // misreport row only (other rows of the bid are constants).
                std::fill(d_alloc.a.begin(), d_alloc.a.end(), 0.0);
                std::fill(d_pay.begin(), d_pay.end(), 0.0);
                std::fill(d_bids.a.begin(), d_bids.a.end(), 0.0);
                for (int j = 0; j < m; ++j) d_alloc(i, j) = -inv_count * profile(i, j);
                d_pay[i] = inv_count;
                auctioneer_backward(auct, auct_cache, d_alloc, d_pay, nullptr, &d_bids);
                for (int j = 0; j < m; ++j) d_reports(i, j) += d_bids(i, j);
            }
        }
        if (grads) misreporter_backward(mis, mis_cache, d_reports, *grads);
    }
    const double loss = -total_utility * inv_count;
    if (!std::isfinite(loss)) throw std::runtime_error("misreporter_loss: non-finite loss");
    return loss;
}

void write_misreporter(ByteWriter& w, const MisreporterParams& params) {
    w.u32(static_cast<uint32_t>(params.shape.bidders));
    w.u32(static_cast<uint32_t>(params.shape.items));
    for (const auto& item : params.proj.items) {
        w.u32(static_cast<uint32_t>(item.kind));
        w.f64(item.lo);
        w.f64(item.hi);
    }
    write_mlp(w, params.spec, params.net);
}

MisreporterParams read_misreporter(ByteReader& r) {
    MisreporterParams p;
    p.shape.bidders = static_cast<int>(r.u32());
    p.shape.items = static_cast<int>(r.u32());
    p.shape.validate();
    p.proj.items.resize(p.shape.items);
    for (auto& item : p.proj.items) {
        const uint32_t kind = r.u32();
        if (kind > 1) throw SerializeError("unknown projection kind");
        item.kind = static_cast<ProjectionSpec::Kind>(kind);
        item.lo = r.f64();
        item.hi = r.f64();
    }
    p.spec = read_mlp_spec(r);
    p.net = read_mlp(r, p.spec);
    return p;
}

void save_misreporter(const std::filesystem::path& path, const MisreporterParams& params) {
    ByteWriter w;
    write_header(w, CheckpointKind::misreporter);
    write_misreporter(w, params);
    save_bytes(path, w.data());
}

MisreporterParams load_misreporter(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = load_bytes(path);
    ByteReader r(bytes);
    if (read_header(r) != CheckpointKind::misreporter)
        throw SerializeError("not a misreporter checkpoint");
    MisreporterParams p = read_misreporter(r);
    r.expect_end();
    return p;
}

}  // namespace alab
