#include "alab/auctioneer.hpp"

#include <stdexcept>

#include "alab/io.hpp"

namespace alab {

AuctioneerParams AuctioneerParams::init(const AuctionShape& shape, const AuctioneerSizes& sizes,
                                        uint64_t seed) {
    shape.validate();
    const int n = shape.bidders, m = shape.items;
    AuctioneerParams p;
    p.shape = shape;
    p.f1_spec = {n * m, sizes.alloc_layers, sizes.alloc_width, m, OutputActivation::sigmoid};
    p.f2_spec = {n * m, sizes.alloc_layers, sizes.alloc_width, n, OutputActivation::identity};
    p.pay_spec = {n * m, sizes.pay_layers, sizes.pay_width, 1, OutputActivation::sigmoid};
    p.f1 = mlp_init(p.f1_spec, splitmix64(seed ^ hash_tag("f1")));
    p.f2 = mlp_init(p.f2_spec, splitmix64(seed ^ hash_tag("f2")));
    p.pay = mlp_init(p.pay_spec, splitmix64(seed ^ hash_tag("pay")));
    return p;
}

void AuctioneerGrads::set_zero() {
    f1.set_zero();
    f2.set_zero();
    pay.set_zero();
}

void AuctioneerGrads::scale(double s) {
    f1.scale(s);
    f2.scale(s);
    pay.scale(s);
}

bool AuctioneerGrads::finite() const { return f1.finite() && f2.finite() && pay.finite(); }

AuctioneerGrads auctioneer_zero_grads(const AuctioneerParams& p) {
    return {mlp_zeros(p.f1_spec), mlp_zeros(p.f2_spec), mlp_zeros(p.pay_spec)};
}

std::vector<double> bidder_rotate(const Mat& B, int i) {
    if (i < 0 || i >= B.rows) throw std::out_of_range("bidder_rotate: bad index");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(B.rows) * B.cols);
    out.insert(out.end(), B.row(i).begin(), B.row(i).end());
    for (int r = 0; r < B.rows; ++r) {
        if (r == i) continue;
        out.insert(out.end(), B.row(r).begin(), B.row(r).end());
    }
    return out;
}

std::vector<double> item_rotate(const Mat& B, int j) {
    if (j < 0 || j >= B.cols) throw std::out_of_range("item_rotate: bad index");
    std::vector<double> out(static_cast<size_t>(B.rows) * B.cols);
    size_t p = 0;
    for (int r = 0; r < B.rows; ++r) {
        out[p++] = B(r, j);
        for (int c = 0; c < B.cols; ++c)
            if (c != j) out[p++] = B(r, c);
    }
    return out;
}

namespace {

// Scatter the gradient of a bidder-rotated flattening back onto the matrix.
void bidder_rotate_scatter(Mat& dB, int i, std::span<const double> d) {
    const int m = dB.cols;
    size_t p = 0;
    for (int c = 0; c < m; ++c) dB(i, c) += d[p++];
    for (int r = 0; r < dB.rows; ++r) {
        if (r == i) continue;
        for (int c = 0; c < m; ++c) dB(r, c) += d[p++];
    }
}

void item_rotate_scatter(Mat& dB, int j, std::span<const double> d) {
    size_t p = 0;
    for (int r = 0; r < dB.rows; ++r) {
        dB(r, j) += d[p++];
        for (int c = 0; c < dB.cols; ++c)
            if (c != j) dB(r, c) += d[p++];
    }
}

}  // namespace

void auctioneer_forward(const AuctioneerParams& params, const Mat& bids, AuctioneerCache& cache) {
    const int n = params.shape.bidders, m = params.shape.items;
    if (bids.rows != n || bids.cols != m)
        throw std::invalid_argument("auctioneer_forward: bid shape mismatch");
    cache.bids = bids;

    mlp_forward(params.f1_spec, params.f1, bids.a, cache.f1_cache);

    cache.f2_cache.resize(m);
    cache.logits = Mat(n, m);
    for (int j = 0; j < m; ++j) {
        const std::vector<double> rotated = item_rotate(bids, j);
        mlp_forward(params.f2_spec, params.f2, rotated, cache.f2_cache[j]);
        for (int i = 0; i < n; ++i) cache.logits(i, j) = cache.f2_cache[j].out[i];
    }
    cache.assign = softmax_columns(cache.logits);

    cache.alloc = Mat(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) cache.alloc(i, j) = cache.f1_cache.out[j] * cache.assign(i, j);

    cache.pay_cache.resize(n);
    cache.welfare.assign(n, 0.0);
    cache.ptilde.assign(n, 0.0);
    cache.pay.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const std::vector<double> rotated = bidder_rotate(bids, i);
        mlp_forward(params.pay_spec, params.pay, rotated, cache.pay_cache[i]);
        cache.ptilde[i] = cache.pay_cache[i].out[0];
        double welf = 0.0;
        for (int j = 0; j < m; ++j) welf += bids(i, j) * cache.alloc(i, j);
        cache.welfare[i] = welf;
        cache.pay[i] = cache.ptilde[i] * welf;
    }
}

void auctioneer_backward(const AuctioneerParams& params, const AuctioneerCache& cache,
                         const Mat& d_alloc, std::span<const double> d_pay,
                         AuctioneerGrads* param_grads, Mat* bid_grads) {
    const int n = params.shape.bidders, m = params.shape.items;
    if (d_alloc.rows != n || d_alloc.cols != m || static_cast<int>(d_pay.size()) != n)
        throw std::invalid_argument("auctioneer_backward: upstream shape mismatch");
    if (cache.bids.rows != n || cache.bids.cols != m)
        throw std::invalid_argument("auctioneer_backward: stale cache");

    // p_i = ptilde_i * welfare_i, welfare_i = sum_j B_ij g_ij
    std::vector<double> d_ptilde(n), d_welf(n);
    for (int i = 0; i < n; ++i) {
        d_ptilde[i] = d_pay[i] * cache.welfare[i];
        d_welf[i] = d_pay[i] * cache.ptilde[i];
    }

    Mat d_g = d_alloc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            d_g(i, j) += d_welf[i] * cache.bids(i, j);
            if (bid_grads) (*bid_grads)(i, j) += d_welf[i] * cache.alloc(i, j);
        }

    // g_ij = f1_j * A_ij
    std::vector<double> d_f1(m, 0.0);
    Mat d_assign(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            d_f1[j] += d_g(i, j) * cache.assign(i, j);
            d_assign(i, j) = d_g(i, j) * cache.f1_cache.out[j];
        }

    // softmax columns: dL_ij = A_ij (dA_ij - sum_k A_kj dA_kj)
    Mat d_logits(n, m);
    for (int j = 0; j < m; ++j) {
        double inner = 0.0;
        for (int k = 0; k < n; ++k) inner += cache.assign(k, j) * d_assign(k, j);
        for (int i = 0; i < n; ++i)
            d_logits(i, j) = cache.assign(i, j) * (d_assign(i, j) - inner);
    }

    std::vector<double> scratch(static_cast<size_t>(n) * m);

    // payment head
    for (int i = 0; i < n; ++i) {
        if (d_ptilde[i] == 0.0) continue;
        const double up[1] = {d_ptilde[i]};
        if (bid_grads) {
            std::fill(scratch.begin(), scratch.end(), 0.0);
            mlp_backward(params.pay_spec, params.pay, cache.pay_cache[i], up,
                         param_grads ? &param_grads->pay : nullptr, scratch);
            bidder_rotate_scatter(*bid_grads, i, scratch);
        } else {
            mlp_backward(params.pay_spec, params.pay, cache.pay_cache[i], up,
                         param_grads ? &param_grads->pay : nullptr, {});
        }
    }

    // f1 head
    if (bid_grads) {
        std::fill(scratch.begin(), scratch.end(), 0.0);
        mlp_backward(params.f1_spec, params.f1, cache.f1_cache, d_f1,
                     param_grads ? &param_grads->f1 : nullptr, scratch);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) (*bid_grads)(i, j) += scratch[static_cast<size_t>(i) * m + j];
    } else {
        mlp_backward(params.f1_spec, params.f1, cache.f1_cache, d_f1,
                     param_grads ? &param_grads->f1 : nullptr, {});
    }

    // f2 head, one rotated pass per item
    std::vector<double> up_col(n);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) up_col[i] = d_logits(i, j);
        if (bid_grads) {
            std::fill(scratch.begin(), scratch.end(), 0.0);
            mlp_backward(params.f2_spec, params.f2, cache.f2_cache[j], up_col,
                         param_grads ? &param_grads->f2 : nullptr, scratch);
            item_rotate_scatter(*bid_grads, j, scratch);
        } else {
            mlp_backward(params.f2_spec, params.f2, cache.f2_cache[j], up_col,
                         param_grads ? &param_grads->f2 : nullptr, {});
        }
    }
}

AuctionOutcome NeuralMechanism::run(const ValuationProfile& bids) const {
    AuctioneerCache cache;
    auctioneer_forward(params_, bids, cache);
    return {std::move(cache.alloc), std::move(cache.pay)};
}

double NeuralMechanism::utility_and_bid_grad(int bidder, std::span<const double> true_values,
                                             const Mat& bids, std::span<double> grad_row) const {
    const int n = params_.shape.bidders, m = params_.shape.items;
    if (static_cast<int>(grad_row.size()) != m)
        throw std::invalid_argument("utility_and_bid_grad: grad_row length mismatch");
    AuctioneerCache cache;
    auctioneer_forward(params_, bids, cache);
    const double u = dot(cache.alloc.row(bidder), true_values) - cache.pay[bidder];

    Mat d_alloc(n, m);
    for (int j = 0; j < m; ++j) d_alloc(bidder, j) = true_values[j];
    std::vector<double> d_pay(n, 0.0);
    d_pay[bidder] = -1.0;

    Mat dB(n, m);
    auctioneer_backward(params_, cache, d_alloc, d_pay, nullptr, &dB);
    for (int j = 0; j < m; ++j) grad_row[j] = dB(bidder, j);
    return u;
}

void write_auctioneer(ByteWriter& w, const AuctioneerParams& params) {
    w.u32(static_cast<uint32_t>(params.shape.bidders));
    w.u32(static_cast<uint32_t>(params.shape.items));
    write_mlp(w, params.f1_spec, params.f1);
    write_mlp(w, params.f2_spec, params.f2);
    write_mlp(w, params.pay_spec, params.pay);
}

AuctioneerParams read_auctioneer(ByteReader& r) {
    AuctioneerParams p;
    p.shape.bidders = static_cast<int>(r.u32());
    p.shape.items = static_cast<int>(r.u32());
    p.shape.validate();
    p.f1_spec = read_mlp_spec(r);
    p.f1 = read_mlp(r, p.f1_spec);
    p.f2_spec = read_mlp_spec(r);
    p.f2 = read_mlp(r, p.f2_spec);
    p.pay_spec = read_mlp_spec(r);
    p.pay = read_mlp(r, p.pay_spec);
    return p;
}

void save_auctioneer(const std::filesystem::path& path, const AuctioneerParams& params) {
    ByteWriter w;
    write_header(w, CheckpointKind::auctioneer);
    write_auctioneer(w, params);
    save_bytes(path, w.data());
}

AuctioneerParams load_auctioneer(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = load_bytes(path);
    ByteReader r(bytes);
    if (read_header(r) != CheckpointKind::auctioneer)
        throw SerializeError("not an auctioneer checkpoint");
    AuctioneerParams p = read_auctioneer(r);
    r.expect_end();
    return p;
}

}  // namespace alab
