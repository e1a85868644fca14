#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "alab/auction.hpp"
#include "alab/nn.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Neural auctioneer: three tanh MLPs.
//   f1   : flat bid matrix -> per-item allocation probability (sigmoid, dim m)
//   f2   : item-rotated bids -> per-bidder logits (dim n), softmax over
//          bidders per item gives the conditional assignment
//   pay  : bidder-rotated bids -> fraction of reported welfare charged
//          (sigmoid, dim 1)
// g_ij = f1_j * softmax_j(i); p_i = ptilde_i * sum_j B_ij g_ij. Feasible and
// IR at truthful bids by construction.
// ---------------------------------------------------------------------------

struct AuctioneerSizes {
    int alloc_layers = 2;
    int alloc_width = 50;
    int pay_layers = 2;
    int pay_width = 50;
};

struct AuctioneerParams {
    AuctionShape shape;
    MlpSpec f1_spec, f2_spec, pay_spec;
    MlpParams f1, f2, pay;

    static AuctioneerParams init(const AuctionShape& shape, const AuctioneerSizes& sizes,
                                 uint64_t seed);
    bool operator==(const AuctioneerParams&) const = default;
};

struct AuctioneerGrads {
    MlpParams f1, f2, pay;
    void set_zero();
    void scale(double s);
    bool finite() const;
};

AuctioneerGrads auctioneer_zero_grads(const AuctioneerParams& p);

// Flatten with bidder i's row first (remaining rows in original order).
std::vector<double> bidder_rotate(const Mat& B, int i);
// Flatten with item j's column first (remaining columns in original order).
std::vector<double> item_rotate(const Mat& B, int j);

struct AuctioneerCache {
    Mat bids;
    MlpCache f1_cache;
    std::vector<MlpCache> f2_cache;   // one per item
    std::vector<MlpCache> pay_cache;  // one per bidder
    Mat logits;                       // n x m, columns from f2
    Mat assign;                       // softmax_columns(logits)
    Mat alloc;                        // g
    std::vector<double> welfare;      // reported welfare per bidder
    std::vector<double> ptilde;
    std::vector<double> pay;
};

void auctioneer_forward(const AuctioneerParams& params, const Mat& bids, AuctioneerCache& cache);

// Reverse pass for the scalar <d_alloc, g> + <d_pay, p>. Accumulates into
// param_grads and/or bid_grads (either may be null).
void auctioneer_backward(const AuctioneerParams& params, const AuctioneerCache& cache,
                         const Mat& d_alloc, std::span<const double> d_pay,
                         AuctioneerGrads* param_grads, Mat* bid_grads);

// Mechanism view over frozen parameters.
class NeuralMechanism final : public Mechanism {
public:
    explicit NeuralMechanism(AuctioneerParams params) : params_(std::move(params)) {}
    AuctionShape shape() const override { return params_.shape; }
    AuctionOutcome run(const ValuationProfile& bids) const override;

    // u_i(true_values, bids) and its gradient with respect to bidder i's bid
    // row. grad_row must have length m.
    double utility_and_bid_grad(int bidder, std::span<const double> true_values, const Mat& bids,
                                std::span<double> grad_row) const;

    const AuctioneerParams& params() const { return params_; }

private:
    AuctioneerParams params_;
};

void save_auctioneer(const std::filesystem::path& path, const AuctioneerParams& params);
AuctioneerParams load_auctioneer(const std::filesystem::path& path);

class ByteWriter;
class ByteReader;
void write_auctioneer(ByteWriter& w, const AuctioneerParams& params);
AuctioneerParams read_auctioneer(ByteReader& r);

}  // namespace alab
