#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "alab/auction.hpp"
#include "alab/oracles.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Constructive single-bidder truthification: extract the mechanism's menu,
// discount every price by (1 - eps), and let the buyer re-choose. The
// resulting menu mechanism is exactly truthful (taxation principle) and its
// revenue is certified against (sqrt(P) - sqrt(R))^2.
// ---------------------------------------------------------------------------

struct MenuEntry {
    std::vector<double> alloc;  // in [0,1]^m
    double price = 0.0;
};

struct Menu {
    int items = 0;
    std::vector<MenuEntry> entries;  // entry 0 is always the null option

    void validate() const;
};

// Menu induced by a single-bidder mechanism on a lattice over the valuation
// domain: {(g(v), p(v)) : v in grid} plus the null option. Near-duplicate
// entries (allocations within 1e-9) are merged keeping the lower price.
Menu extract_menu(const Mechanism& mech, const ProductDistribution& dist, int points_per_dim,
                  double t = 0.0);

// Every price multiplied by (1 - eps); allocations unchanged.
Menu discount_menu(const Menu& menu, double eps);

// Buyer picks the utility-maximizing entry (ties: lower price, then lower
// index). Exactly zero regret against its own menu, IR via the null entry.
class MenuMechanism final : public Mechanism {
public:
    explicit MenuMechanism(Menu menu);
    AuctionShape shape() const override { return {1, menu_.items}; }
    AuctionOutcome run(const ValuationProfile& bids) const override;
    int choose(std::span<const double> values) const;
    const Menu& menu() const { return menu_; }

private:
    Menu menu_;
};

struct TruthifyResult {
    Menu menu;                    // discounted menu realizing the output mechanism
    double epsilon = 0.0;         // sqrt(R/P) measured on the test set
    MetricsRecord input_metrics;  // grid-oracle (P, R) of the input mechanism
    MetricsRecord output_metrics; // same test set; regret is exactly zero
};

// Measure (P, R) of mech with the grid oracle, build the discounted menu
// mechanism at eps* = sqrt(R/P), and re-measure on the same test set.
TruthifyResult truthify(const Mechanism& mech, const ProductDistribution& dist, int test_profiles,
                        int grid_points, uint64_t seed);

// One row per entry: m allocation columns then the price.
void write_menu_csv(const std::filesystem::path& path, const Menu& menu);
Menu read_menu_csv(const std::filesystem::path& path);

}  // namespace alab
