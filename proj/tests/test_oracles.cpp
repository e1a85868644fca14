#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alab/misreporter.hpp"
#include "alab/oracles.hpp"

using namespace alab;

namespace {

ProductDistribution uniform_dist(int n, int m) {
    ProductDistribution d;
    d.shape = {n, m};
    d.marginals.assign(m, MarginalDistribution::uniform(0.0, 1.0));
    return d;
}

}  // namespace

TEST_CASE("ascent with zero steps from the truthful point reports zero regret") {
    const NeuralMechanism mech(AuctioneerParams::init({1, 2}, {2, 8, 2, 8}, 3));
    const ProductDistribution d = uniform_dist(1, 2);
    Mat v(1, 2);
    v(0, 0) = 0.4;
    v(0, 1) = 0.9;
    AscentOptions opt;
    opt.restarts = 1;
    opt.steps = 0;
    const RegretResult r = regret_gradient_ascent(mech, d, v, 0, opt, 5);
    CHECK(r.regret == 0.0);
}

TEST_CASE("ascent agrees with the grid oracle on random two-item mechanisms") {
    const ProductDistribution d = uniform_dist(1, 2);
    AscentOptions opt;  // defaults: 10 restarts x 200 steps
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        const NeuralMechanism mech(AuctioneerParams::init({1, 2}, {1, 8, 1, 8}, seed));
        Rng rng = derive_rng(seed, "profile");
        const Mat v = sample_profile(d, 0.0, rng);
        const double grid = regret_grid(mech, d, v, 0, 101).regret;
        const double ascent = regret_gradient_ascent(mech, d, v, 0, opt, seed * 31).regret;
        worst = std::max(worst, std::abs(grid - ascent));
        CHECK(std::abs(grid - ascent) <= 1e-3);
        CHECK(ascent >= 0.0);
    }
    MESSAGE("worst |grid - ascent| disagreement: ", worst);
}

TEST_CASE("ascent is deterministic in its seed") {
    const NeuralMechanism mech(AuctioneerParams::init({2, 2}, {2, 10, 2, 10}, 77));
    const ProductDistribution d = uniform_dist(2, 2);
    Rng rng(12);
    const Mat v = sample_profile(d, 0.0, rng);
    AscentOptions opt;
    opt.restarts = 3;
    opt.steps = 50;
    const RegretResult a = regret_gradient_ascent(mech, d, v, 1, opt, 99);
    const RegretResult b = regret_gradient_ascent(mech, d, v, 1, opt, 99);
    CHECK(a.regret == b.regret);
    CHECK(a.misreport == b.misreport);
}

TEST_CASE("misreporter regret never exceeds a fine grid oracle") {
    const ProductDistribution d = uniform_dist(1, 2);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const AuctioneerParams auct = AuctioneerParams::init({1, 2}, {1, 8, 1, 8}, seed);
        const NeuralMechanism mech(auct);
        const MisreporterParams mis = MisreporterParams::init(
            {1, 2}, {1, 8}, ProjectionSpec::for_distribution(d), seed + 1000);
        Rng rng = derive_rng(seed, "profile2");
        const Mat v = sample_profile(d, 0.0, rng);
        const double from_net = regret_from_misreporter(mech, mis, v, 0);
        const double grid = regret_grid(mech, d, v, 0, 201).regret;
        CHECK(from_net <= grid + 1e-6);
    }
}

TEST_CASE("empirical metrics with the ascent estimator is reproducible") {
    const NeuralMechanism mech(AuctioneerParams::init({1, 2}, {2, 10, 2, 10}, 5));
    const ProductDistribution d = uniform_dist(1, 2);
    EstimatorSpec est;
    est.kind = RegretEstimatorKind::gradient_ascent;
    est.ascent.restarts = 3;
    est.ascent.steps = 40;
    const MetricsRecord a = empirical_metrics(mech, d, 100, est, 8);
    const MetricsRecord b = empirical_metrics(mech, d, 100, est, 8);
    CHECK(a.rev == b.rev);
    CHECK(a.rgt == b.rgt);
}
