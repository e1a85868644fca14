#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alab/io.hpp"
#include "alab/nn.hpp"
#include "alab/rng.hpp"

using namespace alab;

namespace {

double mlp_scalar(const MlpSpec& spec, const MlpParams& params, std::span<const double> x,
                  std::span<const double> weights_on_out) {
    MlpCache cache;
    mlp_forward(spec, params, x, cache);
    double s = 0.0;
    for (int i = 0; i < spec.output_dim; ++i) s += weights_on_out[i] * cache.out[i];
    return s;
}

std::vector<double> flatten(const MlpParams& p) {
    std::vector<double> flat;
    for (size_t k = 0; k < p.w.size(); ++k) {
        flat.insert(flat.end(), p.w[k].a.begin(), p.w[k].a.end());
        flat.insert(flat.end(), p.b[k].begin(), p.b[k].end());
    }
    return flat;
}

void unflatten(std::span<const double> flat, MlpParams& p) {
    size_t pos = 0;
    for (size_t k = 0; k < p.w.size(); ++k) {
        for (double& x : p.w[k].a) x = flat[pos++];
        for (double& x : p.b[k]) x = flat[pos++];
    }
}

}  // namespace

TEST_CASE("mlp_init is deterministic and bias-free") {
    const MlpSpec spec{2, 1, 4, 1, OutputActivation::identity};
    const MlpParams a = mlp_init(spec, 7);
    const MlpParams b = mlp_init(spec, 7);
    CHECK(a == b);
    const MlpParams c = mlp_init(spec, 8);
    CHECK_FALSE(a == c);
    for (const auto& bias : a.b)
        for (double x : bias) CHECK(x == 0.0);
}

TEST_CASE("mlp_init respects the fan bound") {
    const MlpSpec spec{2, 1, 4, 1, OutputActivation::identity};
    const MlpParams p = mlp_init(spec, 123);
    for (int k = 0; k < spec.layer_count(); ++k) {
        const double bound = std::sqrt(6.0 / (spec.layer_in(k) + spec.layer_out(k)));
        for (double x : p.w[k].a) CHECK(std::abs(x) <= bound);
    }
}

TEST_CASE("forward with zero weights hits the activation fixed points") {
    MlpSpec spec{3, 2, 8, 4, OutputActivation::sigmoid};
    MlpParams zeros = mlp_zeros(spec);
    MlpCache cache;
    const std::vector<double> x{0.3, -1.0, 2.0};
    mlp_forward(spec, zeros, x, cache);
    for (double y : cache.out) CHECK(y == doctest::Approx(0.5).epsilon(1e-15));

    spec.output_activation = OutputActivation::softplus;
    mlp_forward(spec, zeros, x, cache);
    for (double y : cache.out) CHECK(y == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    spec.output_activation = OutputActivation::scaled_sigmoid;
    spec.lo = 4.0;
    spec.hi = 16.0;
    mlp_forward(spec, zeros, x, cache);
    for (double y : cache.out) {
        CHECK(y > 4.0);
        CHECK(y < 16.0);
        CHECK(y == doctest::Approx(10.0));  // midpoint at zero logits
    }
}

TEST_CASE("scaled_sigmoid output stays strictly inside (lo, hi)") {
    MlpSpec spec{2, 1, 6, 3, OutputActivation::scaled_sigmoid};
    spec.lo = 4.0;
    spec.hi = 16.0;
    const MlpParams p = mlp_init(spec, 99);
    MlpCache cache;
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<double> x{rng.uniform(-20, 20), rng.uniform(-20, 20)};
        mlp_forward(spec, p, x, cache);
        for (double y : cache.out) {
            CHECK(y > 4.0);
            CHECK(y < 16.0);
        }
    }
}

TEST_CASE("single linear layer backward: input grad is the selected weight row") {
    // hidden layer is present by construction, so emulate with identity path:
    // use tiny weights on the hidden layer? Simpler: direct check on a 1-hidden
    // net against finite differences is below; here check the strict linear
    // case via a hand-built two-layer net with identity-like hidden weights.
    MlpSpec spec{3, 1, 3, 2, OutputActivation::identity};
    MlpParams p = mlp_zeros(spec);
    // hidden: y = tanh(eps * x) ~ eps * x for tiny eps; output reads it back
    const double eps = 1e-6;
    for (int i = 0; i < 3; ++i) p.w[0](i, i) = eps;
    p.w[1](0, 0) = 1.0 / eps;
    p.w[1](1, 1) = 2.0 / eps;
    MlpCache cache;
    mlp_forward(spec, p, std::vector<double>{0.2, -0.4, 0.1}, cache);
    std::vector<double> input_grad(3, 0.0);
    mlp_backward(spec, p, cache, std::vector<double>{1.0, 0.0}, nullptr, input_grad);
    CHECK(input_grad[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(input_grad[1] == doctest::Approx(0.0));
    CHECK(input_grad[2] == doctest::Approx(0.0));
}

TEST_CASE("zero upstream gives zero grads") {
    const MlpSpec spec{2, 2, 5, 3, OutputActivation::sigmoid};
    const MlpParams p = mlp_init(spec, 11);
    MlpCache cache;
    mlp_forward(spec, p, std::vector<double>{0.5, 0.7}, cache);
    MlpParams grads = mlp_zeros(spec);
    std::vector<double> input_grad(2, 0.0);
    mlp_backward(spec, p, cache, std::vector<double>{0.0, 0.0, 0.0}, &grads, input_grad);
    for (double g : flatten(grads)) CHECK(g == 0.0);
    for (double g : input_grad) CHECK(g == 0.0);
}

TEST_CASE("backward matches finite differences on inputs and parameters") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (OutputActivation act : {OutputActivation::identity, OutputActivation::sigmoid,
                                     OutputActivation::softplus, OutputActivation::scaled_sigmoid}) {
            MlpSpec spec{4, 2, 6, 3, act};
            if (act == OutputActivation::scaled_sigmoid) {
                spec.lo = -1.0;
                spec.hi = 2.0;
            }
            const MlpParams p = mlp_init(spec, seed);
            Rng rng(seed * 77 + 1);
            std::vector<double> x(4), up(3);
            for (double& v : x) v = rng.uniform(-1, 1);
            for (double& v : up) v = rng.uniform(-1, 1);

            MlpCache cache;
            mlp_forward(spec, p, x, cache);
            MlpParams grads = mlp_zeros(spec);
            std::vector<double> input_grad(4, 0.0);
            mlp_backward(spec, p, cache, up, &grads, input_grad);

            // input gradient
            const double in_err = grad_check(
                [&](std::span<const double> q) { return mlp_scalar(spec, p, q, up); }, x,
                input_grad, 1e-5);
            CHECK(in_err <= 1e-4);

            // parameter gradient
            const std::vector<double> theta = flatten(p);
            MlpParams scratch = p;
            const double par_err = grad_check(
                [&](std::span<const double> q) {
                    unflatten(q, scratch);
                    return mlp_scalar(spec, scratch, x, up);
                },
                theta, flatten(grads), 1e-5);
            CHECK(par_err <= 1e-4);
        }
    }
}

TEST_CASE("activation derivatives match central differences") {
    struct Case {
        double (*f)(double);
        double (*df)(double);
    };
    const Case cases[] = {
        {[](double x) { return std::tanh(x); },
         [](double x) { const double y = std::tanh(x); return 1.0 - y * y; }},
        {[](double x) { return sigmoid(x); },
         [](double x) { const double s = sigmoid(x); return s * (1.0 - s); }},
        {[](double x) { return softplus(x); }, [](double x) { return sigmoid(x); }},
    };
    Rng rng(42);
    for (const auto& c : cases) {
        for (int i = 0; i < 1000; ++i) {
            const double x = rng.uniform(-5, 5);
            const double h = 1e-6;
            const double central = (c.f(x + h) - c.f(x - h)) / (2 * h);
            const double rel = std::abs(c.df(x) - central) / std::max(1.0, std::abs(c.df(x)));
            CHECK(rel <= 1e-6);
        }
    }
}

TEST_CASE("softmax_columns basics") {
    SUBCASE("single row is all ones") {
        Mat l(1, 3);
        l(0, 0) = -4.0;
        l(0, 1) = 0.0;
        l(0, 2) = 17.0;
        const Mat s = softmax_columns(l);
        for (int j = 0; j < 3; ++j) CHECK(s(0, j) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("symmetric column splits evenly") {
        Mat l(2, 1);
        l(0, 0) = 0.0;
        l(1, 0) = 0.0;
        const Mat s = softmax_columns(l);
        CHECK(s(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(s(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("log-ratio column") {
        Mat l(2, 1);
        l(0, 0) = std::log(1.0);
        l(1, 0) = std::log(3.0);
        const Mat s = softmax_columns(l);
        CHECK(s(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(s(1, 0) == doctest::Approx(0.75).epsilon(1e-12));
    }
}

TEST_CASE("softmax_columns: columns sum to one, shift invariant") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Mat l(4, 3);
        for (double& v : l.a) v = rng.uniform(-15, 15);
        const Mat s = softmax_columns(l);
        for (int j = 0; j < 3; ++j) {
            double sum = 0.0;
            for (int i = 0; i < 4; ++i) {
                CHECK(s(i, j) > 0.0);
                CHECK(s(i, j) < 1.0);
                sum += s(i, j);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
        Mat shifted = l;
        const double c = rng.uniform(-100, 100);
        for (int i = 0; i < 4; ++i) shifted(i, 1) += c;
        const Mat s2 = softmax_columns(shifted);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(s2(i, 1) - s(i, 1)) <= 1e-12);
    }
}

TEST_CASE("adamw: zero grads and zero decay leave params unchanged") {
    const MlpSpec spec{2, 1, 4, 2, OutputActivation::identity};
    MlpParams p = mlp_init(spec, 5);
    const MlpParams before = p;
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    AdamWState st = adamw_init(spec, cfg);
    const MlpParams zero_grads = mlp_zeros(spec);
    CHECK(adamw_step(st, p, zero_grads));
    CHECK(p == before);
    CHECK(st.step == 1);
}

TEST_CASE("adamw: first step moves against the gradient sign") {
    const MlpSpec spec{1, 1, 2, 1, OutputActivation::identity};
    MlpParams p = mlp_zeros(spec);
    AdamWConfig cfg;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    AdamWState st = adamw_init(spec, cfg);
    MlpParams g = mlp_zeros(spec);
    g.w[0](0, 0) = 3.7;
    g.w[0](1, 0) = -0.2;
    CHECK(adamw_step(st, p, g));
    // at t=1 the bias-corrected update is -lr * g/(|g| + eps')
    CHECK(p.w[0](0, 0) == doctest::Approx(-cfg.lr).epsilon(1e-6));
    CHECK(p.w[0](1, 0) == doctest::Approx(cfg.lr).epsilon(1e-6));
}

TEST_CASE("adamw: decoupled decay shrinks params by (1 - lr*wd)") {
    const MlpSpec spec{2, 1, 3, 1, OutputActivation::identity};
    MlpParams p = mlp_init(spec, 21);
    const MlpParams before = p;
    AdamWConfig cfg;
    cfg.lr = 0.5;
    cfg.weight_decay = 0.1;
    AdamWState st = adamw_init(spec, cfg);
    CHECK(adamw_step(st, p, mlp_zeros(spec)));
    for (size_t k = 0; k < p.w.size(); ++k)
        for (size_t i = 0; i < p.w[k].a.size(); ++i)
            CHECK(p.w[k].a[i] ==
                  doctest::Approx(before.w[k].a[i] * (1.0 - cfg.lr * cfg.weight_decay))
                      .epsilon(1e-12));
}

TEST_CASE("adamw rejects non-finite gradients untouched") {
    const MlpSpec spec{2, 1, 3, 1, OutputActivation::identity};
    MlpParams p = mlp_init(spec, 2);
    const MlpParams before = p;
    AdamWState st = adamw_init(spec, {});
    MlpParams g = mlp_zeros(spec);
    g.w[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(adamw_step(st, p, g));
    CHECK(p == before);
    CHECK(st.step == 0);
}

TEST_CASE("grad_check on closed forms") {
    SUBCASE("quadratic") {
        const std::vector<double> x{3.0};
        const std::vector<double> g{6.0};
        const double err =
            grad_check([](std::span<const double> q) { return q[0] * q[0]; }, x, g, 1e-5);
        CHECK(err <= 1e-8);
    }
    SUBCASE("tanh at zero") {
        const std::vector<double> x{0.0};
        const std::vector<double> g{1.0};
        const double err =
            grad_check([](std::span<const double> q) { return std::tanh(q[0]); }, x, g, 1e-5);
        CHECK(err <= 1e-8);
    }
}

TEST_CASE("checkpoint round trip is bitwise") {
    MlpSpec spec{3, 2, 7, 2, OutputActivation::scaled_sigmoid};
    spec.lo = 4.0;
    spec.hi = 7.0;
    const MlpParams p = mlp_init(spec, 31337);
    ByteWriter w;
    write_header(w, CheckpointKind::auctioneer);
    write_mlp(w, spec, p);

    ByteReader r(w.data());
    CHECK(read_header(r) == CheckpointKind::auctioneer);
    const MlpSpec spec2 = read_mlp_spec(r);
    CHECK(spec2 == spec);
    const MlpParams p2 = read_mlp(r, spec2);
    CHECK(p2 == p);
    r.expect_end();
}

TEST_CASE("checkpoint error paths") {
    MlpSpec spec{2, 1, 3, 1, OutputActivation::identity};
    const MlpParams p = mlp_init(spec, 1);
    ByteWriter w;
    write_header(w, CheckpointKind::misreporter);
    write_mlp(w, spec, p);

    SUBCASE("truncated stream") {
        std::vector<uint8_t> cut(w.data().begin(), w.data().end() - 5);
        ByteReader r(cut);
        read_header(r);
        read_mlp_spec(r);
        CHECK_THROWS_AS(read_mlp(r, spec), SerializeError);
    }
    SUBCASE("bad magic") {
        std::vector<uint8_t> bad = w.data();
        bad[0] = 'X';
        ByteReader r(bad);
        CHECK_THROWS_AS(read_header(r), SerializeError);
    }
    SUBCASE("version mismatch") {
        std::vector<uint8_t> bad = w.data();
        bad[4] = 0xFF;
        ByteReader r(bad);
        CHECK_THROWS_AS(read_header(r), SerializeError);
    }
    SUBCASE("trailing bytes") {
        ByteWriter w2;
        write_header(w2, CheckpointKind::auctioneer);
        write_mlp(w2, spec, p);
        auto padded = w2.data();
        padded.push_back(0);
        ByteReader r(padded);
        read_header(r);
        const MlpSpec s = read_mlp_spec(r);
        read_mlp(r, s);
        CHECK_THROWS_AS(r.expect_end(), SerializeError);
    }
}

TEST_CASE("spec validation") {
    MlpSpec bad{0, 1, 4, 1, OutputActivation::identity};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    MlpSpec bad2{2, 1, 4, 1, OutputActivation::scaled_sigmoid};
    bad2.lo = 2.0;
    bad2.hi = 1.0;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}
