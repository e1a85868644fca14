#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "alab/mat.hpp"

namespace alab {

// ---------------------------------------------------------------------------
// Dense MLP: tanh hidden layers, configurable output activation, 64-bit
// floats throughout. This is the whole zoo of architectures used here; no
// graphs, no convolutions.
// ---------------------------------------------------------------------------

enum class OutputActivation : uint32_t {
    identity = 0,
    sigmoid = 1,
    softplus = 2,
    scaled_sigmoid = 3,  // lo + (hi-lo)*sigmoid(x)
};

struct MlpSpec {
    int input_dim = 1;
    int hidden_layers = 1;  // number of tanh layers, >= 1
    int hidden_width = 1;
    int output_dim = 1;
    OutputActivation output_activation = OutputActivation::identity;
    double lo = 0.0;  // scaled_sigmoid range; ignored otherwise
    double hi = 1.0;

    void validate() const;
    int layer_count() const { return hidden_layers + 1; }
    int layer_in(int k) const { return k == 0 ? input_dim : hidden_width; }
    int layer_out(int k) const { return k == hidden_layers ? output_dim : hidden_width; }
    size_t param_count() const;

    bool operator==(const MlpSpec&) const = default;
};

// Per-layer weight matrices (out x in, row-major) and bias vectors. Also used
// as the shaped container for gradients and optimizer moments.
struct MlpParams {
    std::vector<Mat> w;
    std::vector<std::vector<double>> b;

    void set_zero();
    void scale(double s);
    void axpy(double s, const MlpParams& other);  // this += s * other
    size_t count() const;
    bool finite() const;

    bool operator==(const MlpParams&) const = default;
};

MlpParams mlp_zeros(const MlpSpec& spec);

// Fan-based symmetric uniform init (tanh-friendly), zero biases.
// Deterministic in (spec, seed).
MlpParams mlp_init(const MlpSpec& spec, uint64_t seed);

// Activation record for one forward pass.
struct MlpCache {
    std::vector<std::vector<double>> act;  // act[0] = input; act[k] = layer k output, k in 1..L
    std::vector<double> out_pre;           // output-layer pre-activation
    std::vector<double> out;               // activated output
};

void mlp_forward(const MlpSpec& spec, const MlpParams& params, std::span<const double> input,
                 MlpCache& cache);

// Reverse pass for the scalar <upstream, out>. Accumulates (+=) into the
// destinations; pass nullptr for whichever gradient is not needed.
// input_grad must be zero-initialized to input_dim by the caller.
void mlp_backward(const MlpSpec& spec, const MlpParams& params, const MlpCache& cache,
                  std::span<const double> upstream, MlpParams* param_grads,
                  std::span<double> input_grad);

// Column-wise softmax of an n x m matrix (softmax over the n entries of each
// column), max-subtracted for overflow safety.
Mat softmax_columns(const Mat& logits);

// ---------------------------------------------------------------------------
// Scalar activations (exposed for direct testing).
// ---------------------------------------------------------------------------
double sigmoid(double x);
double softplus(double x);
double tanh_act(double x);

// ---------------------------------------------------------------------------
// AdamW
// ---------------------------------------------------------------------------

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

struct AdamWState {
    AdamWConfig cfg;
    MlpParams m;  // first moments
    MlpParams v;  // second moments
    uint64_t step = 0;
};

AdamWState adamw_init(const MlpSpec& spec, const AdamWConfig& cfg);

// One decoupled-weight-decay update. Returns false (and leaves params and
// state untouched) if grads contain non-finite entries.
bool adamw_step(AdamWState& state, MlpParams& params, const MlpParams& grads);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.
// Returns max_k |analytic_k - central_k| / max(1, |analytic_k|).
// ---------------------------------------------------------------------------
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> point, std::span<const double> analytic_grad,
                  double step);

}  // namespace alab
