#include "alab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alab/rng.hpp"

namespace alab {

void MlpSpec::validate() const {
    if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1 || output_dim < 1)
        throw std::invalid_argument("MlpSpec: all dimensions must be >= 1");
    if (output_activation == OutputActivation::scaled_sigmoid && !(lo < hi))
        throw std::invalid_argument("MlpSpec: scaled_sigmoid requires lo < hi");
}

size_t MlpSpec::param_count() const {
    size_t n = 0;
    for (int k = 0; k < layer_count(); ++k)
        n += static_cast<size_t>(layer_out(k)) * layer_in(k) + layer_out(k);
    return n;
}

void MlpParams::set_zero() {
    for (auto& m : w) std::fill(m.a.begin(), m.a.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void MlpParams::scale(double s) {
    for (auto& m : w)
        for (double& x : m.a) x *= s;
    for (auto& v : b)
        for (double& x : v) x *= s;
}

void MlpParams::axpy(double s, const MlpParams& o) {
    for (size_t k = 0; k < w.size(); ++k) {
        for (size_t i = 0; i < w[k].a.size(); ++i) w[k].a[i] += s * o.w[k].a[i];
        for (size_t i = 0; i < b[k].size(); ++i) b[k][i] += s * o.b[k][i];
    }
}

size_t MlpParams::count() const {
    size_t n = 0;
    for (const auto& m : w) n += m.a.size();
    for (const auto& v : b) n += v.size();
    return n;
}

bool MlpParams::finite() const {
    for (const auto& m : w)
        if (!all_finite(m)) return false;
    for (const auto& v : b)
        if (!all_finite(std::span<const double>(v))) return false;
    return true;
}

MlpParams mlp_zeros(const MlpSpec& spec) {
    spec.validate();
    MlpParams p;
    for (int k = 0; k < spec.layer_count(); ++k) {
        p.w.emplace_back(spec.layer_out(k), spec.layer_in(k));
        p.b.emplace_back(spec.layer_out(k), 0.0);
    }
    return p;
}

MlpParams mlp_init(const MlpSpec& spec, uint64_t seed) {
    MlpParams p = mlp_zeros(spec);
    Rng rng = derive_rng(seed, "mlp_init");
    for (int k = 0; k < spec.layer_count(); ++k) {
        const double bound = std::sqrt(6.0 / (spec.layer_in(k) + spec.layer_out(k)));
        for (double& x : p.w[k].a) x = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return p;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    // log(1+e^x), stable on both tails
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double tanh_act(double x) { return std::tanh(x); }

namespace {

double apply_output_act(const MlpSpec& spec, double z) {
    switch (spec.output_activation) {
        case OutputActivation::identity: return z;
        case OutputActivation::sigmoid: return sigmoid(z);
        case OutputActivation::softplus: return softplus(z);
        case OutputActivation::scaled_sigmoid: return spec.lo + (spec.hi - spec.lo) * sigmoid(z);
    }
    return z;
}

// d out / d pre, given pre-activation z and activated value y.
double output_act_deriv(const MlpSpec& spec, double z, double y) {
    switch (spec.output_activation) {
        case OutputActivation::identity: return 1.0;
        case OutputActivation::sigmoid: return y * (1.0 - y);
        case OutputActivation::softplus: return sigmoid(z);
        case OutputActivation::scaled_sigmoid: {
            const double s = (y - spec.lo) / (spec.hi - spec.lo);
            return (spec.hi - spec.lo) * s * (1.0 - s);
        }
    }
    return 1.0;
}

void affine(const Mat& w, const std::vector<double>& b, std::span<const double> x,
            std::vector<double>& out) {
    out.assign(b.begin(), b.end());
    for (int r = 0; r < w.rows; ++r) {
        const double* wr = w.a.data() + static_cast<size_t>(r) * w.cols;
        double s = out[r];
        for (int c = 0; c < w.cols; ++c) s += wr[c] * x[c];
        out[r] = s;
    }
}

}  // namespace

void mlp_forward(const MlpSpec& spec, const MlpParams& params, std::span<const double> input,
                 MlpCache& cache) {
    if (static_cast<int>(input.size()) != spec.input_dim)
        throw std::invalid_argument("mlp_forward: input length != input_dim");
    const int L = spec.layer_count();
    cache.act.resize(L);  // act[0]=input copy, act[1..L-1] = hidden outputs
    cache.act[0].assign(input.begin(), input.end());
    for (int k = 0; k < spec.hidden_layers; ++k) {
        std::vector<double>& out = cache.act[k + 1];
        affine(params.w[k], params.b[k], cache.act[k], out);
        for (double& z : out) z = std::tanh(z);
    }
    affine(params.w[L - 1], params.b[L - 1], cache.act[L - 1], cache.out_pre);
    cache.out.resize(spec.output_dim);
    for (int i = 0; i < spec.output_dim; ++i) cache.out[i] = apply_output_act(spec, cache.out_pre[i]);
}

void mlp_backward(const MlpSpec& spec, const MlpParams& params, const MlpCache& cache,
                  std::span<const double> upstream, MlpParams* param_grads,
                  std::span<double> input_grad) {
    const int L = spec.layer_count();
    if (static_cast<int>(upstream.size()) != spec.output_dim)
        throw std::invalid_argument("mlp_backward: upstream length != output_dim");
    if (static_cast<int>(cache.act.size()) != L ||
        static_cast<int>(cache.act[0].size()) != spec.input_dim)
        throw std::invalid_argument("mlp_backward: cache does not match spec");

    // delta at the output layer's pre-activation
    std::vector<double> delta(spec.output_dim);
    for (int i = 0; i < spec.output_dim; ++i)
        delta[i] = upstream[i] * output_act_deriv(spec, cache.out_pre[i], cache.out[i]);

    std::vector<double> next_delta;
    for (int k = L - 1; k >= 0; --k) {
        const Mat& w = params.w[k];
        const std::vector<double>& x = cache.act[k];
        if (param_grads) {
            Mat& gw = param_grads->w[k];
            std::vector<double>& gb = param_grads->b[k];
            for (int r = 0; r < w.rows; ++r) {
                double* gr = gw.a.data() + static_cast<size_t>(r) * gw.cols;
                const double d = delta[r];
                for (int c = 0; c < w.cols; ++c) gr[c] += d * x[c];
                gb[r] += d;
            }
        }
        // propagate to previous layer (or to the input)
        if (k > 0) {
            next_delta.assign(w.cols, 0.0);
            for (int r = 0; r < w.rows; ++r) {
                const double* wr = w.a.data() + static_cast<size_t>(r) * w.cols;
                const double d = delta[r];
                for (int c = 0; c < w.cols; ++c) next_delta[c] += wr[c] * d;
            }
            // through tanh: act[k] holds tanh outputs
            for (int c = 0; c < w.cols; ++c) {
                const double y = cache.act[k][c];
                next_delta[c] *= (1.0 - y * y);
            }
            delta.swap(next_delta);
        } else if (!input_grad.empty()) {
            for (int r = 0; r < w.rows; ++r) {
                const double* wr = w.a.data() + static_cast<size_t>(r) * w.cols;
                const double d = delta[r];
                for (int c = 0; c < w.cols; ++c) input_grad[c] += wr[c] * d;
            }
        }
    }
}

Mat softmax_columns(const Mat& logits) {
    Mat out(logits.rows, logits.cols);
    for (int j = 0; j < logits.cols; ++j) {
        double mx = logits(0, j);
        for (int i = 1; i < logits.rows; ++i) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (int i = 0; i < logits.rows; ++i) {
            const double e = std::exp(logits(i, j) - mx);
            out(i, j) = e;
            sum += e;
        }
        for (int i = 0; i < logits.rows; ++i) out(i, j) /= sum;
    }
    return out;
}

AdamWState adamw_init(const MlpSpec& spec, const AdamWConfig& cfg) {
    AdamWState s;
    s.cfg = cfg;
    s.m = mlp_zeros(spec);
    s.v = mlp_zeros(spec);
    return s;
}

bool adamw_step(AdamWState& state, MlpParams& params, const MlpParams& grads) {
    if (!grads.finite()) return false;
    state.step += 1;
    const AdamWConfig& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < params.w.size(); ++k) {
        auto update = [&](double& p, double& m, double& v, double g) {
            m = c.beta1 * m + (1.0 - c.beta1) * g;
            v = c.beta2 * v + (1.0 - c.beta2) * g * g;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p -= c.lr * c.weight_decay * p;  // decoupled decay
            p -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        };
        for (size_t i = 0; i < params.w[k].a.size(); ++i)
            update(params.w[k].a[i], state.m.w[k].a[i], state.v.w[k].a[i], grads.w[k].a[i]);
        for (size_t i = 0; i < params.b[k].size(); ++i)
            update(params.b[k][i], state.m.b[k][i], state.v.b[k][i], grads.b[k][i]);
    }
    return true;
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> point, std::span<const double> analytic_grad,
                  double step) {
    std::vector<double> x(point.begin(), point.end());
    double worst = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        const double saved = x[k];
        x[k] = saved + step;
        const double fp = f(x);
        x[k] = saved - step;
        const double fm = f(x);
        x[k] = saved;
        const double central = (fp - fm) / (2.0 * step);
        const double err = std::abs(analytic_grad[k] - central) /
                           std::max(1.0, std::abs(analytic_grad[k]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace alab
