#include "alab/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace alab {

double p_star(double revenue, double total_regret) {
    if (revenue < 0.0 || total_regret < 0.0)
        throw std::invalid_argument("p_star: negative inputs");
    if (total_regret > revenue) return 0.0;
    const double d = std::sqrt(revenue) - std::sqrt(total_regret);
    return d * d;
}

double epsilon_star(double revenue, double total_regret) {
    if (revenue < 0.0 || total_regret < 0.0)
        throw std::invalid_argument("epsilon_star: negative inputs");
    if (revenue == 0.0) return 1.0;
    return std::min(std::sqrt(total_regret / revenue), 1.0);
}

MechOrder compare(const MetricsRecord& a, const MetricsRecord& b) {
    if (a.estimator != b.estimator)
        throw std::invalid_argument(
            "compare: records from different regret estimators are not comparable");
    const double sa = std::sqrt(a.rev) - std::sqrt(a.total_regret);
    const double sb = std::sqrt(b.rev) - std::sqrt(b.total_regret);
    if (sa > sb) return MechOrder::first_better;
    if (sa < sb) return MechOrder::second_better;
    if (a.total_regret < b.total_regret) return MechOrder::first_better;
    if (a.total_regret > b.total_regret) return MechOrder::second_better;
    return MechOrder::equal;
}

LossM loss_m(std::span<const double> profile_revenue, std::span<const double> profile_regret) {
    if (profile_revenue.empty() || profile_revenue.size() != profile_regret.size())
        throw std::invalid_argument("loss_m: batch size mismatch");
    LossM out;
    for (double r : profile_revenue) out.rev += r;
    for (double r : profile_regret) out.regret += r;
    const double inv = 1.0 / static_cast<double>(profile_revenue.size());
    out.rev *= inv;
    out.regret *= inv;
    if (!std::isfinite(out.rev) || !std::isfinite(out.regret))
        throw std::runtime_error("loss_m: non-finite inputs");
    const double sp = std::sqrt(out.rev + kSqrtStabilizer);
    const double sr = std::sqrt(out.regret + kSqrtStabilizer);
    out.loss = -sp + sr + out.regret;
    out.d_rev = -0.5 / sp;
    out.d_regret = 0.5 / sr + 1.0;
    return out;
}

void LagrangianState::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("LagrangianState: rho must be positive");
    if (t_rho < 1 || t_lambda < 1)
        throw std::invalid_argument("LagrangianState: update periods must be >= 1");
}

double lagrangian_loss(double mean_revenue, std::span<const double> mean_bidder_regrets,
                       const LagrangianState& state) {
    if (mean_bidder_regrets.size() != state.lambda.size())
        throw std::invalid_argument("lagrangian_loss: bidder count mismatch");
    double penalty = 0.0, total = 0.0;
    for (size_t i = 0; i < mean_bidder_regrets.size(); ++i) {
        penalty += state.lambda[i] * mean_bidder_regrets[i];
        total += mean_bidder_regrets[i];
    }
    return -mean_revenue + penalty + 0.5 * state.rho * total * total;
}

void lagrangian_regret_grads(std::span<const double> mean_bidder_regrets,
                             const LagrangianState& state, std::span<double> d_regret) {
    double total = 0.0;
    for (double r : mean_bidder_regrets) total += r;
    for (size_t i = 0; i < d_regret.size(); ++i)
        d_regret[i] = state.lambda[i] + state.rho * total;
}

void schedule_step(LagrangianState& state, uint64_t step,
                   std::span<const double> mean_bidder_regrets) {
    const double rho_before = state.rho;
    if (step % state.t_rho == 0) state.rho += state.c;
    if (step % state.t_lambda == 0)
        for (size_t i = 0; i < state.lambda.size(); ++i)
            state.lambda[i] += rho_before * mean_bidder_regrets[i];
}

}  // namespace alab
