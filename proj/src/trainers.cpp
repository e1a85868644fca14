#include "alab/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "alab/io.hpp"

namespace alab {

void GameTrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("GameTrainConfig: lr must be positive");
    if (batch < 1 || steps < 1) throw std::invalid_argument("GameTrainConfig: batch, steps >= 1");
    if (tau < 1) throw std::invalid_argument("GameTrainConfig: tau >= 1");
    if (t_init < 1 || !(t_init <= t_limit && t_limit <= steps))
        throw std::invalid_argument("GameTrainConfig: need 1 <= T_init <= T_limit <= T");
    if (eval.cadence < 1 || eval.test_profiles < 1)
        throw std::invalid_argument("GameTrainConfig: bad eval options");
}

double GameTrainConfig::time_of_step(int step) const {
    if (!time_ramp || steps <= 1) return 0.0;
    return static_cast<double>(step - 1) / static_cast<double>(steps - 1);
}

void RegretNetConfig::validate(bool offline) const {
    if (!(lr_misreport > 0.0) || !(lr_params > 0.0))
        throw std::invalid_argument("RegretNetConfig: step sizes must be positive");
    if (inner_steps < 1) throw std::invalid_argument("RegretNetConfig: inner_steps >= 1");
    if (batch < 1 || steps < 1) throw std::invalid_argument("RegretNetConfig: batch, steps >= 1");
    if (!(rho0 > 0.0)) throw std::invalid_argument("RegretNetConfig: rho0 must be positive");
    if (t_rho < 1 || t_lambda < 1) throw std::invalid_argument("RegretNetConfig: periods >= 1");
    if (offline && dataset_size < batch)
        throw std::invalid_argument("RegretNetConfig: offline mode needs dataset_size >= batch");
    if (eval.cadence < 1 || eval.test_profiles < 1)
        throw std::invalid_argument("RegretNetConfig: bad eval options");
}

double RegretNetConfig::time_of_step(int step) const {
    if (!time_ramp || steps <= 1) return 0.0;
    return static_cast<double>(step - 1) / static_cast<double>(steps - 1);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TrainPoint eval_point(const AuctioneerParams& auctioneer, const ProductDistribution& dist,
                      int step, double t, const EvalOptions& eval, uint64_t run_seed,
                      const MisreporterParams* mis, Clock::time_point start) {
    EstimatorSpec est = eval.estimator;
    if (est.kind == RegretEstimatorKind::misreporter) est.misreporter = mis;
    NeuralMechanism mech(auctioneer);
    const uint64_t test_seed = splitmix64(run_seed ^ hash_tag("eval_testset"));
    TrainPoint point;
    point.step = step;
    point.t = t;
    point.metrics = empirical_metrics(mech, dist, eval.test_profiles, est, test_seed, t);
    point.wall_seconds = seconds_since(start);
    return point;
}

// Per-profile forward state shared by both trainers' auctioneer updates.
struct ProfileWork {
    Mat profile;
    AuctioneerCache truthful;
    std::vector<AuctioneerCache> misbid;   // one per bidder
    Mat misreports;                        // n x m, treated as constants
    std::vector<double> regret;            // clamped, per bidder
    double revenue = 0.0;
};

// Forward everything for one profile given its misreport matrix.
void fill_profile_work(const AuctioneerParams& auct, ProfileWork& w) {
    const int n = auct.shape.bidders, m = auct.shape.items;
    auctioneer_forward(auct, w.profile, w.truthful);
    w.revenue = 0.0;
    for (double p : w.truthful.pay) w.revenue += p;
    w.misbid.resize(n);
    w.regret.assign(n, 0.0);
    Mat bid = w.profile;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) bid(i, j) = w.misreports(i, j);
        auctioneer_forward(auct, bid, w.misbid[i]);
        const double u_mis = utility({w.misbid[i].alloc, w.misbid[i].pay}, i, w.profile.row(i));
        const double u_truth = utility({w.truthful.alloc, w.truthful.pay}, i, w.profile.row(i));
        w.regret[i] = std::max(0.0, u_mis - u_truth);
        for (int j = 0; j < m; ++j) bid(i, j) = w.profile(i, j);
    }
}

// Accumulate d(loss)/d(auctioneer params) for one profile, where
//   loss = rev_coeff * sum_i p_i(V)  +  sum_i coeff_i * r_i
// and r_i = u_i(misreport) - u_i(truthful). coeff_i must already be zeroed
// for clamped (r_i = 0) terms.
void accumulate_profile_grads(const AuctioneerParams& auct, const ProfileWork& w,
                              double rev_coeff, std::span<const double> coeff,
                              AuctioneerGrads& grads, Mat& d_alloc, std::vector<double>& d_pay) {
    const int n = auct.shape.bidders, m = auct.shape.items;
    // misreport passes: d u_i / d(g row i) = v_i, d u_i / d p_i = -1
    for (int i = 0; i < n; ++i) {
        if (coeff[i] == 0.0) continue;
        std::fill(d_alloc.a.begin(), d_alloc.a.end(), 0.0);
        std::fill(d_pay.begin(), d_pay.end(), 0.0);
        for (int j = 0; j < m; ++j) d_alloc(i, j) = coeff[i] * w.profile(i, j);
        d_pay[i] = -coeff[i];
        auctioneer_backward(auct, w.misbid[i], d_alloc, d_pay, &grads, nullptr);
    }
    // truthful pass: revenue seeds plus the -u_i(truthful) side of each regret
    std::fill(d_alloc.a.begin(), d_alloc.a.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        d_pay[i] = rev_coeff + coeff[i];
        for (int j = 0; j < m; ++j) d_alloc(i, j) = -coeff[i] * w.profile(i, j);
    }
    auctioneer_backward(auct, w.truthful, d_alloc, d_pay, &grads, nullptr);
}

struct Divergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void apply_or_diverge(AdamWState& opt, MlpParams& params, const MlpParams& grads,
                      const char* what) {
    if (!adamw_step(opt, params, grads))
        throw Divergence(std::string("non-finite gradients in ") + what);
}

std::vector<ProfileWork>& work_buffer(size_t count) {
    static thread_local std::vector<ProfileWork> buf;
    if (buf.size() < count) buf.resize(count);
    return buf;
}

}  // namespace

double algnet_loss_and_grads(const AuctioneerParams& auct, const MisreporterParams& mis,
                             std::span<const Mat> profiles, AuctioneerGrads* grads) {
    if (profiles.empty()) throw std::invalid_argument("algnet_loss_and_grads: empty batch");
    const int n = auct.shape.bidders;
    const size_t count = profiles.size();
    std::vector<ProfileWork>& work = work_buffer(count);
    std::vector<double> revenues(count), regrets(count);
    for (size_t b = 0; b < count; ++b) {
        work[b].profile = profiles[b];
        work[b].misreports = misreport(mis, profiles[b]);
        fill_profile_work(auct, work[b]);
        revenues[b] = work[b].revenue;
        double rsum = 0.0;
        for (double r : work[b].regret) rsum += r;
        regrets[b] = rsum;
    }
    const LossM lm = loss_m(revenues, regrets);
    if (grads) {
        grads->set_zero();
        const double inv = 1.0 / static_cast<double>(count);
        Mat d_alloc(auct.shape.bidders, auct.shape.items);
        std::vector<double> d_pay(n), coeff(n);
        for (size_t b = 0; b < count; ++b) {
            for (int i = 0; i < n; ++i)
                coeff[i] = work[b].regret[i] > 0.0 ? lm.d_regret * inv : 0.0;
            accumulate_profile_grads(auct, work[b], lm.d_rev * inv, coeff, *grads, d_alloc, d_pay);
        }
    }
    return lm.loss;
}

double regretnet_loss_and_grads(const AuctioneerParams& auct, const LagrangianState& lagr,
                                std::span<const Mat> profiles, std::span<const Mat> misreports,
                                AuctioneerGrads* grads, std::vector<double>* mean_bidder_regrets) {
    if (profiles.empty() || profiles.size() != misreports.size())
        throw std::invalid_argument("regretnet_loss_and_grads: batch size mismatch");
    const int n = auct.shape.bidders;
    const size_t count = profiles.size();
    std::vector<ProfileWork>& work = work_buffer(count);
    double mean_rev = 0.0;
    std::vector<double> mean_regret(n, 0.0);
    for (size_t b = 0; b < count; ++b) {
        work[b].profile = profiles[b];
        work[b].misreports = misreports[b];
        fill_profile_work(auct, work[b]);
        mean_rev += work[b].revenue;
        for (int i = 0; i < n; ++i) mean_regret[i] += work[b].regret[i];
    }
    const double inv = 1.0 / static_cast<double>(count);
    mean_rev *= inv;
    for (double& r : mean_regret) r *= inv;
    if (mean_bidder_regrets) *mean_bidder_regrets = mean_regret;
    const double loss = lagrangian_loss(mean_rev, mean_regret, lagr);
    if (!std::isfinite(loss)) throw Divergence("non-finite Lagrangian loss");
    if (grads) {
        grads->set_zero();
        std::vector<double> d_regret(n);
        lagrangian_regret_grads(mean_regret, lagr, d_regret);
        Mat d_alloc(auct.shape.bidders, auct.shape.items);
        std::vector<double> d_pay(n), coeff(n);
        for (size_t b = 0; b < count; ++b) {
            for (int i = 0; i < n; ++i)
                coeff[i] = work[b].regret[i] > 0.0 ? d_regret[i] * inv : 0.0;
            accumulate_profile_grads(auct, work[b], -inv, coeff, *grads, d_alloc, d_pay);
        }
    }
    return loss;
}

AlgnetState algnet_init(const GameTrainConfig& cfg, const ProductDistribution& dist) {
    cfg.validate();
    dist.validate();
    AlgnetState st;
    st.step = 0;
    st.auctioneer = AuctioneerParams::init(dist.shape, cfg.auct_sizes,
                                           splitmix64(cfg.seed ^ hash_tag("auctioneer_init")));
    const double t_max = cfg.time_ramp ? 1.0 : 0.0;
    st.misreporter =
        MisreporterParams::init(dist.shape, cfg.mis_sizes,
                                ProjectionSpec::for_distribution(dist, t_max),
                                splitmix64(cfg.seed ^ hash_tag("misreporter_init")));
    AdamWConfig opt_cfg = cfg.adamw;
    opt_cfg.lr = cfg.lr;
    st.opt_f1 = adamw_init(st.auctioneer.f1_spec, opt_cfg);
    st.opt_f2 = adamw_init(st.auctioneer.f2_spec, opt_cfg);
    st.opt_pay = adamw_init(st.auctioneer.pay_spec, opt_cfg);
    st.opt_mis = adamw_init(st.misreporter.spec, opt_cfg);
    return st;
}

AlgnetResult train_algnet(const GameTrainConfig& cfg, const ProductDistribution& dist,
                          const AlgnetState* resume, const AlgnetEvalHook& on_eval) {
    cfg.validate();
    dist.validate();
    const auto start = Clock::now();

    AlgnetState st = resume ? *resume : algnet_init(cfg, dist);
    if (st.auctioneer.shape != dist.shape)
        throw std::invalid_argument("train_algnet: resume state shape mismatch");

    TrainLog log;
    log.seed = cfg.seed;

    auto log_eval = [&](int step) {
        TrainPoint p = eval_point(st.auctioneer, dist, step, cfg.time_of_step(std::max(step, 1)),
                                  cfg.eval, cfg.seed, &st.misreporter, start);
        log.points.push_back(p);
        if (on_eval) on_eval(st, p);
    };

    if (st.step == 0) log_eval(0);
    AlgnetState last_good = st;

    std::vector<Mat> batch(cfg.batch);
    AuctioneerGrads auct_grads = auctioneer_zero_grads(st.auctioneer);
    MlpParams mis_grads = mlp_zeros(st.misreporter.spec);

    const AdamWConfig opt_cfg = [&] {
        AdamWConfig c = cfg.adamw;
        c.lr = cfg.lr;
        return c;
    }();

    for (int t = st.step + 1; t <= cfg.steps; ++t) {
        try {
            // periodic misreporter reinit in the early phase
            if (t % cfg.t_init == 0 && t < cfg.t_limit) {
                const uint64_t s =
                    splitmix64(splitmix64(cfg.seed ^ hash_tag("mis_reinit")) + static_cast<uint64_t>(t));
                st.misreporter = MisreporterParams::init(dist.shape, cfg.mis_sizes,
                                                         st.misreporter.proj, s);
                st.opt_mis = adamw_init(st.misreporter.spec, opt_cfg);
            }

            const double time_t = cfg.time_of_step(t);
            for (int b = 0; b < cfg.batch; ++b) {
                Rng rng = derive_rng(cfg.seed, "batch", static_cast<uint64_t>(t),
                                     static_cast<uint64_t>(b));
                batch[b] = sample_profile(dist, time_t, rng);
            }

            // tau misreporter updates against the frozen auctioneer
            for (int s = 0; s < cfg.tau; ++s) {
                mis_grads.set_zero();
                misreporter_loss(st.misreporter, st.auctioneer, batch, &mis_grads);
                apply_or_diverge(st.opt_mis, st.misreporter.net, mis_grads, "misreporter update");
            }

            // one auctioneer update on the stationary loss
            algnet_loss_and_grads(st.auctioneer, st.misreporter, batch, &auct_grads);
            apply_or_diverge(st.opt_f1, st.auctioneer.f1, auct_grads.f1, "auctioneer f1");
            apply_or_diverge(st.opt_f2, st.auctioneer.f2, auct_grads.f2, "auctioneer f2");
            apply_or_diverge(st.opt_pay, st.auctioneer.pay, auct_grads.pay, "auctioneer pay");
            st.step = t;
        } catch (const std::runtime_error&) {
            // divergence: back to the last good checkpoint
            st = last_good;
            log.status = TrainLog::Status::diverged;
            log.diverged_at_step = t;
            return {st.auctioneer, st.misreporter, std::move(log)};
        }

        if (t % cfg.eval.cadence == 0 || t == cfg.steps) {
            log_eval(t);
            last_good = st;
        }
    }
    return {st.auctioneer, st.misreporter, std::move(log)};
}

// ---------------------------------------------------------------------------
// RegretNet baselines
// ---------------------------------------------------------------------------

namespace {

Mat sample_misreport_init(const ProductDistribution& dist, double t, uint64_t seed, uint64_t a,
                          uint64_t b) {
    Rng rng = derive_rng(seed, "misreport_init", a, b);
    return sample_profile(dist, t, rng);
}

// One pass of projected gradient ascent on every bidder's misreport row.
void ascend_misreports(const AuctioneerParams& auct, const ProductDistribution& dist,
                       const Mat& profile, Mat& reports, double step_size, double t) {
    const int n = auct.shape.bidders, m = auct.shape.items;
    AuctioneerCache cache;
    Mat d_alloc(n, m), dB(n, m);
    std::vector<double> d_pay(n);
    Mat bid = profile;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) bid(i, j) = reports(i, j);
        auctioneer_forward(auct, bid, cache);
        std::fill(d_alloc.a.begin(), d_alloc.a.end(), 0.0);
        std::fill(d_pay.begin(), d_pay.end(), 0.0);
        std::fill(dB.a.begin(), dB.a.end(), 0.0);
        for (int j = 0; j < m; ++j) d_alloc(i, j) = profile(i, j);
        d_pay[i] = -1.0;
        auctioneer_backward(auct, cache, d_alloc, d_pay, nullptr, &dB);
        for (int j = 0; j < m; ++j) {
            const double lo = dist.marginals[j].search_lo(t);
            const double hi = dist.marginals[j].search_hi(t);
            reports(i, j) = std::clamp(reports(i, j) + step_size * dB(i, j), lo, hi);
        }
        for (int j = 0; j < m; ++j) bid(i, j) = profile(i, j);
    }
}

RegretNetResult train_regretnet_impl(const RegretNetConfig& cfg, const ProductDistribution& dist,
                                     bool offline, const RegretNetState* resume,
                                     const RegretNetEvalHook& on_eval) {
    cfg.validate(offline);
    dist.validate();
    const auto start = Clock::now();

    RegretNetState st = resume ? *resume : regretnet_init(cfg, dist, offline);
    if (st.auctioneer.shape != dist.shape)
        throw std::invalid_argument("train_regretnet: resume state shape mismatch");

    TrainLog log;
    log.seed = cfg.seed;

    auto log_eval = [&](int step) {
        TrainPoint p = eval_point(st.auctioneer, dist, step, cfg.time_of_step(std::max(step, 1)),
                                  cfg.eval, cfg.seed, nullptr, start);
        log.points.push_back(p);
        if (on_eval) on_eval(st, p);
    };

    if (st.step == 0) log_eval(0);
    RegretNetState last_good = st;

    const int n = dist.shape.bidders;
    if (!offline && static_cast<int>(st.misreports.size()) != cfg.batch)
        st.misreports.assign(cfg.batch, Mat(dist.shape.bidders, dist.shape.items));
    if (offline && static_cast<int>(st.misreports.size()) != cfg.dataset_size)
        throw std::invalid_argument("train_regretnet: state misreports do not match dataset_size");
    // offline: the dataset is regenerated from the seed; misreports live in
    // the state and persist across epochs.
    std::vector<Mat> dataset;
    if (offline) {
        dataset.resize(cfg.dataset_size);
        for (int l = 0; l < cfg.dataset_size; ++l) {
            Rng rng = derive_rng(cfg.seed, "dataset", static_cast<uint64_t>(l));
            dataset[l] = sample_profile(dist, 0.0, rng);
        }
    }

    std::vector<Mat> batch(cfg.batch);
    std::vector<Mat> batch_reports(cfg.batch);
    std::vector<int> batch_index(cfg.batch);
    AuctioneerGrads grads = auctioneer_zero_grads(st.auctioneer);
    std::vector<double> mean_regret(n);

    for (int t = st.step + 1; t <= cfg.steps; ++t) {
        try {
            const double time_t = cfg.time_of_step(t);
            // assemble the minibatch
            for (int b = 0; b < cfg.batch; ++b) {
                if (offline) {
                    const int idx =
                        static_cast<int>((static_cast<long long>(t - 1) * cfg.batch + b) %
                                         cfg.dataset_size);
                    batch_index[b] = idx;
                    batch[b] = dataset[idx];
                } else {
                    Rng rng = derive_rng(cfg.seed, "batch", static_cast<uint64_t>(t),
                                         static_cast<uint64_t>(b));
                    batch[b] = sample_profile(dist, time_t, rng);
                    st.misreports[b] = sample_misreport_init(dist, time_t, cfg.seed,
                                                             static_cast<uint64_t>(t),
                                                             static_cast<uint64_t>(b));
                }
            }

            // inner misreport ascent
            for (int r = 0; r < cfg.inner_steps; ++r)
                for (int b = 0; b < cfg.batch; ++b) {
                    Mat& reports = offline ? st.misreports[batch_index[b]] : st.misreports[b];
                    ascend_misreports(st.auctioneer, dist, batch[b], reports, cfg.lr_misreport,
                                      offline ? 0.0 : time_t);
                }

            // Lagrangian gradient step on w
            for (int b = 0; b < cfg.batch; ++b)
                batch_reports[b] = offline ? st.misreports[batch_index[b]] : st.misreports[b];
            regretnet_loss_and_grads(st.auctioneer, st.lagrangian, batch, batch_reports, &grads,
                                     &mean_regret);
            apply_or_diverge(st.opt_f1, st.auctioneer.f1, grads.f1, "regretnet f1");
            apply_or_diverge(st.opt_f2, st.auctioneer.f2, grads.f2, "regretnet f2");
            apply_or_diverge(st.opt_pay, st.auctioneer.pay, grads.pay, "regretnet pay");

            schedule_step(st.lagrangian, static_cast<uint64_t>(t), mean_regret);
            st.step = t;
        } catch (const std::runtime_error&) {
            st = last_good;
            log.status = TrainLog::Status::diverged;
            log.diverged_at_step = t;
            return {st.auctioneer, std::move(log)};
        }

        if (t % cfg.eval.cadence == 0 || t == cfg.steps) {
            log_eval(t);
            last_good = st;
        }
    }
    return {st.auctioneer, std::move(log)};
}

}  // namespace

RegretNetState regretnet_init(const RegretNetConfig& cfg, const ProductDistribution& dist,
                              bool offline) {
    cfg.validate(offline);
    dist.validate();
    RegretNetState st;
    st.step = 0;
    st.auctioneer = AuctioneerParams::init(dist.shape, cfg.auct_sizes,
                                           splitmix64(cfg.seed ^ hash_tag("auctioneer_init")));
    AdamWConfig opt_cfg = cfg.adamw;
    opt_cfg.lr = cfg.lr_params;
    st.opt_f1 = adamw_init(st.auctioneer.f1_spec, opt_cfg);
    st.opt_f2 = adamw_init(st.auctioneer.f2_spec, opt_cfg);
    st.opt_pay = adamw_init(st.auctioneer.pay_spec, opt_cfg);
    st.lagrangian.lambda.assign(dist.shape.bidders, cfg.lambda0);
    st.lagrangian.rho = cfg.rho0;
    st.lagrangian.c = cfg.c;
    st.lagrangian.t_rho = cfg.t_rho;
    st.lagrangian.t_lambda = cfg.t_lambda;
    st.lagrangian.validate();
    // misreports initialized once (offline) or per batch (online)
    if (offline) {
        st.misreports.resize(cfg.dataset_size);
        for (int l = 0; l < cfg.dataset_size; ++l)
            st.misreports[l] = sample_misreport_init(dist, 0.0, cfg.seed, 0,
                                                     static_cast<uint64_t>(l));
    } else {
        st.misreports.assign(cfg.batch, Mat(dist.shape.bidders, dist.shape.items));
    }
    return st;
}

RegretNetResult train_regretnet(const RegretNetConfig& cfg, const ProductDistribution& dist,
                                const RegretNetState* resume, const RegretNetEvalHook& on_eval) {
    if (cfg.dataset_size < 1)
        throw std::invalid_argument("train_regretnet: offline mode needs dataset_size > 0");
    return train_regretnet_impl(cfg, dist, /*offline=*/true, resume, on_eval);
}

RegretNetResult train_regretnet_online(const RegretNetConfig& cfg, const ProductDistribution& dist,
                                       const RegretNetState* resume,
                                       const RegretNetEvalHook& on_eval) {
    return train_regretnet_impl(cfg, dist, /*offline=*/false, resume, on_eval);
}

AlgnetResult run_online_experiment(GameTrainConfig cfg, const ProductDistribution& dist,
                                   const AlgnetEvalHook& on_eval) {
    cfg.time_ramp = true;
    return train_algnet(cfg, dist, nullptr, on_eval);
}

RegretNetResult run_online_experiment(RegretNetConfig cfg, bool online,
                                      const ProductDistribution& dist,
                                      const RegretNetEvalHook& on_eval) {
    cfg.time_ramp = true;
    return online ? train_regretnet_online(cfg, dist, nullptr, on_eval)
                  : train_regretnet(cfg, dist, nullptr, on_eval);
}

// ---------------------------------------------------------------------------
// Trainer checkpoints
// ---------------------------------------------------------------------------

void save_algnet_state(const std::filesystem::path& path, const AlgnetState& state) {
    ByteWriter w;
    write_header(w, CheckpointKind::algnet_trainer);
    w.u64(static_cast<uint64_t>(state.step));
    write_auctioneer(w, state.auctioneer);
    write_adamw(w, state.opt_f1);
    write_adamw(w, state.opt_f2);
    write_adamw(w, state.opt_pay);
    write_misreporter(w, state.misreporter);
    write_adamw(w, state.opt_mis);
    save_bytes(path, w.data());
}

AlgnetState load_algnet_state(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = load_bytes(path);
    ByteReader r(bytes);
    if (read_header(r) != CheckpointKind::algnet_trainer)
        throw SerializeError("not an ALGnet trainer checkpoint");
    AlgnetState st;
    st.step = static_cast<int>(r.u64());
    st.auctioneer = read_auctioneer(r);
    st.opt_f1 = read_adamw(r, st.auctioneer.f1_spec);
    st.opt_f2 = read_adamw(r, st.auctioneer.f2_spec);
    st.opt_pay = read_adamw(r, st.auctioneer.pay_spec);
    st.misreporter = read_misreporter(r);
    st.opt_mis = read_adamw(r, st.misreporter.spec);
    r.expect_end();
    return st;
}

void save_regretnet_state(const std::filesystem::path& path, const RegretNetState& state) {
    ByteWriter w;
    write_header(w, CheckpointKind::regretnet_trainer);
    w.u64(static_cast<uint64_t>(state.step));
    write_auctioneer(w, state.auctioneer);
    write_adamw(w, state.opt_f1);
    write_adamw(w, state.opt_f2);
    write_adamw(w, state.opt_pay);
    w.u32(static_cast<uint32_t>(state.lagrangian.lambda.size()));
    for (double l : state.lagrangian.lambda) w.f64(l);
    w.f64(state.lagrangian.rho);
    w.f64(state.lagrangian.c);
    w.u64(state.lagrangian.t_rho);
    w.u64(state.lagrangian.t_lambda);
    w.u32(static_cast<uint32_t>(state.misreports.size()));
    for (const Mat& m : state.misreports) {
        w.u32(static_cast<uint32_t>(m.rows));
        w.u32(static_cast<uint32_t>(m.cols));
        for (double x : m.a) w.f64(x);
    }
    save_bytes(path, w.data());
}

RegretNetState load_regretnet_state(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = load_bytes(path);
    ByteReader r(bytes);
    if (read_header(r) != CheckpointKind::regretnet_trainer)
        throw SerializeError("not a RegretNet trainer checkpoint");
    RegretNetState st;
    st.step = static_cast<int>(r.u64());
    st.auctioneer = read_auctioneer(r);
    st.opt_f1 = read_adamw(r, st.auctioneer.f1_spec);
    st.opt_f2 = read_adamw(r, st.auctioneer.f2_spec);
    st.opt_pay = read_adamw(r, st.auctioneer.pay_spec);
    st.lagrangian.lambda.resize(r.u32());
    for (double& l : st.lagrangian.lambda) l = r.f64();
    st.lagrangian.rho = r.f64();
    st.lagrangian.c = r.f64();
    st.lagrangian.t_rho = r.u64();
    st.lagrangian.t_lambda = r.u64();
    st.misreports.resize(r.u32());
    for (Mat& m : st.misreports) {
        const int rows = static_cast<int>(r.u32());
        const int cols = static_cast<int>(r.u32());
        m = Mat(rows, cols);
        for (double& x : m.a) x = r.f64();
    }
    r.expect_end();
    return st;
}

}  // namespace alab
