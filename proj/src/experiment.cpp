#include "alab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "alab/parallel.hpp"

namespace alab {

using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::algnet: return "algnet";
        case Algorithm::regretnet: return "regretnet";
        case Algorithm::regretnet_online: return "regretnet_online";
        case Algorithm::algnet_online: return "algnet_online";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "algnet") return Algorithm::algnet;
    if (s == "regretnet") return Algorithm::regretnet;
    if (s == "regretnet_online") return Algorithm::regretnet_online;
    if (s == "algnet_online") return Algorithm::algnet_online;
    throw std::invalid_argument("unknown algorithm: " + s);
}

namespace {

bool is_game_algorithm(Algorithm a) {
    return a == Algorithm::algnet || a == Algorithm::algnet_online;
}

// --- JSON <-> config -------------------------------------------------------

template <typename T>
T require(const json& j, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string("config: missing key \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config: bad value for key \"") + key + "\"");
    }
}

template <typename T>
T optional(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config: bad value for key \"") + key + "\"");
    }
}

MarginalDistribution marginal_from_json(const json& j) {
    const std::string kind = require<std::string>(j, "kind");
    if (kind == "uniform")
        return MarginalDistribution::uniform(require<double>(j, "lo"), require<double>(j, "hi"));
    if (kind == "power_tail") return MarginalDistribution::power_tail(require<double>(j, "k"));
    if (kind == "time_scaled_uniform")
        return MarginalDistribution::time_scaled_uniform(
            require<double>(j, "lo"), require<double>(j, "hi"), optional<double>(j, "rate", 1.0));
    throw std::invalid_argument("config: unknown marginal kind \"" + kind + "\"");
}

json marginal_to_json(const MarginalDistribution& m) {
    json j;
    switch (m.kind) {
        case MarginalDistribution::Kind::uniform:
            j = {{"kind", "uniform"}, {"lo", m.lo}, {"hi", m.hi}};
            break;
        case MarginalDistribution::Kind::power_tail:
            j = {{"kind", "power_tail"}, {"k", m.tail_k}};
            break;
        case MarginalDistribution::Kind::time_scaled_uniform:
            j = {{"kind", "time_scaled_uniform"}, {"lo", m.lo}, {"hi", m.hi}, {"rate", m.rate}};
            break;
    }
    return j;
}

AdamWConfig adamw_from_json(const json& j) {
    AdamWConfig c;
    c.beta1 = optional<double>(j, "beta1", c.beta1);
    c.beta2 = optional<double>(j, "beta2", c.beta2);
    c.eps = optional<double>(j, "eps", c.eps);
    c.weight_decay = optional<double>(j, "weight_decay", c.weight_decay);
    return c;
}

json adamw_to_json(const AdamWConfig& c) {
    return {{"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps},
            {"weight_decay", c.weight_decay}};
}

EstimatorSpec oracle_from_json(const json& j) {
    EstimatorSpec est;
    est.kind = regret_estimator_from_string(optional<std::string>(j, "kind", "ascent"));
    est.grid_points = optional<int>(j, "grid_points", est.grid_points);
    est.ascent.restarts = optional<int>(j, "restarts", est.ascent.restarts);
    est.ascent.steps = optional<int>(j, "steps", est.ascent.steps);
    est.ascent.step_frac = optional<double>(j, "step_frac", est.ascent.step_frac);
    return est;
}

json oracle_to_json(const EstimatorSpec& est) {
    return {{"kind", to_string(est.kind)},
            {"grid_points", est.grid_points},
            {"restarts", est.ascent.restarts},
            {"steps", est.ascent.steps},
            {"step_frac", est.ascent.step_frac}};
}

EvalOptions eval_from_json(const json& j) {
    EvalOptions e;
    e.cadence = optional<int>(j, "cadence", e.cadence);
    e.test_profiles = optional<int>(j, "test_profiles", e.test_profiles);
    if (j.contains("oracle")) e.estimator = oracle_from_json(j.at("oracle"));
    return e;
}

json eval_to_json(const EvalOptions& e) {
    return {{"cadence", e.cadence},
            {"test_profiles", e.test_profiles},
            {"oracle", oracle_to_json(e.estimator)}};
}

GameTrainConfig game_from_json(const json& j) {
    GameTrainConfig c;
    c.lr = require<double>(j, "lr");
    c.batch = require<int>(j, "batch");
    c.steps = require<int>(j, "steps");
    c.t_init = optional<int>(j, "t_init", c.t_init);
    c.t_limit = optional<int>(j, "t_limit", c.t_limit);
    c.tau = optional<int>(j, "tau", c.tau);
    c.auct_sizes.alloc_layers = optional<int>(j, "alloc_layers", c.auct_sizes.alloc_layers);
    c.auct_sizes.alloc_width = optional<int>(j, "alloc_width", c.auct_sizes.alloc_width);
    c.auct_sizes.pay_layers = optional<int>(j, "pay_layers", c.auct_sizes.pay_layers);
    c.auct_sizes.pay_width = optional<int>(j, "pay_width", c.auct_sizes.pay_width);
    c.mis_sizes.layers = optional<int>(j, "mis_layers", c.mis_sizes.layers);
    c.mis_sizes.width = optional<int>(j, "mis_width", c.mis_sizes.width);
    if (j.contains("adamw")) c.adamw = adamw_from_json(j.at("adamw"));
    c.time_ramp = optional<bool>(j, "time_ramp", false);
    if (j.contains("eval")) c.eval = eval_from_json(j.at("eval"));
    return c;
}

json game_to_json(const GameTrainConfig& c) {
    return {{"lr", c.lr},
            {"batch", c.batch},
            {"steps", c.steps},
            {"t_init", c.t_init},
            {"t_limit", c.t_limit},
            {"tau", c.tau},
            {"alloc_layers", c.auct_sizes.alloc_layers},
            {"alloc_width", c.auct_sizes.alloc_width},
            {"pay_layers", c.auct_sizes.pay_layers},
            {"pay_width", c.auct_sizes.pay_width},
            {"mis_layers", c.mis_sizes.layers},
            {"mis_width", c.mis_sizes.width},
            {"adamw", adamw_to_json(c.adamw)},
            {"time_ramp", c.time_ramp},
            {"eval", eval_to_json(c.eval)}};
}

RegretNetConfig regretnet_from_json(const json& j) {
    RegretNetConfig c;
    c.lr_misreport = require<double>(j, "lr_misreport");
    c.lr_params = require<double>(j, "lr_params");
    c.inner_steps = require<int>(j, "inner_steps");
    c.lambda0 = optional<double>(j, "lambda0", c.lambda0);
    c.rho0 = optional<double>(j, "rho0", c.rho0);
    c.c = optional<double>(j, "c", c.c);
    c.t_rho = optional<uint64_t>(j, "t_rho", c.t_rho);
    c.t_lambda = optional<uint64_t>(j, "t_lambda", c.t_lambda);
    c.batch = require<int>(j, "batch");
    c.steps = require<int>(j, "steps");
    c.dataset_size = optional<int>(j, "dataset_size", 0);
    c.auct_sizes.alloc_layers = optional<int>(j, "alloc_layers", c.auct_sizes.alloc_layers);
    c.auct_sizes.alloc_width = optional<int>(j, "alloc_width", c.auct_sizes.alloc_width);
    c.auct_sizes.pay_layers = optional<int>(j, "pay_layers", c.auct_sizes.pay_layers);
    c.auct_sizes.pay_width = optional<int>(j, "pay_width", c.auct_sizes.pay_width);
    if (j.contains("adamw")) c.adamw = adamw_from_json(j.at("adamw"));
    c.time_ramp = optional<bool>(j, "time_ramp", false);
    if (j.contains("eval")) c.eval = eval_from_json(j.at("eval"));
    return c;
}

json regretnet_to_json(const RegretNetConfig& c) {
    return {{"lr_misreport", c.lr_misreport},
            {"lr_params", c.lr_params},
            {"inner_steps", c.inner_steps},
            {"lambda0", c.lambda0},
            {"rho0", c.rho0},
            {"c", c.c},
            {"t_rho", c.t_rho},
            {"t_lambda", c.t_lambda},
            {"batch", c.batch},
            {"steps", c.steps},
            {"dataset_size", c.dataset_size},
            {"alloc_layers", c.auct_sizes.alloc_layers},
            {"alloc_width", c.auct_sizes.alloc_width},
            {"pay_layers", c.auct_sizes.pay_layers},
            {"pay_width", c.auct_sizes.pay_width},
            {"adamw", adamw_to_json(c.adamw)},
            {"time_ramp", c.time_ramp},
            {"eval", eval_to_json(c.eval)}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.name = require<std::string>(j, "name");
    const json shape = j.contains("shape")
                           ? j.at("shape")
                           : throw std::invalid_argument("config: missing key \"shape\"");
    cfg.dist.shape.bidders = require<int>(shape, "bidders");
    cfg.dist.shape.items = require<int>(shape, "items");
    if (!j.contains("distribution"))
        throw std::invalid_argument("config: missing key \"distribution\"");
    for (const json& mj : j.at("distribution")) cfg.dist.marginals.push_back(marginal_from_json(mj));
    cfg.dist.validate();
    cfg.algorithm = algorithm_from_string(require<std::string>(j, "algorithm"));
    cfg.has_game = j.contains("game");
    cfg.has_regretnet = j.contains("regretnet");
    if (cfg.has_game) cfg.game = game_from_json(j.at("game"));
    if (cfg.has_regretnet) cfg.regretnet = regretnet_from_json(j.at("regretnet"));
    cfg.seeds = require<std::vector<uint64_t>>(j, "seeds");
    cfg.test_profiles = optional<int>(j, "test_profiles", cfg.test_profiles);
    if (j.contains("oracle")) cfg.oracle = oracle_from_json(j.at("oracle"));
    cfg.output_dir = optional<std::string>(j, "output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["shape"] = {{"bidders", cfg.dist.shape.bidders}, {"items", cfg.dist.shape.items}};
    json marginals = json::array();
    for (const auto& m : cfg.dist.marginals) marginals.push_back(marginal_to_json(m));
    j["distribution"] = marginals;
    j["algorithm"] = to_string(cfg.algorithm);
    if (cfg.has_game) j["game"] = game_to_json(cfg.game);
    if (cfg.has_regretnet) j["regretnet"] = regretnet_to_json(cfg.regretnet);
    j["seeds"] = cfg.seeds;
    j["test_profiles"] = cfg.test_profiles;
    j["oracle"] = oracle_to_json(cfg.oracle);
    j["output_dir"] = cfg.output_dir;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    dist.validate();
    if (name.empty()) throw std::invalid_argument("config: empty name");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (test_profiles < 1) throw std::invalid_argument("config: test_profiles >= 1");
    if (has_game == has_regretnet)
        throw std::invalid_argument("config: exactly one of \"game\"/\"regretnet\" must be present");
    if (is_game_algorithm(algorithm) != has_game)
        throw std::invalid_argument("config: algorithm does not match the trainer config present");
    if (has_game) game.validate();
    if (has_regretnet) regretnet.validate(regretnet.dataset_size > 0);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    return config_to_json(cfg).dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : dump) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string metrics_csv_header() { return "step,t,rev,rgt,total_regret,p_star,estimator,seed"; }

std::string metrics_csv_row(int step, double t, const MetricsRecord& rec) {
    std::ostringstream ss;
    ss.precision(17);
    ss << step << ',' << t << ',' << rec.rev << ',' << rec.rgt << ',' << rec.total_regret << ','
       << rec.p_star << ',' << to_string(rec.estimator) << ',' << rec.seed;
    return ss.str();
}

MetricsRecord parse_metrics_csv_row(const std::string& line, int* step, double* t) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::invalid_argument("metrics row: expected 8 columns");
    MetricsRecord rec;
    if (step) *step = std::stoi(cells[0]);
    if (t) *t = std::stod(cells[1]);
    rec.rev = std::stod(cells[2]);
    rec.rgt = std::stod(cells[3]);
    rec.total_regret = std::stod(cells[4]);
    rec.p_star = std::stod(cells[5]);
    rec.estimator = regret_estimator_from_string(cells[6]);
    rec.seed = std::stoull(cells[7]);
    return rec;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, uint64_t seed) {
    json j;
    j["name"] = cfg.name;
    j["seed"] = seed;
    j["config_hash"] = config_hash(cfg);
    j["version"] = ALAB_VERSION;
    j["config"] = json::parse(experiment_config_to_json(cfg));
    std::ofstream f(dir / "manifest.json", std::ios::trunc);
    f << j.dump(2) << "\n";
}

// Target curve for the time-scaled two-item single-bidder uniform setting:
// the optimum scales linearly, 0.55 * (1 + t).
bool has_known_online_target(const ExperimentConfig& cfg) {
    if (cfg.dist.shape.bidders != 1 || cfg.dist.shape.items != 2) return false;
    for (const auto& m : cfg.dist.marginals)
        if (m.kind != MarginalDistribution::Kind::time_scaled_uniform || m.lo != 0.0 ||
            m.hi != 1.0)
            return false;
    return true;
}

RunResult run_one_seed(const ExperimentConfig& cfg, uint64_t seed, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(dir, cfg, seed);

    std::ofstream csv(dir / "metrics.csv", std::ios::trunc);
    csv << metrics_csv_header() << "\n";
    csv.flush();
    std::ofstream target_csv;
    const bool online_target = has_known_online_target(cfg);
    if (online_target) {
        target_csv.open(dir / "target.csv", std::ios::trunc);
        target_csv << "step,t,target\n";
    }

    RunResult result;
    result.dir = dir;
    result.seed = seed;

    AuctioneerParams final_auctioneer;
    const MisreporterParams* final_mis = nullptr;
    MisreporterParams mis_storage;
    TrainLog log;

    auto on_point = [&](const TrainPoint& p) {
        csv << metrics_csv_row(p.step, p.t, p.metrics) << "\n";
        csv.flush();
        if (online_target) {
            std::ostringstream ss;
            ss.precision(17);
            ss << p.step << ',' << p.t << ',' << 0.55 * (1.0 + p.t);
            target_csv << ss.str() << "\n";
            target_csv.flush();
        }
    };

    if (is_game_algorithm(cfg.algorithm)) {
        GameTrainConfig gc = cfg.game;
        gc.seed = seed;
        if (cfg.algorithm == Algorithm::algnet_online) gc.time_ramp = true;
        AlgnetResult res = train_algnet(gc, cfg.dist, nullptr,
                                        [&](const AlgnetState& st, const TrainPoint& p) {
                                            on_point(p);
                                            save_algnet_state(dir / "trainer_state.bin", st);
                                        });
        final_auctioneer = res.auctioneer;
        mis_storage = std::move(res.misreporter);
        final_mis = &mis_storage;
        log = std::move(res.log);
        save_auctioneer(dir / "auctioneer.bin", final_auctioneer);
        save_misreporter(dir / "misreporter.bin", mis_storage);
    } else {
        RegretNetConfig rc = cfg.regretnet;
        rc.seed = seed;
        if (cfg.algorithm == Algorithm::regretnet_online) rc.time_ramp = true;
        auto hook = [&](const RegretNetState& st, const TrainPoint& p) {
            on_point(p);
            save_regretnet_state(dir / "trainer_state.bin", st);
        };
        RegretNetResult res = cfg.algorithm == Algorithm::regretnet_online
                                  ? train_regretnet_online(rc, cfg.dist, nullptr, hook)
                                  : train_regretnet(rc, cfg.dist, nullptr, hook);
        final_auctioneer = res.auctioneer;
        log = std::move(res.log);
        save_auctioneer(dir / "auctioneer.bin", final_auctioneer);
    }

    result.diverged = log.status == TrainLog::Status::diverged;
    if (result.diverged) {
        std::ofstream f(dir / "DIVERGED");
        f << "diverged at step " << log.diverged_at_step << "\n";
    }

    // final evaluation with the configured oracle on the full test set
    EstimatorSpec est = cfg.oracle;
    if (est.kind == RegretEstimatorKind::misreporter) est.misreporter = final_mis;
    const double t_final =
        is_game_algorithm(cfg.algorithm)
            ? (cfg.game.time_ramp || cfg.algorithm == Algorithm::algnet_online ? 1.0 : 0.0)
            : (cfg.regretnet.time_ramp || cfg.algorithm == Algorithm::regretnet_online ? 1.0 : 0.0);
    NeuralMechanism mech(final_auctioneer);
    const uint64_t test_seed = splitmix64(seed ^ hash_tag("final_eval"));
    result.final_metrics =
        empirical_metrics(mech, cfg.dist, cfg.test_profiles, est, test_seed, t_final);
    std::ofstream final_csv(dir / "final_eval.csv", std::ios::trunc);
    final_csv << metrics_csv_header() << "\n";
    const int last_step = log.points.empty() ? 0 : log.points.back().step;
    final_csv << metrics_csv_row(last_step, t_final, result.final_metrics) << "\n";
    return result;
}

}  // namespace

std::vector<RunResult> cmd_train(const ExperimentConfig& cfg, const fs::path& out_override) {
    cfg.validate();
    const fs::path base = out_override.empty() ? fs::path(cfg.output_dir) : out_override;
    const fs::path exp_dir = base / cfg.name;
    std::vector<RunResult> results(cfg.seeds.size());
    std::vector<std::string> errors(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), [&](size_t k) {
        const uint64_t seed = cfg.seeds[k];
        const fs::path dir = exp_dir / ("seed_" + std::to_string(seed));
        try {
            results[k] = run_one_seed(cfg, seed, dir);
        } catch (const std::exception& e) {
            errors[k] = e.what();
            results[k].dir = dir;
            results[k].seed = seed;
            results[k].diverged = true;
        }
    });
    for (size_t k = 0; k < errors.size(); ++k)
        if (!errors[k].empty()) {
            std::ofstream f(results[k].dir / "ERROR");
            f << errors[k] << "\n";
        }
    return results;
}

MetricsRecord cmd_eval(const fs::path& checkpoint, const ExperimentConfig& cfg,
                       const fs::path& csv_out) {
    const AuctioneerParams params = load_auctioneer(checkpoint);
    if (params.shape != cfg.dist.shape)
        throw std::invalid_argument("cmd_eval: checkpoint/config shape mismatch");
    NeuralMechanism mech(params);
    const uint64_t test_seed = splitmix64(cfg.seeds.front() ^ hash_tag("final_eval"));
    const MetricsRecord rec =
        empirical_metrics(mech, cfg.dist, cfg.test_profiles, cfg.oracle, test_seed, 0.0);
    if (!csv_out.empty()) {
        const bool fresh = !fs::exists(csv_out);
        std::ofstream f(csv_out, std::ios::app);
        if (fresh) f << metrics_csv_header() << "\n";
        f << metrics_csv_row(0, 0.0, rec) << "\n";
    }
    return rec;
}

TruthifyResult cmd_truthify(const fs::path& checkpoint, const ExperimentConfig& cfg,
                            const fs::path& out_dir) {
    const AuctioneerParams params = load_auctioneer(checkpoint);
    if (params.shape.bidders != 1)
        throw std::invalid_argument(
            "cmd_truthify: multi-bidder transform out of scope (single-bidder only)");
    if (params.shape != cfg.dist.shape)
        throw std::invalid_argument("cmd_truthify: checkpoint/config shape mismatch");
    NeuralMechanism mech(params);
    const uint64_t test_seed = splitmix64(cfg.seeds.front() ^ hash_tag("truthify_eval"));
    TruthifyResult res =
        truthify(mech, cfg.dist, cfg.test_profiles, cfg.oracle.grid_points, test_seed);
    fs::create_directories(out_dir);
    write_menu_csv(out_dir / "menu.csv", res.menu);
    std::ofstream f(out_dir / "certificate.csv", std::ios::trunc);
    f.precision(17);
    f << "epsilon,input_rev,input_total_regret,input_p_star,output_rev,output_regret\n";
    f << res.epsilon << ',' << res.input_metrics.rev << ',' << res.input_metrics.total_regret
      << ',' << res.input_metrics.p_star << ',' << res.output_metrics.rev << ','
      << res.output_metrics.total_regret << "\n";
    return res;
}

std::vector<AggregateRow> cmd_report(const std::vector<fs::path>& run_dirs,
                                     const fs::path& out_dir) {
    if (run_dirs.empty()) throw std::invalid_argument("cmd_report: no run directories");
    fs::create_directories(out_dir);

    struct RunFinal {
        std::string name, algorithm;
        MetricsRecord rec;
        fs::path dir;
    };
    std::vector<RunFinal> finals;
    for (const fs::path& dir : run_dirs) {
        std::ifstream mf(dir / "manifest.json");
        if (!mf) throw std::invalid_argument("cmd_report: missing manifest in " + dir.string());
        json manifest = json::parse(mf);
        std::ifstream fe(dir / "final_eval.csv");
        if (!fe) throw std::invalid_argument("cmd_report: missing final_eval.csv in " + dir.string());
        std::string header, row;
        std::getline(fe, header);
        if (!std::getline(fe, row))
            throw std::invalid_argument("cmd_report: empty final_eval.csv in " + dir.string());
        RunFinal rf;
        rf.name = manifest.at("name").get<std::string>();
        rf.algorithm = manifest.at("config").at("algorithm").get<std::string>();
        rf.rec = parse_metrics_csv_row(row);
        rf.dir = dir;
        finals.push_back(std::move(rf));

        // per-run series file for plotting
        std::ifstream series(dir / "metrics.csv");
        if (series) {
            std::ofstream out(out_dir / ("series_" + rf.name + "_seed" +
                                         dir.filename().string() + ".csv"),
                              std::ios::trunc);
            out << series.rdbuf();
        }
    }

    std::map<std::pair<std::string, std::string>, std::vector<MetricsRecord>> groups;
    for (const auto& rf : finals) groups[{rf.name, rf.algorithm}].push_back(rf.rec);

    std::vector<AggregateRow> rows;
    for (const auto& [key, recs] : groups) {
        for (const auto& r : recs)
            if (r.estimator != recs.front().estimator)
                throw std::invalid_argument(
                    "cmd_report: mixed regret-estimator provenance in group " + key.first);
        AggregateRow row;
        row.name = key.first;
        row.algorithm = key.second;
        row.estimator = recs.front().estimator;
        row.runs = static_cast<int>(recs.size());
        auto mean_std = [&](auto get, double& mean, double& std_out) {
            double s = 0;
            for (const auto& r : recs) s += get(r);
            mean = s / recs.size();
            double var = 0;
            for (const auto& r : recs) var += (get(r) - mean) * (get(r) - mean);
            std_out = recs.size() > 1 ? std::sqrt(var / (recs.size() - 1)) : 0.0;
        };
        mean_std([](const MetricsRecord& r) { return r.rev; }, row.rev_mean, row.rev_std);
        mean_std([](const MetricsRecord& r) { return r.rgt; }, row.rgt_mean, row.rgt_std);
        mean_std([](const MetricsRecord& r) { return r.p_star; }, row.p_star_mean, row.p_star_std);
        rows.push_back(std::move(row));
    }

    std::ofstream agg(out_dir / "aggregate.csv", std::ios::trunc);
    agg.precision(17);
    agg << "name,algorithm,estimator,runs,rev_mean,rev_std,rgt_mean,rgt_std,p_star_mean,p_star_"
           "std\n";
    for (const auto& r : rows)
        agg << r.name << ',' << r.algorithm << ',' << to_string(r.estimator) << ',' << r.runs
            << ',' << r.rev_mean << ',' << r.rev_std << ',' << r.rgt_mean << ',' << r.rgt_std
            << ',' << r.p_star_mean << ',' << r.p_star_std << "\n";
    return rows;
}

}  // namespace alab
