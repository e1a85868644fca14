#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "alab/experiment.hpp"

using namespace alab;
namespace fs = std::filesystem;

namespace {

const char* kTinyAlgnetConfig = R"JSON({
  "name": "tiny_a",
  "shape": {"bidders": 1, "items": 2},
  "distribution": [
    {"kind": "uniform", "lo": 0.0, "hi": 1.0},
    {"kind": "uniform", "lo": 0.0, "hi": 1.0}
  ],
  "algorithm": "algnet",
  "seeds": [1, 2],
  "test_profiles": 100,
  "oracle": {"kind": "ascent", "restarts": 2, "steps": 20, "step_frac": 0.05, "grid_points": 21},
  "game": {
    "lr": 0.001, "batch": 8, "steps": 30, "t_init": 10, "t_limit": 20, "tau": 2,
    "alloc_layers": 1, "alloc_width": 8, "pay_layers": 1, "pay_width": 8,
    "mis_layers": 1, "mis_width": 8,
    "eval": {"cadence": 15, "test_profiles": 40,
             "oracle": {"kind": "ascent", "restarts": 2, "steps": 15}}
  },
  "output_dir": "unused"
})JSON";

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parsing round trip preserves semantic fields") {
    const ExperimentConfig cfg = parse_experiment_config(kTinyAlgnetConfig);
    CHECK(cfg.name == "tiny_a");
    CHECK(cfg.dist.shape.bidders == 1);
    CHECK(cfg.dist.shape.items == 2);
    CHECK(cfg.algorithm == Algorithm::algnet);
    CHECK(cfg.seeds == std::vector<uint64_t>{1, 2});
    CHECK(cfg.game.tau == 2);
    CHECK(cfg.oracle.ascent.restarts == 2);

    const std::string echoed = experiment_config_to_json(cfg);
    const ExperimentConfig cfg2 = parse_experiment_config(echoed);
    CHECK(cfg2.name == cfg.name);
    CHECK(cfg2.dist == cfg.dist);
    CHECK(cfg2.algorithm == cfg.algorithm);
    CHECK(cfg2.seeds == cfg.seeds);
    CHECK(cfg2.test_profiles == cfg.test_profiles);
    CHECK(cfg2.game.lr == cfg.game.lr);
    CHECK(cfg2.game.steps == cfg.game.steps);
    CHECK(cfg2.game.eval.cadence == cfg.game.eval.cadence);
    CHECK(config_hash(cfg2) == config_hash(cfg));
}

TEST_CASE("config errors name the offending key") {
    SUBCASE("missing distribution") {
        const char* bad = R"({"name":"x","shape":{"bidders":1,"items":1},
            "algorithm":"algnet","seeds":[1],
            "game":{"lr":0.001,"batch":8,"steps":10,"t_init":5,"t_limit":5,"tau":1}})";
        try {
            parse_experiment_config(bad);
            FAIL("expected a parse error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("distribution") != std::string::npos);
        }
    }
    SUBCASE("both trainer configs present") {
        std::string both = kTinyAlgnetConfig;
        both.insert(both.rfind("\"output_dir\""),
                    "\"regretnet\": {\"lr_misreport\":0.1,\"lr_params\":0.001,"
                    "\"inner_steps\":1,\"batch\":8,\"steps\":10}, ");
        CHECK_THROWS_AS(parse_experiment_config(both), std::invalid_argument);
    }
    SUBCASE("unknown algorithm") {
        std::string bad = kTinyAlgnetConfig;
        const auto pos = bad.find("\"algnet\"");
        bad.replace(pos, 8, "\"sgd\"");
        CHECK_THROWS_AS(parse_experiment_config(bad), std::invalid_argument);
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(parse_experiment_config("{nope"), std::invalid_argument);
    }
}

TEST_CASE("cmd_train produces one run directory per seed with stable artifacts") {
    ExperimentConfig cfg = parse_experiment_config(kTinyAlgnetConfig);
    const fs::path out = fresh_dir("alab_exp_train");
    const auto results = cmd_train(cfg, out);
    REQUIRE(results.size() == 2);
    for (const auto& r : results) {
        CHECK_FALSE(r.diverged);
        CHECK(fs::exists(r.dir / "manifest.json"));
        CHECK(fs::exists(r.dir / "metrics.csv"));
        CHECK(fs::exists(r.dir / "final_eval.csv"));
        CHECK(fs::exists(r.dir / "auctioneer.bin"));
        CHECK(fs::exists(r.dir / "misreporter.bin"));
        CHECK(fs::exists(r.dir / "trainer_state.bin"));
    }

    SUBCASE("training twice yields identical CSVs") {
        const fs::path out2 = fresh_dir("alab_exp_train2");
        cmd_train(cfg, out2);
        for (uint64_t seed : {1, 2}) {
            std::ifstream a(out / "tiny_a" / ("seed_" + std::to_string(seed)) / "metrics.csv");
            std::ifstream b(out2 / "tiny_a" / ("seed_" + std::to_string(seed)) / "metrics.csv");
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            CHECK(sa.str() == sb.str());
        }
    }

    SUBCASE("manifest embeds a config that parses back to the same hash") {
        std::ifstream mf(results[0].dir / "manifest.json");
        std::stringstream ss;
        ss << mf.rdbuf();
        const std::string text = ss.str();
        const auto pos = text.find("\"config\"");
        REQUIRE(pos != std::string::npos);
        // cheap extraction: the config object is the value of the "config" key
        const auto brace = text.find('{', pos);
        int depth = 0;
        size_t end = brace;
        for (size_t i = brace; i < text.size(); ++i) {
            if (text[i] == '{') ++depth;
            if (text[i] == '}' && --depth == 0) {
                end = i;
                break;
            }
        }
        const ExperimentConfig echoed =
            parse_experiment_config(text.substr(brace, end - brace + 1));
        CHECK(config_hash(echoed) == config_hash(cfg));
    }

    SUBCASE("cmd_eval on the produced checkpoint appends a row") {
        const fs::path csv = out / "eval_rows.csv";
        const MetricsRecord rec = cmd_eval(results[0].dir / "auctioneer.bin", cfg, csv);
        CHECK(rec.sample_count == cfg.test_profiles);
        std::ifstream f(csv);
        std::string header, row;
        std::getline(f, header);
        CHECK(header == metrics_csv_header());
        REQUIRE(std::getline(f, row));
        const MetricsRecord parsed = parse_metrics_csv_row(row);
        CHECK(parsed.rev == doctest::Approx(rec.rev).epsilon(1e-12));
    }

    SUBCASE("cmd_truthify emits a menu and a certificate") {
        const fs::path tdir = out / "truthified";
        const TruthifyResult res =
            cmd_truthify(results[0].dir / "auctioneer.bin", cfg, tdir);
        CHECK(fs::exists(tdir / "menu.csv"));
        CHECK(fs::exists(tdir / "certificate.csv"));
        CHECK(res.output_metrics.total_regret == 0.0);
        const Menu menu = read_menu_csv(tdir / "menu.csv");
        CHECK(menu.items == 2);
    }

    SUBCASE("cmd_report aggregates the two seeds into one row") {
        std::vector<fs::path> dirs{results[0].dir, results[1].dir};
        const fs::path rdir = out / "report";
        const auto rows = cmd_report(dirs, rdir);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].runs == 2);
        CHECK(rows[0].name == "tiny_a");
        CHECK(rows[0].algorithm == "algnet");
        CHECK(fs::exists(rdir / "aggregate.csv"));
        // mean is the arithmetic mean of the two finals
        const double expect =
            0.5 * (results[0].final_metrics.rev + results[1].final_metrics.rev);
        CHECK(rows[0].rev_mean == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("single-run report has zero std") {
        std::vector<fs::path> dirs{results[0].dir};
        const auto rows = cmd_report(dirs, out / "report_single");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].rev_std == 0.0);
        CHECK(rows[0].rgt_std == 0.0);
    }

    SUBCASE("mixed estimator provenance refuses aggregation") {
        // rewrite one run's final row with a different estimator token
        const fs::path hacked = out / "tiny_a" / "seed_1" / "final_eval.csv";
        std::ifstream in(hacked);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        in.close();
        const auto pos = row.rfind(",ascent,");
        REQUIRE(pos != std::string::npos);
        row.replace(pos, 8, ",grid,");
        std::ofstream outf(hacked, std::ios::trunc);
        outf << header << "\n" << row << "\n";
        outf.close();
        std::vector<fs::path> dirs{results[0].dir, results[1].dir};
        CHECK_THROWS_AS(cmd_report(dirs, out / "report_mixed"), std::invalid_argument);
    }
}

TEST_CASE("cmd_truthify rejects multi-bidder checkpoints") {
    const fs::path out = fresh_dir("alab_exp_truthify_mb");
    const AuctioneerParams params = AuctioneerParams::init({2, 2}, {1, 6, 1, 6}, 5);
    save_auctioneer(out / "a.bin", params);
    ExperimentConfig cfg = parse_experiment_config(kTinyAlgnetConfig);
    cfg.dist.shape = {2, 2};
    try {
        cmd_truthify(out / "a.bin", cfg, out / "t");
        FAIL("expected out-of-scope error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("out of scope") != std::string::npos);
    }
}

TEST_CASE("cmd_eval rejects shape mismatches") {
    const fs::path out = fresh_dir("alab_exp_eval_shape");
    const AuctioneerParams params = AuctioneerParams::init({2, 3}, {1, 6, 1, 6}, 5);
    save_auctioneer(out / "a.bin", params);
    const ExperimentConfig cfg = parse_experiment_config(kTinyAlgnetConfig);
    CHECK_THROWS_AS(cmd_eval(out / "a.bin", cfg, {}), std::invalid_argument);
}
