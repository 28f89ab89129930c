#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nostra/bench.hpp"

using nostra::aggregate;
using nostra::BenchConfig;
using nostra::cli_run;
using nostra::ExperimentRecord;
using nostra::parse_method;

namespace fs = std::filesystem;

namespace {

ExperimentRecord record_with_ehvi(const std::vector<double>& values) {
    ExperimentRecord rec;
    for (double v : values) {
        nostra::IterationLog log;
        log.ehvi = v;
        rec.iterations.push_back(log);
    }
    return rec;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BenchConfig tiny_bench(const std::string& out) {
    BenchConfig config;
    config.problem = "branin-currin";
    config.methods = {"baseline", "elbow"};
    config.replications = 2;
    config.budget = 3;
    config.noise = {0.05};
    config.seed = 7;
    config.out_dir = out;
    config.pool_size = 30;
    config.mc_prob = 32;
    config.mc_ehvi = 32;
    config.restarts = 2;
    return config;
}

}  // namespace

TEST_CASE("parse_method: names and failure") {
    REQUIRE(parse_method("baseline").mode == nostra::ClusterMode::none);
    REQUIRE(parse_method("fixed4").fixed_k == 4);
    REQUIRE(parse_method("fixed10").fixed_k == 10);
    REQUIRE(parse_method("elbow").mode == nostra::ClusterMode::elbow);
    REQUIRE_THROWS_AS(parse_method("magic"), nostra::ConfigError);
}

TEST_CASE("aggregate: examples") {
    // identical records -> zero SE, mean equals the curve
    const auto rec = record_with_ehvi({1.0, 0.5, 0.25});
    const auto identical = aggregate({rec, rec, rec});
    REQUIRE(identical.mean == std::vector<double>{1.0, 0.5, 0.25});
    REQUIRE(identical.se == std::vector<double>{0.0, 0.0, 0.0});

    // two records with {1, 3}: mean 2, sd = sqrt(2), SE = 1
    const auto two = aggregate({record_with_ehvi({1.0}), record_with_ehvi({3.0})});
    REQUIRE(two.mean[0] == Approx(2.0));
    REQUIRE(two.se[0] == Approx(1.0));
    REQUIRE(two.lo[0] == Approx(0.0));
    REQUIRE(two.hi[0] == Approx(4.0));

    // permuting the record order changes nothing
    const auto a = record_with_ehvi({1.0, 2.0});
    const auto b = record_with_ehvi({5.0, 0.0});
    const auto c = record_with_ehvi({2.0, 1.0});
    const auto fwd = aggregate({a, b, c});
    const auto rev = aggregate({c, b, a});
    REQUIRE(fwd.mean == rev.mean);
    REQUIRE(fwd.se == rev.se);

    // single record -> all-zero SE column
    const auto solo = aggregate({a});
    REQUIRE(solo.se == std::vector<double>{0.0, 0.0});

    REQUIRE_THROWS_AS(aggregate({a, record_with_ehvi({1.0})}), nostra::DimensionError);
    REQUIRE_THROWS_AS(aggregate({}), nostra::ConfigError);
}

TEST_CASE("cli_run: file-count contract and CSV schema") {
    const fs::path out = fs::temp_directory_path() / "nostra_bench_test_a";
    fs::remove_all(out);
    const auto config = tiny_bench(out.string());
    REQUIRE(cli_run(config) == 0);

    // 2 methods x 1 noise: 2 curves; 2 methods x 1 noise x 2 reps: 4 records
    int curves = 0, records = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("curve_", 0) == 0) ++curves;
        if (name.rfind("rec_", 0) == 0) ++records;
    }
    REQUIRE(curves == 2);
    REQUIRE(records == 4);
    REQUIRE(fs::exists(out / "manifest.json"));

    const std::string csv = slurp(out / "curve_baseline_noise5.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    REQUIRE(header == "iteration,mean_ehvi,se,lo,hi");
    int rows = 0;
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++rows;
    REQUIRE(rows == config.budget);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    REQUIRE(manifest["curves"].size() == 2);
    REQUIRE(manifest["curves"][0]["label"] == "Error: 5%");
    REQUIRE(manifest["failed_cells"].empty());
}

TEST_CASE("cli_run: byte-identical reruns") {
    const fs::path out_a = fs::temp_directory_path() / "nostra_bench_test_b1";
    const fs::path out_b = fs::temp_directory_path() / "nostra_bench_test_b2";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    auto config = tiny_bench(out_a.string());
    REQUIRE(cli_run(config) == 0);
    config.out_dir = out_b.string();
    REQUIRE(cli_run(config) == 0);

    for (const auto& entry : fs::directory_iterator(out_a)) {
        const auto name = entry.path().filename();
        INFO(name.string());
        REQUIRE(slurp(entry.path()) == slurp(out_b / name));
    }
}

TEST_CASE("record JSON excludes wall-clock fields") {
    const auto problem = nostra::make_branin_currin(0.05);
    nostra::OptimizerConfig config;
    config.budget = 6;
    config.pool_size = 20;
    config.n_prob = 16;
    config.n_ehvi = 16;
    config.restarts = 2;
    config.seed = 3;
    const auto record = nostra::run(config, problem);
    const auto j = nostra::record_to_json(record);
    REQUIRE(j["iterations"].size() == 2);
    for (const auto& it : j["iterations"]) {
        REQUIRE_FALSE(it.contains("wall_seconds"));
        REQUIRE_FALSE(it.contains("elapsed_seconds"));
        REQUIRE(it.contains("ehvi"));
        REQUIRE(it.contains("ehvi_weighted"));
        REQUIRE(it.contains("clusters"));
    }
    REQUIRE(j["frontier"]["points"].size() == j["frontier"]["indices"].size());
}

TEST_CASE("noise_sweep: forces the elbow method, one curve per level") {
    BenchConfig config = tiny_bench((fs::temp_directory_path() / "nostra_bench_test_c").string());
    fs::remove_all(config.out_dir);
    config.noise = {0.05, 0.2};
    config.replications = 1;
    const auto result = nostra::noise_sweep(config);
    REQUIRE(result.config.methods == std::vector<std::string>{"elbow"});
    REQUIRE(result.curves.size() == 1);
    REQUIRE(result.curves[0].size() == 2);
    REQUIRE(result.curves[0][0].size() == static_cast<std::size_t>(config.budget));
    REQUIRE(result.failed_cells == 0);
}

TEST_CASE("noise_sweep: a noise-free control runs clean and is emitted as its own curve") {
    BenchConfig config = tiny_bench((fs::temp_directory_path() / "nostra_bench_test_d").string());
    fs::remove_all(config.out_dir);
    config.noise = {0.0, 0.2};
    config.replications = 3;
    config.budget = 6;
    config.seed = 11;
    const auto result = nostra::noise_sweep(config);
    REQUIRE(result.failed_cells == 0);
    REQUIRE(nostra::write_outputs(result) == 0);

    const auto manifest = nlohmann::json::parse(slurp(fs::path(config.out_dir) / "manifest.json"));
    REQUIRE(manifest["curves"].size() == 2);
    REQUIRE(manifest["curves"][0]["label"] == "Error: 0%");
    REQUIRE(manifest["curves"][1]["label"] == "Error: 20%");

    // noise-free replications observe the functions exactly; every recorded
    // observation must re-evaluate bit-identically
    const auto problem = nostra::get_problem(config.problem, 0.0);
    const auto& outcomes = result.cells[0][0];
    for (const auto& cell : outcomes) {
        for (const auto& it : cell.record.iterations)
            REQUIRE(it.observed == problem.evaluate_noiseless(it.input));
    }
}

TEST_CASE("bench config validation") {
    BenchConfig config;
    config.methods = {};
    REQUIRE_THROWS_AS(config.validate(), nostra::ConfigError);
    config = BenchConfig{};
    config.noise = {1.5};
    REQUIRE_THROWS_AS(config.validate(), nostra::ConfigError);
    config = BenchConfig{};
    config.replications = 0;
    REQUIRE_THROWS_AS(config.validate(), nostra::ConfigError);
}
