// Benchmark harness CLI: multi-replication optimization runs, method
// comparisons and noise sweeps, emitting CSV convergence curves and JSON
// replication records.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nostra/bench.hpp"

namespace {

// --config JSON overrides any flag it names
void apply_config_file(const std::string& path, nostra::BenchConfig& config) {
    std::ifstream in(path);
    if (!in) throw nostra::ConfigError("cannot read config file " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("problem")) config.problem = j["problem"].get<std::string>();
    if (j.contains("methods")) config.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("replications")) config.replications = j["replications"].get<int>();
    if (j.contains("budget")) config.budget = j["budget"].get<int>();
    if (j.contains("noise")) config.noise = j["noise"].get<std::vector<double>>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) config.out_dir = j["out"].get<std::string>();
    if (j.contains("pool_size")) config.pool_size = j["pool_size"].get<int>();
    if (j.contains("mc_prob")) config.mc_prob = j["mc_prob"].get<int>();
    if (j.contains("mc_ehvi")) config.mc_ehvi = j["mc_ehvi"].get<int>();
    if (j.contains("fixed_pool")) config.fixed_pool = j["fixed_pool"].get<bool>();
    if (j.contains("n_init")) config.n_init = j["n_init"].get<int>();
    if (j.contains("restarts")) config.restarts = j["restarts"].get<int>();
    if (j.contains("workers")) config.workers = j["workers"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nostra_bench: multi-objective Bayesian optimization benchmark harness"};

    nostra::BenchConfig config;
    std::string config_path;
    bool sweep = false;

    app.add_option("--problem", config.problem,
                   "Problem name: bohachevsky-sphere, branin-currin, branin, currin")
        ->capture_default_str();
    app.add_option("--methods", config.methods,
                   "Comma-separated method list: baseline, fixed1, fixed4, fixed10, elbow")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--reps", config.replications, "Replications per (method, noise) cell")->capture_default_str();
    app.add_option("--budget", config.budget, "Adaptive evaluations after the initial design")
        ->capture_default_str();
    app.add_option("--noise", config.noise, "Comma-separated noise fractions, e.g. 0.05,0.1")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--seed", config.seed, "Master seed; determines every output byte")->capture_default_str();
    app.add_option("--out", config.out_dir, "Output directory")->capture_default_str();
    app.add_option("--config", config_path, "JSON config file; overrides flags");
    app.add_option("--pool-size", config.pool_size, "Candidate pool size M")->capture_default_str();
    app.add_option("--mc-prob", config.mc_prob, "MC realizations for Pareto probabilities")->capture_default_str();
    app.add_option("--mc-ehvi", config.mc_ehvi, "MC samples per candidate EHVI")->capture_default_str();
    app.add_flag("--fixed-pool", config.fixed_pool, "Reuse one candidate pool across iterations");
    app.add_option("--n-init", config.n_init, "Initial design size (0 = 2*d)")->capture_default_str();
    app.add_option("--restarts", config.restarts, "GP fit restarts")->capture_default_str();
    app.add_option("--workers", config.workers, "Worker threads (0 = hardware)")->capture_default_str();
    app.add_flag("--noise-sweep", sweep, "Run the elbow configuration across the noise list");

    try {
        app.parse(argc, argv);
        if (!config_path.empty()) apply_config_file(config_path, config);
        config.validate();
        (void)nostra::get_problem(config.problem, config.noise.front());  // fail fast on a bad name
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    }

    try {
        const int code = sweep ? [&] {
            nostra::BenchConfig sweep_config = config;
            if (sweep_config.noise.size() == 1 && sweep_config.noise.front() == 0.05)
                sweep_config.noise = {0.05, 0.10, 0.15, 0.20};
            sweep_config.methods = {"elbow"};
            return nostra::cli_run(sweep_config);
        }()
                                : nostra::cli_run(config);
        if (code != 0) std::cerr << "one or more cells failed; see manifest.json\n";
        return code;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
