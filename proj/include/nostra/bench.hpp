#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "nostra/errors.hpp"
#include "nostra/optimizer.hpp"
#include "nostra/problems.hpp"
#include "nostra/rng.hpp"

namespace nostra {

/// A named optimizer variant: the plain-EHVI baseline, fixed trust-region
/// counts, or elbow-selected counts.
struct MethodSpec {
    std::string name;
    ClusterMode mode = ClusterMode::none;
    int fixed_k = 1;
};

inline MethodSpec parse_method(const std::string& name) {
    if (name == "baseline") return {"baseline", ClusterMode::none, 1};
    if (name == "fixed1") return {"fixed1", ClusterMode::fixed, 1};
    if (name == "fixed4") return {"fixed4", ClusterMode::fixed, 4};
    if (name == "fixed10") return {"fixed10", ClusterMode::fixed, 10};
    if (name == "elbow") return {"elbow", ClusterMode::elbow, 0};
    throw ConfigError("unknown method \"" + name + "\" (expected baseline, fixed1, fixed4, fixed10 or elbow)");
}

struct BenchConfig {
    std::string problem = "branin-currin";
    std::vector<std::string> methods = {"baseline", "elbow"};
    int replications = 20;
    int budget = 40;  // adaptive evaluations after the initial design
    std::vector<double> noise = {0.05};
    std::uint64_t seed = 0;
    std::string out_dir = "results";
    int pool_size = 500;
    int mc_prob = 256;
    int mc_ehvi = 256;
    bool fixed_pool = false;
    int n_init = 0;  // 0 -> 2 * d
    int restarts = 8;
    int workers = 0;  // 0 -> hardware concurrency

    void validate() const {
        if (methods.empty()) throw ConfigError("BenchConfig: method list is empty");
        if (replications < 1) throw ConfigError("BenchConfig: replications must be at least 1");
        if (budget < 1) throw ConfigError("BenchConfig: budget must be at least 1");
        if (noise.empty()) throw ConfigError("BenchConfig: noise list is empty");
        for (double rho : noise) {
            if (!(rho >= 0.0) || !(rho < 1.0)) throw ConfigError("BenchConfig: noise fractions must lie in [0, 1)");
        }
        for (const auto& m : methods) (void)parse_method(m);
    }
};

/// Mean EHVI per iteration across replications, with its standard error and
/// the mean +/- 2 SE band.
struct CurveSummary {
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t size() const { return mean.size(); }
};

/// Aggregate the unweighted selected-candidate EHVI across replications.
inline CurveSummary aggregate(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw ConfigError("aggregate: no records");
    const std::size_t iters = records.front().iterations.size();
    for (const auto& rec : records) {
        if (rec.iterations.size() != iters) throw DimensionError("aggregate: records differ in iteration count");
    }
    const double reps = static_cast<double>(records.size());
    CurveSummary curve;
    curve.mean.resize(iters);
    curve.se.resize(iters);
    curve.lo.resize(iters);
    curve.hi.resize(iters);
    for (std::size_t i = 0; i < iters; ++i) {
        double sum = 0.0;
        for (const auto& rec : records) sum += rec.iterations[i].ehvi;
        const double mean = sum / reps;
        double se = 0.0;
        if (records.size() > 1) {
            double ss = 0.0;
            for (const auto& rec : records) {
                const double d = rec.iterations[i].ehvi - mean;
                ss += d * d;
            }
            se = std::sqrt(ss / (reps - 1.0)) / std::sqrt(reps);
        }
        curve.mean[i] = mean;
        curve.se[i] = se;
        curve.lo[i] = mean - 2.0 * se;
        curve.hi[i] = mean + 2.0 * se;
    }
    return curve;
}

struct CellOutcome {
    int method_index = 0;
    int noise_index = 0;
    int replication = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    ExperimentRecord record;
};

struct BenchResult {
    BenchConfig config;
    // indexed [method][noise]
    std::vector<std::vector<std::vector<CellOutcome>>> cells;
    std::vector<std::vector<CurveSummary>> curves;  // aggregated over successful cells
    int failed_cells = 0;
};

/// Execute every (method x noise x replication) cell. Cells run in a worker
/// pool; each derives its seed from (master seed, flat cell index), so the
/// outcome is identical regardless of scheduling.
inline BenchResult run_bench(const BenchConfig& config) {
    config.validate();

    std::vector<MethodSpec> methods;
    for (const auto& name : config.methods) methods.push_back(parse_method(name));

    // problems are immutable after construction and shared across cells
    std::vector<TestProblem> problems;
    for (double rho : config.noise) problems.push_back(get_problem(config.problem, rho));
    const int d = problems.front().dim();
    const int n_init = config.n_init > 0 ? config.n_init : 2 * d;

    struct Cell {
        int method, noise, rep, flat;
    };
    std::vector<Cell> cell_list;
    int flat = 0;
    for (int mi = 0; mi < static_cast<int>(methods.size()); ++mi)
        for (int ni = 0; ni < static_cast<int>(config.noise.size()); ++ni)
            for (int r = 0; r < config.replications; ++r) cell_list.push_back({mi, ni, r, flat++});

    std::vector<CellOutcome> outcomes(cell_list.size());
    std::atomic<std::size_t> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_workers =
        config.workers > 0 ? static_cast<unsigned>(config.workers) : std::max(1u, hw);

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cell_list.size()) return;
            const Cell& cell = cell_list[i];
            CellOutcome& out = outcomes[i];
            out.method_index = cell.method;
            out.noise_index = cell.noise;
            out.replication = cell.rep;
            out.seed = rng::derive(config.seed, rng::kCell, static_cast<std::uint64_t>(cell.flat));
            try {
                OptimizerConfig opt;
                opt.d = d;
                opt.n_init = n_init;
                opt.budget = n_init + config.budget;
                opt.cluster_mode = methods[static_cast<std::size_t>(cell.method)].mode;
                opt.fixed_k = std::max(1, methods[static_cast<std::size_t>(cell.method)].fixed_k);
                opt.pool_size = config.pool_size;
                opt.n_prob = config.mc_prob;
                opt.n_ehvi = config.mc_ehvi;
                opt.fixed_pool = config.fixed_pool;
                opt.restarts = config.restarts;
                opt.seed = out.seed;
                out.record = run(opt, problems[static_cast<std::size_t>(cell.noise)]);
                out.record.method = methods[static_cast<std::size_t>(cell.method)].name;
                out.ok = true;
            } catch (const std::exception& err) {
                out.ok = false;
                out.error = err.what();
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    BenchResult result;
    result.config = config;
    result.cells.assign(methods.size(), std::vector<std::vector<CellOutcome>>(
                                            config.noise.size(), std::vector<CellOutcome>()));
    result.curves.assign(methods.size(), std::vector<CurveSummary>(config.noise.size()));
    for (auto& out : outcomes) {
        if (!out.ok) ++result.failed_cells;
        result.cells[static_cast<std::size_t>(out.method_index)][static_cast<std::size_t>(out.noise_index)]
            .push_back(std::move(out));
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (std::size_t ni = 0; ni < config.noise.size(); ++ni) {
            std::vector<ExperimentRecord> records;
            for (const auto& out : result.cells[mi][ni])
                if (out.ok) records.push_back(out.record);
            if (!records.empty()) result.curves[mi][ni] = aggregate(records);
        }
    }
    return result;
}

/// Noise sweep: the elbow configuration across the standard noise levels,
/// one curve per level.
inline BenchResult noise_sweep(BenchConfig config) {
    config.methods = {"elbow"};
    if (config.noise.empty()) config.noise = {0.05, 0.10, 0.15, 0.20};
    return run_bench(config);
}

// ---------------------------------------------------------------------------
// output writing

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string noise_label(double rho) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", rho * 100.0);
    return buf;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back(vector_to_json(m.row(i).transpose()));
    return arr;
}

}  // namespace detail

/// CSV with the stable schema (iteration, mean_ehvi, se, lo, hi); header row
/// always present, iterations 1-based.
inline void write_curve_csv(const std::string& path, const CurveSummary& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "iteration,mean_ehvi,se,lo,hi\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << (i + 1) << ',' << detail::format_double(curve.mean[i]) << ',' << detail::format_double(curve.se[i])
            << ',' << detail::format_double(curve.lo[i]) << ',' << detail::format_double(curve.hi[i]) << '\n';
    }
}

/// JSON form of a replication record. Deliberately excludes wall-clock
/// timings: persisted outputs must be a pure function of (config, seed).
inline nlohmann::json record_to_json(const ExperimentRecord& record) {
    nlohmann::json j;
    j["schema"] = "nostra-record-v1";
    j["problem"] = record.problem;
    j["method"] = record.method;
    j["noise_fraction"] = record.noise_fraction;
    j["seed"] = record.seed;
    j["rng"] = {{"scheme", "xoshiro256++/splitmix64 derived streams"}, {"master_seed", record.seed}};
    j["config"] = {
        {"d", record.config.d},
        {"k_objectives", record.config.k_objectives},
        {"n_init", record.config.effective_n_init()},
        {"budget", record.config.budget},
        {"cluster_mode", to_string(record.config.cluster_mode)},
        {"fixed_k", record.config.fixed_k},
        {"k_max", record.config.k_max},
        {"pool_size", record.config.pool_size},
        {"n_prob", record.config.n_prob},
        {"n_ehvi", record.config.n_ehvi},
        {"restarts", record.config.restarts},
        {"fixed_pool", record.config.fixed_pool},
    };
    j["reference_point"] = detail::vector_to_json(record.ref_point);
    j["init"] = {{"inputs", detail::matrix_to_json(record.init_inputs)},
                 {"observations", detail::matrix_to_json(record.init_observed)}};
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : record.iterations) {
        iters.push_back({{"input", detail::vector_to_json(it.input)},
                         {"observed", detail::vector_to_json(it.observed)},
                         {"ehvi", it.ehvi},
                         {"ehvi_weighted", it.ehvi_weighted},
                         {"clusters", it.clusters_used}});
    }
    j["iterations"] = std::move(iters);
    nlohmann::json frontier;
    frontier["indices"] = record.final_frontier.source_indices;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : record.final_frontier.points) pts.push_back(detail::vector_to_json(p));
    frontier["points"] = std::move(pts);
    j["frontier"] = std::move(frontier);
    return j;
}

/// Write curves, records and a manifest for a finished benchmark under
/// config.out_dir. Returns the process exit code: 0 on success, 1 when any
/// cell failed numerically.
inline int write_outputs(const BenchResult& result) {
    const BenchConfig& config = result.config;
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);

    nlohmann::json manifest;
    manifest["schema"] = "nostra-bench-v1";
    manifest["problem"] = config.problem;
    manifest["seed"] = config.seed;
    manifest["budget"] = config.budget;
    manifest["replications"] = config.replications;
    manifest["methods"] = config.methods;
    manifest["noise"] = config.noise;
    manifest["pool_size"] = config.pool_size;
    manifest["mc_prob"] = config.mc_prob;
    manifest["mc_ehvi"] = config.mc_ehvi;
    manifest["fixed_pool"] = config.fixed_pool;
    nlohmann::json curve_entries = nlohmann::json::array();
    nlohmann::json record_entries = nlohmann::json::array();
    nlohmann::json failed = nlohmann::json::array();

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        for (std::size_t ni = 0; ni < config.noise.size(); ++ni) {
            const std::string tag = config.methods[mi] + "_noise" + detail::noise_label(config.noise[ni]);
            const auto& cell_outcomes = result.cells[mi][ni];

            bool any_ok = false;
            for (const auto& out : cell_outcomes) {
                const std::string rec_name = "rec_" + tag + "_rep" + std::to_string(out.replication) + ".json";
                if (out.ok) {
                    any_ok = true;
                    std::ofstream rec_out(fs::path(config.out_dir) / rec_name, std::ios::binary);
                    rec_out << record_to_json(out.record).dump(2) << '\n';
                    record_entries.push_back({{"file", rec_name},
                                              {"method", config.methods[mi]},
                                              {"noise", config.noise[ni]},
                                              {"replication", out.replication},
                                              {"seed", out.seed}});
                } else {
                    failed.push_back({{"method", config.methods[mi]},
                                      {"noise", config.noise[ni]},
                                      {"replication", out.replication},
                                      {"error", out.error}});
                }
            }
            if (any_ok) {
                const std::string curve_name = "curve_" + tag + ".csv";
                write_curve_csv((fs::path(config.out_dir) / curve_name).string(), result.curves[mi][ni]);
                curve_entries.push_back({{"file", curve_name},
                                         {"method", config.methods[mi]},
                                         {"noise", config.noise[ni]},
                                         {"label", "Error: " + detail::noise_label(config.noise[ni]) + "%"}});
            }
        }
    }
    manifest["curves"] = std::move(curve_entries);
    manifest["records"] = std::move(record_entries);
    manifest["failed_cells"] = std::move(failed);
    {
        std::ofstream mano(fs::path(config.out_dir) / "manifest.json", std::ios::binary);
        mano << manifest.dump(2) << '\n';
    }
    return result.failed_cells == 0 ? 0 : 1;
}

/// Run the whole benchmark and persist its outputs.
inline int cli_run(const BenchConfig& config) { return write_outputs(run_bench(config)); }

}  // namespace nostra
