#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nostra/domain.hpp"
#include "nostra/errors.hpp"
#include "nostra/gp.hpp"
#include "nostra/pareto.hpp"
#include "nostra/problems.hpp"
#include "nostra/rng.hpp"
#include "nostra/sampling.hpp"
#include "nostra/trust_region.hpp"

namespace nostra {

enum class ClusterMode {
    none,   // plain EHVI baseline, no trust regions
    fixed,  // k-means with a fixed cluster count
    elbow,  // cluster count re-selected each iteration
};

inline std::string to_string(ClusterMode mode) {
    switch (mode) {
        case ClusterMode::none: return "none";
        case ClusterMode::fixed: return "fixed";
        case ClusterMode::elbow: return "elbow";
    }
    return "?";
}

struct OptimizerConfig {
    int d = 2;
    int k_objectives = 2;
    int n_init = 0;   // 0 -> 2 * d
    int budget = 44;  // total evaluations, initial design included
    ClusterMode cluster_mode = ClusterMode::elbow;
    int fixed_k = 4;  // cluster count for ClusterMode::fixed
    int k_max = 10;   // elbow ceiling
    int pool_size = 500;
    int n_prob = 256;  // MC realizations behind the probability field
    int n_ehvi = 256;  // MC samples per candidate EHVI
    int restarts = 8;  // GP fit restarts
    std::vector<HyperPrior> priors;  // per objective; empty -> derived from noise_sd
    std::vector<double> noise_sd;    // known noise sd per objective, raw units
    std::uint64_t seed = 0;
    std::optional<double> stop_epsilon;  // stop once the best weighted EHVI drops below
    bool fixed_pool = false;             // reuse one candidate pool across iterations
    bool denoise_frontier = false;       // frontier from GP means at observed inputs

    int effective_n_init() const { return n_init > 0 ? n_init : 2 * d; }
    int iterations() const { return budget - effective_n_init(); }

    void validate() const {
        if (d < 1) throw ConfigError("OptimizerConfig: d must be positive");
        if (k_objectives < 2) throw ConfigError("OptimizerConfig: need at least two objectives");
        if (effective_n_init() < 2) throw ConfigError("OptimizerConfig: n_init must be at least 2");
        if (budget < effective_n_init()) throw ConfigError("OptimizerConfig: budget below the initial design size");
        if (pool_size < 2) throw ConfigError("OptimizerConfig: pool_size must be at least 2");
        if (n_prob < 1 || n_ehvi < 1) throw ConfigError("OptimizerConfig: MC counts must be positive");
        if (cluster_mode == ClusterMode::fixed && fixed_k < 1) throw ConfigError("OptimizerConfig: fixed_k must be positive");
        if (cluster_mode == ClusterMode::elbow && k_max < 3) throw ConfigError("OptimizerConfig: k_max must be at least 3");
        if (restarts < 1) throw ConfigError("OptimizerConfig: restarts must be positive");
        if (!priors.empty() && static_cast<int>(priors.size()) != k_objectives)
            throw ConfigError("OptimizerConfig: priors must match the objective count");
        if (!noise_sd.empty() && static_cast<int>(noise_sd.size()) != k_objectives)
            throw ConfigError("OptimizerConfig: noise_sd must match the objective count");
    }
};

/// Latin hypercube initial design in the unit box, deterministic per seed.
inline Eigen::MatrixXd init_design(int d, int n_init, std::uint64_t seed) {
    if (n_init < 2) throw ConfigError("init_design: need at least two initial points");
    return latin_hypercube(n_init, d, rng::derive(seed, rng::kInitDesign));
}

/// Everything the selection step computed, for logging and tests.
struct IterationDiagnostics {
    int iteration = 0;  // 1-based, counted after the initial design
    Eigen::VectorXd probs;
    int clusters_used = 1;
    std::vector<double> weights;
    std::vector<double> ehvi;    // per candidate, unweighted
    std::vector<double> scores;  // cluster-weighted
    int chosen = -1;
    double chosen_ehvi = 0.0;
    double chosen_score = 0.0;
};

/// The sequential loop behind one optimization run, exposed ask/tell style:
/// propose() returns the next design to evaluate (raw units) and
/// tell() feeds back its noisy observation. The first n_init proposals come
/// from the initial design; afterwards each proposal runs the full pipeline
/// (surrogate fits, probability field, clustering, weighted EHVI).
///
/// Determinism contract: every random stream is keyed by (seed, iteration,
/// purpose), so a given configuration and seed reproduce the same proposals
/// bit for bit, and configurations that skip a stage (e.g. no clustering)
/// still share the remaining streams.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, DesignDomain domain, RefPoint ref)
        : config_(std::move(config)), domain_(std::move(domain)), ref_(std::move(ref)) {
        config_.validate();
        if (domain_.dim() != config_.d) throw DimensionError("Optimizer: domain dimension mismatch");
        if (ref_.r.size() != config_.k_objectives) throw DimensionError("Optimizer: reference point dimension mismatch");
        init_points_ = init_design(config_.d, config_.effective_n_init(), config_.seed);
    }

    int evaluations() const { return static_cast<int>(observed_y_.size()); }
    bool initializing() const { return evaluations() < config_.effective_n_init(); }
    const OptimizerConfig& config() const { return config_; }
    const DesignDomain& domain() const { return domain_; }
    const RefPoint& ref_point() const { return ref_; }

    /// Next design to evaluate, in raw units.
    Eigen::VectorXd propose() {
        if (initializing()) return domain_.from_unit(init_points_.row(evaluations()).transpose());
        if (!pending_ || pending_for_ != evaluations()) {
            pending_ = select_candidate();
            pending_for_ = evaluations();
        }
        return domain_.from_unit(pending_->first);
    }

    /// Report the observation for a proposed design (raw units).
    void tell(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& y) {
        if (y.size() != config_.k_objectives) throw DimensionError("tell: objective count mismatch");
        if (!y.allFinite()) throw Error("tell: non-finite observation");
        const Eigen::VectorXd u = domain_.to_unit(x_raw);
        if (!DesignDomain::unit(config_.d).contains(u, 1e-9)) throw DomainError("tell: input outside the domain");
        observed_u_.push_back(u);
        observed_y_.push_back(y);
    }

    /// Frontier of the noisy observations made so far.
    ParetoSet current_frontier() const {
        if (observed_y_.empty()) throw Error("current_frontier: no observations");
        return pareto_front(observed_y_);
    }

    const IterationDiagnostics& last_diagnostics() const { return diag_; }
    const std::vector<Eigen::VectorXd>& observed_inputs_unit() const { return observed_u_; }
    const std::vector<Eigen::VectorXd>& observations() const { return observed_y_; }
    const std::vector<GPModel>& models() const { return models_; }

private:
    // one full selection pass; returns (unit-box candidate, diagnostics index)
    std::pair<Eigen::VectorXd, int> select_candidate() {
        const int n = evaluations();
        const int t = n - config_.effective_n_init() + 1;  // iteration number
        const std::uint64_t iter_seed = rng::derive(config_.seed, rng::kIteration, static_cast<std::uint64_t>(t));

        diag_ = IterationDiagnostics{};
        diag_.iteration = t;

        fit_models(iter_seed);
        const CandidatePool pool = build_pool(iter_seed);
        const int m = pool.size();

        Clustering clustering;
        bool weighted = false;
        if (config_.cluster_mode != ClusterMode::none) {
            const auto field =
                pareto_probabilities(pool, config_.n_prob, rng::derive(iter_seed, rng::kProbability));
            diag_.probs = field.probs;
            const int distinct = detail::count_distinct(field.probs);
            const int k_target = config_.cluster_mode == ClusterMode::fixed
                                     ? config_.fixed_k
                                     : elbow_select_k(field.probs, config_.k_max,
                                                      rng::derive(iter_seed, rng::kKMeans, 0));
            const int k_used = std::max(1, std::min(k_target, distinct));
            clustering = kmeans_probs(field.probs, k_used, rng::derive(iter_seed, rng::kKMeans, 1));
            diag_.clusters_used = k_used;
            diag_.weights = clustering.weights;
            weighted = true;
        }

        const ParetoSet frontier = acquisition_frontier();

        diag_.ehvi.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            diag_.ehvi[static_cast<std::size_t>(i)] =
                ehvi_mc(pool.marginals(i), frontier, ref_, config_.n_ehvi,
                        rng::derive(iter_seed, rng::kEhvi, static_cast<std::uint64_t>(i)));
        }
        diag_.scores = weighted ? weighted_scores(diag_.ehvi, clustering) : diag_.ehvi;

        // argmax after a deterministic shuffle, so score ties break uniformly
        // but reproducibly
        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        rng::Engine tie_eng(rng::derive(iter_seed, rng::kTieBreak));
        tie_eng.shuffle(perm);
        int best = perm.front();
        for (int idx : perm) {
            if (diag_.scores[static_cast<std::size_t>(idx)] > diag_.scores[static_cast<std::size_t>(best)]) best = idx;
        }

        diag_.chosen = best;
        diag_.chosen_ehvi = diag_.ehvi[static_cast<std::size_t>(best)];
        diag_.chosen_score = diag_.scores[static_cast<std::size_t>(best)];
        return {pool.inputs.row(best).transpose(), best};
    }

    void fit_models(std::uint64_t iter_seed) {
        const int n = evaluations();
        models_.clear();
        for (int k = 0; k < config_.k_objectives; ++k) {
            TrainingSet train;
            train.inputs.resize(n, config_.d);
            train.outputs.resize(n);
            for (int i = 0; i < n; ++i) {
                train.inputs.row(i) = observed_u_[static_cast<std::size_t>(i)].transpose();
                train.outputs[i] = observed_y_[static_cast<std::size_t>(i)][k];
            }
            const HyperPrior prior = resolve_prior(k, train.outputs);
            try {
                models_.push_back(GPModel::fit_map(train, prior, config_.restarts,
                                                   rng::derive(iter_seed, rng::kFit, static_cast<std::uint64_t>(k))));
            } catch (const Error& err) {
                throw FitError("iteration surrogate fit failed for objective " + std::to_string(k) + ": " +
                               err.what());
            }
        }
    }

    HyperPrior resolve_prior(int k, const Eigen::VectorXd& outputs) const {
        if (!config_.priors.empty()) return config_.priors[static_cast<std::size_t>(k)];
        if (!config_.noise_sd.empty()) {
            const auto [mean, scale] = standardization_constants(outputs);
            (void)mean;
            return prior_from_noise_sd(config_.noise_sd[static_cast<std::size_t>(k)] / scale);
        }
        return HyperPrior{};
    }

    CandidatePool build_pool(std::uint64_t iter_seed) {
        CandidatePool pool;
        if (config_.fixed_pool) {
            if (fixed_pool_inputs_.size() == 0)
                fixed_pool_inputs_ = latin_hypercube(config_.pool_size, config_.d, rng::derive(config_.seed, rng::kPool));
            pool.inputs = fixed_pool_inputs_;
        } else {
            pool.inputs = latin_hypercube(config_.pool_size, config_.d, rng::derive(iter_seed, rng::kPool));
        }
        const int m = static_cast<int>(pool.inputs.rows());
        pool.mean.resize(m, config_.k_objectives);
        pool.var.resize(m, config_.k_objectives);
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < config_.k_objectives; ++k) {
                const auto pred = models_[static_cast<std::size_t>(k)].predict(pool.inputs.row(i).transpose());
                pool.mean(i, k) = pred.mean;
                pool.var(i, k) = pred.variance;
            }
        }
        return pool;
    }

    ParetoSet acquisition_frontier() const {
        if (!config_.denoise_frontier) return pareto_front(observed_y_);
        std::vector<ObjectiveVector> denoised(observed_u_.size(), ObjectiveVector(config_.k_objectives));
        for (std::size_t i = 0; i < observed_u_.size(); ++i) {
            for (int k = 0; k < config_.k_objectives; ++k)
                denoised[i][k] = models_[static_cast<std::size_t>(k)].predict(observed_u_[i]).mean;
        }
        return pareto_front(denoised);
    }

    OptimizerConfig config_;
    DesignDomain domain_;
    RefPoint ref_;
    Eigen::MatrixXd init_points_;  // unit box
    std::vector<Eigen::VectorXd> observed_u_;
    std::vector<Eigen::VectorXd> observed_y_;
    std::vector<GPModel> models_;
    Eigen::MatrixXd fixed_pool_inputs_;
    IterationDiagnostics diag_;
    std::optional<std::pair<Eigen::VectorXd, int>> pending_;
    int pending_for_ = -1;
};

/// Per-iteration trace entry of a finished run. Wall-clock fields are
/// process-local diagnostics and are never serialized, so that a run's
/// persisted outputs are a pure function of (config, seed).
struct IterationLog {
    Eigen::VectorXd input;     // raw units
    Eigen::VectorXd observed;  // noisy objective values
    double ehvi = 0.0;         // unweighted EHVI of the chosen candidate
    double ehvi_weighted = 0.0;
    int clusters_used = 1;
    double wall_seconds = 0.0;
    double elapsed_seconds = 0.0;  // since run start; monotone across iterations
};

/// Full trace of one optimization replication.
struct ExperimentRecord {
    std::string problem;
    std::string method;
    double noise_fraction = 0.0;
    OptimizerConfig config;
    Eigen::VectorXd ref_point;
    Eigen::MatrixXd init_inputs;    // raw units
    Eigen::MatrixXd init_observed;  // noisy values
    std::vector<IterationLog> iterations;
    ParetoSet final_frontier;  // of the noisy observations
    std::uint64_t seed = 0;
};

/// Reference point for a problem: component-wise dense-grid maximum of each
/// objective, inflated by 10% of its range. Fixed per experiment so EHVI
/// curves are comparable across iterations and methods.
inline RefPoint reference_point_for(const TestProblem& problem) {
    RefPoint ref;
    ref.r = problem.f_max + 0.1 * (problem.f_max - problem.f_min);
    return ref;
}

/// Drive a full optimization run against a registered problem: initial
/// design, then iterate until the budget is exhausted or the best weighted
/// EHVI falls below stop_epsilon.
inline ExperimentRecord run(OptimizerConfig config, const TestProblem& problem) {
    config.d = problem.dim();
    config.k_objectives = problem.num_objectives();
    if (config.noise_sd.empty() && config.priors.empty()) {
        const Eigen::VectorXd ranges = problem.ranges();
        config.noise_sd.resize(static_cast<std::size_t>(problem.num_objectives()));
        for (int k = 0; k < problem.num_objectives(); ++k)
            config.noise_sd[static_cast<std::size_t>(k)] = problem.noise_fraction * ranges[k];
    }
    config.validate();

    const auto t_start = std::chrono::steady_clock::now();
    Optimizer opt(config, problem.domain, reference_point_for(problem));

    ExperimentRecord record;
    record.problem = problem.name;
    record.method = to_string(config.cluster_mode);
    record.noise_fraction = problem.noise_fraction;
    record.config = config;
    record.ref_point = opt.ref_point().r;
    record.seed = config.seed;

    const int n_init = config.effective_n_init();
    record.init_inputs.resize(n_init, config.d);
    record.init_observed.resize(n_init, config.k_objectives);

    int eval_index = 0;
    for (; eval_index < n_init; ++eval_index) {
        const Eigen::VectorXd x = opt.propose();
        const auto obs = observe(problem, x, rng::derive(config.seed, rng::kObservation,
                                                         static_cast<std::uint64_t>(eval_index)));
        opt.tell(x, obs.values);
        record.init_inputs.row(eval_index) = x.transpose();
        record.init_observed.row(eval_index) = obs.values.transpose();
    }

    while (eval_index < config.budget) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::VectorXd x = opt.propose();
        const auto obs = observe(problem, x, rng::derive(config.seed, rng::kObservation,
                                                         static_cast<std::uint64_t>(eval_index)));
        opt.tell(x, obs.values);
        ++eval_index;
        const auto t1 = std::chrono::steady_clock::now();

        const auto& diag = opt.last_diagnostics();
        IterationLog log;
        log.input = x;
        log.observed = obs.values;
        log.ehvi = diag.chosen_ehvi;
        log.ehvi_weighted = diag.chosen_score;
        log.clusters_used = diag.clusters_used;
        log.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        log.elapsed_seconds = std::chrono::duration<double>(t1 - t_start).count();
        record.iterations.push_back(std::move(log));

        if (config.stop_epsilon && !(diag.chosen_score >= *config.stop_epsilon)) break;
    }

    record.final_frontier = opt.current_frontier();
    return record;
}

}  // namespace nostra
