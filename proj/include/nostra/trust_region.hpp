#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "nostra/errors.hpp"
#include "nostra/pareto.hpp"
#include "nostra/rng.hpp"

namespace nostra {

/// Space-filling candidate designs with cached per-objective posterior
/// summaries. Everything downstream of the surrogates (probabilities,
/// clustering, acquisition) reads from here.
struct CandidatePool {
    Eigen::MatrixXd inputs;  // M x D, unit box
    Eigen::MatrixXd mean;    // M x K
    Eigen::MatrixXd var;     // M x K

    int size() const { return static_cast<int>(inputs.rows()); }
    int objectives() const { return static_cast<int>(mean.cols()); }

    void validate() const {
        // a singleton pool is degenerate but well-defined (it is always its
        // own frontier); the optimizer enforces M >= 2 at the config level
        if (inputs.rows() < 1) throw ConfigError("CandidatePool: empty pool");
        if (mean.rows() != inputs.rows() || var.rows() != inputs.rows() || mean.cols() != var.cols())
            throw DimensionError("CandidatePool: posterior summary shape mismatch");
        if ((var.array() < 0.0).any()) throw Error("CandidatePool: negative posterior variance");
    }

    std::vector<Marginal> marginals(int i) const {
        std::vector<Marginal> out(static_cast<std::size_t>(objectives()));
        for (int k = 0; k < objectives(); ++k) out[static_cast<std::size_t>(k)] = {mean(i, k), var(i, k)};
        return out;
    }
};

/// Per-candidate estimates of the probability of lying on the Pareto
/// frontier of the pool, from N Monte Carlo realizations.
struct ParetoProbabilityField {
    Eigen::VectorXd probs;
    int n_used = 0;
};

/// Estimate Pareto-membership probabilities by drawing joint realizations of
/// all candidates (independent marginals per objective), extracting each
/// realization's frontier, and counting memberships. Deterministic per seed;
/// realizations use derived streams and may be evaluated in any order.
inline ParetoProbabilityField pareto_probabilities(const CandidatePool& pool, int n_realizations,
                                                   std::uint64_t seed) {
    pool.validate();
    if (n_realizations < 1) throw ConfigError("pareto_probabilities: need at least one realization");
    const int m = pool.size();
    const int k = pool.objectives();

    const Eigen::MatrixXd sd = pool.var.array().sqrt();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    std::vector<double> f1(static_cast<std::size_t>(m)), f2(static_cast<std::size_t>(m));
    std::vector<ObjectiveVector> realization;
    if (k != 2) realization.assign(static_cast<std::size_t>(m), ObjectiveVector(k));

    for (int j = 0; j < n_realizations; ++j) {
        if (k == 2) {
            rng::Engine e0(rng::derive(seed, rng::kRealization, static_cast<std::uint64_t>(j), 0));
            for (int i = 0; i < m; ++i) f1[static_cast<std::size_t>(i)] = pool.mean(i, 0) + sd(i, 0) * e0.normal();
            rng::Engine e1(rng::derive(seed, rng::kRealization, static_cast<std::uint64_t>(j), 1));
            for (int i = 0; i < m; ++i) f2[static_cast<std::size_t>(i)] = pool.mean(i, 1) + sd(i, 1) * e1.normal();
            for (int idx : detail::pareto_front_indices_2d(f1, f2)) counts[idx] += 1.0;
        } else {
            for (int kk = 0; kk < k; ++kk) {
                rng::Engine e(rng::derive(seed, rng::kRealization, static_cast<std::uint64_t>(j),
                                          static_cast<std::uint64_t>(kk)));
                for (int i = 0; i < m; ++i)
                    realization[static_cast<std::size_t>(i)][kk] = pool.mean(i, kk) + sd(i, kk) * e.normal();
            }
            for (int idx : detail::pareto_front_indices_generic(realization)) counts[idx] += 1.0;
        }
    }

    ParetoProbabilityField field;
    field.probs = counts / static_cast<double>(n_realizations);
    field.n_used = n_realizations;
    return field;
}

/// K-means result over the scalar probability values. Centers are sorted
/// ascending and labels relabeled accordingly, so equal inputs give equal
/// outputs regardless of seeding order.
struct Clustering {
    int k = 0;
    std::vector<int> assignment;  // size M, labels in [0, k)
    std::vector<double> centers;  // ascending
    std::vector<double> weights;  // mean member probability per cluster
};

/// Per-iteration WCSS values recorded by kmeans_probs when requested.
struct KMeansTrace {
    std::vector<double> wcss;  // non-increasing across Lloyd iterations
};

namespace detail {

inline int count_distinct(const Eigen::VectorXd& values) {
    std::set<double> s(values.data(), values.data() + values.size());
    return static_cast<int>(s.size());
}

inline double wcss_of(const Eigen::VectorXd& probs, const std::vector<int>& assignment,
                      const std::vector<double>& centers) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double d = probs[i] - centers[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
        total += d * d;
    }
    return total;
}

}  // namespace detail

/// Per-cluster arithmetic mean of member probabilities (the acquisition
/// weights w_cl). Throws on an empty cluster.
inline std::vector<double> cluster_weights(const Eigen::VectorXd& probs, const Clustering& clustering) {
    if (static_cast<Eigen::Index>(clustering.assignment.size()) != probs.size())
        throw DimensionError("cluster_weights: assignment/probability size mismatch");
    std::vector<double> sums(static_cast<std::size_t>(clustering.k), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(clustering.k), 0);
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const int c = clustering.assignment[static_cast<std::size_t>(i)];
        if (c < 0 || c >= clustering.k) throw ClusteringError("cluster_weights: label out of range");
        sums[static_cast<std::size_t>(c)] += probs[i];
        counts[static_cast<std::size_t>(c)] += 1;
    }
    std::vector<double> weights(static_cast<std::size_t>(clustering.k));
    for (int c = 0; c < clustering.k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) throw ClusteringError("cluster_weights: empty cluster");
        weights[static_cast<std::size_t>(c)] = sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
    }
    return weights;
}

/// Lloyd's algorithm on the 1-D probability values with k-means++-style
/// seeding. Requires k at most the number of distinct values. Deterministic
/// per seed.
inline Clustering kmeans_probs(const Eigen::VectorXd& probs, int k, std::uint64_t seed, int max_iter = 100,
                               KMeansTrace* trace = nullptr) {
    const int m = static_cast<int>(probs.size());
    if (m < 1) throw ClusteringError("kmeans_probs: empty input");
    const int distinct = detail::count_distinct(probs);
    if (k < 1 || k > distinct)
        throw ClusteringError("kmeans_probs: k must lie in [1, distinct values] (k=" + std::to_string(k) +
                              ", distinct=" + std::to_string(distinct) + ")");

    rng::Engine eng(seed);
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(probs[static_cast<Eigen::Index>(eng.uniform_int(static_cast<std::uint64_t>(m)))]);
    std::vector<double> dist2(static_cast<std::size_t>(m));
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (probs[i] - c) * (probs[i] - c));
            dist2[static_cast<std::size_t>(i)] = best;
            total += best;
        }
        // total > 0 is guaranteed while centers < distinct values
        double u = eng.uniform() * total;
        int chosen = -1;
        for (int i = 0; i < m; ++i) {
            if (dist2[static_cast<std::size_t>(i)] <= 0.0) continue;
            chosen = i;
            u -= dist2[static_cast<std::size_t>(i)];
            if (u <= 0.0) break;
        }
        centers.push_back(probs[chosen]);
    }

    std::vector<int> assignment(static_cast<std::size_t>(m), 0);
    auto assign_all = [&]() {
        bool changed = false;
        for (int i = 0; i < m; ++i) {
            int best_c = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (probs[i] - centers[static_cast<std::size_t>(c)]) *
                                 (probs[i] - centers[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            if (assignment[static_cast<std::size_t>(i)] != best_c) {
                assignment[static_cast<std::size_t>(i)] = best_c;
                changed = true;
            }
        }
        return changed;
    };

    assign_all();
    for (int iter = 0; iter < max_iter; ++iter) {
        // update step
        std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < m; ++i) {
            sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])] += probs[i];
            counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])] += 1;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers[static_cast<std::size_t>(c)] = sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
            } else {
                // relocate an emptied center to the point farthest from its center
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < m; ++i) {
                    const double d = (probs[i] - centers[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])]) *
                                     (probs[i] - centers[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                centers[static_cast<std::size_t>(c)] = probs[far_i];
            }
        }
        const bool changed = assign_all();
        if (trace) trace->wcss.push_back(detail::wcss_of(probs, assignment, centers));
        if (!changed) break;
    }

    // canonical order: centers ascending
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centers[static_cast<std::size_t>(a)] < centers[static_cast<std::size_t>(b)]; });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

    Clustering out;
    out.k = k;
    out.centers.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) out.centers[static_cast<std::size_t>(rank[static_cast<std::size_t>(c)])] = centers[static_cast<std::size_t>(c)];
    out.assignment.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out.assignment[static_cast<std::size_t>(i)] = rank[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    out.weights = cluster_weights(probs, out);
    return out;
}

/// Within-cluster sum of squares for a clustering over the probabilities.
inline double wcss(const Eigen::VectorXd& probs, const Clustering& clustering) {
    if (static_cast<Eigen::Index>(clustering.assignment.size()) != probs.size())
        throw DimensionError("wcss: assignment/probability size mismatch");
    return detail::wcss_of(probs, clustering.assignment, clustering.centers);
}

/// Elbow selection on a precomputed WCSS sequence for k = 1..k_max: the
/// interior k maximizing the discrete second difference
/// WCSS(k-1) - 2 WCSS(k) + WCSS(k+1). Falls back to 1 when the sequence is
/// too short to have an interior point.
inline int elbow_from_wcss(const std::vector<double>& wcss_by_k) {
    const int k_max = static_cast<int>(wcss_by_k.size());
    if (k_max < 3) return 1;
    int best_k = 2;
    double best_curvature = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= k_max - 1; ++k) {
        const double curvature = wcss_by_k[static_cast<std::size_t>(k - 2)] -
                                 2.0 * wcss_by_k[static_cast<std::size_t>(k - 1)] +
                                 wcss_by_k[static_cast<std::size_t>(k)];
        if (curvature > best_curvature) {
            best_curvature = curvature;
            best_k = k;
        }
    }
    return best_k;
}

/// Elbow method: run k-means for k = 1..k_max and pick the WCSS-curvature
/// elbow. Returns 1 when the probabilities carry fewer than three distinct
/// values (no structure to cluster).
inline int elbow_select_k(const Eigen::VectorXd& probs, int k_max, std::uint64_t seed) {
    if (k_max < 3) throw ConfigError("elbow_select_k: k_max must be at least 3");
    const int distinct = detail::count_distinct(probs);
    const int cap = std::min(k_max, distinct);
    if (cap < 3) return 1;
    std::vector<double> wcss_by_k;
    wcss_by_k.reserve(static_cast<std::size_t>(cap));
    for (int k = 1; k <= cap; ++k) {
        const auto clustering = kmeans_probs(probs, k, rng::derive(seed, rng::kKMeans, static_cast<std::uint64_t>(k)));
        wcss_by_k.push_back(wcss(probs, clustering));
    }
    return elbow_from_wcss(wcss_by_k);
}

/// Acquisition scaling: score_i = ehvi_i * w_{cluster(i)}.
inline std::vector<double> weighted_scores(const std::vector<double>& ehvi_values, const Clustering& clustering) {
    if (ehvi_values.size() != clustering.assignment.size())
        throw DimensionError("weighted_scores: ehvi/assignment size mismatch");
    std::vector<double> scores(ehvi_values.size());
    for (std::size_t i = 0; i < ehvi_values.size(); ++i)
        scores[i] = ehvi_values[i] * clustering.weights[static_cast<std::size_t>(clustering.assignment[i])];
    return scores;
}

}  // namespace nostra
