#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nostra/errors.hpp"
#include "nostra/rng.hpp"

namespace nostra {

/// One point in objective space. Minimization orientation throughout;
/// maximization problems are negated at the problem boundary.
using ObjectiveVector = Eigen::VectorXd;

/// Mutually non-dominated objective vectors plus their indices into the
/// originating candidate/observation list.
struct ParetoSet {
    std::vector<ObjectiveVector> points;
    std::vector<int> source_indices;

    int size() const { return static_cast<int>(points.size()); }
    bool empty() const { return points.empty(); }
};

/// Worst-corner anchor bounding the hypervolume computation. Every frontier
/// point used with it must be component-wise <= r.
struct RefPoint {
    Eigen::VectorXd r;
};

/// Gaussian posterior summary for one objective at one candidate.
struct Marginal {
    double mean = 0.0;
    double variance = 0.0;
};

/// Strict dominance: a <= b component-wise with a < b in at least one
/// component (minimization). Irreflexive by construction.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size()) throw DimensionError("dominates: objective vectors differ in length");
    bool strictly_better = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

namespace detail {

/// Non-dominated indices for the bi-objective case in O(n log n).
/// Duplicates of a non-dominated point are all retained.
inline std::vector<int> pareto_front_indices_2d(const std::vector<double>& f1, const std::vector<double>& f2) {
    const int n = static_cast<int>(f1.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (f1[a] != f1[b]) return f1[a] < f1[b];
        if (f2[a] != f2[b]) return f2[a] < f2[b];
        return a < b;
    });

    std::vector<int> kept;
    kept.reserve(order.size());
    double best_f2 = std::numeric_limits<double>::infinity();
    int i = 0;
    while (i < n) {
        // group of equal f1, sorted by f2 ascending
        int j = i;
        while (j < n && f1[order[j]] == f1[order[i]]) ++j;
        const double group_min = f2[order[i]];
        if (group_min < best_f2) {
            for (int t = i; t < j && f2[order[t]] == group_min; ++t) kept.push_back(order[t]);
            best_f2 = group_min;
        }
        i = j;
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

inline std::vector<int> pareto_front_indices_generic(const std::vector<ObjectiveVector>& pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> kept;
    for (int i = 0; i < n; ++i) {
        bool dominated = false;
        for (int j = 0; j < n && !dominated; ++j) {
            if (j != i && dominates(pts[j], pts[i])) dominated = true;
        }
        if (!dominated) kept.push_back(i);
    }
    return kept;
}

}  // namespace detail

/// Extract the non-dominated subset of a nonempty point list, keeping the
/// original indices.
inline ParetoSet pareto_front(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) throw Error("pareto_front: empty input");
    const Eigen::Index k = points.front().size();
    for (const auto& p : points) {
        if (p.size() != k) throw DimensionError("pareto_front: inconsistent objective counts");
        if (!p.allFinite()) throw Error("pareto_front: non-finite objective value");
    }

    std::vector<int> kept;
    if (k == 2) {
        std::vector<double> f1(points.size()), f2(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            f1[i] = points[i][0];
            f2[i] = points[i][1];
        }
        kept = detail::pareto_front_indices_2d(f1, f2);
    } else {
        kept = detail::pareto_front_indices_generic(points);
    }

    ParetoSet front;
    front.points.reserve(kept.size());
    front.source_indices = std::move(kept);
    for (int idx : front.source_indices) front.points.push_back(points[static_cast<std::size_t>(idx)]);
    return front;
}

namespace detail {

/// Bi-objective frontier reduced to a staircase (x strictly ascending,
/// y strictly descending), with its hypervolume w.r.t. the reference point
/// precomputed. The workhorse behind hv/hvi/ehvi: single-point improvements
/// are evaluated by a virtual merge sweep without allocating.
class Staircase2d {
public:
    Staircase2d(const ParetoSet& front, const RefPoint& ref, bool clip_to_ref) {
        if (ref.r.size() != 2) throw DimensionError("hypervolume: reference point must be 2-dimensional");
        if (!ref.r.allFinite()) throw ReferencePointError("hypervolume: non-finite reference point");
        rx_ = ref.r[0];
        ry_ = ref.r[1];

        std::vector<std::pair<double, double>> pts;
        pts.reserve(front.points.size());
        for (const auto& p : front.points) {
            if (p.size() != 2) throw DimensionError("hypervolume: frontier point must be 2-dimensional");
            double px = p[0], py = p[1];
            if (px > rx_ || py > ry_) {
                if (!clip_to_ref)
                    throw ReferencePointError("hypervolume: frontier point exceeds the reference point");
                px = std::min(px, rx_);
                py = std::min(py, ry_);
            }
            pts.emplace_back(px, py);
        }
        std::sort(pts.begin(), pts.end());

        double y_prev = ry_;
        for (const auto& [px, py] : pts) {
            if (py >= y_prev) continue;  // dominated within the sweep
            xs_.push_back(px);
            ys_.push_back(py);
            hv_ += (rx_ - px) * (y_prev - py);
            y_prev = py;
        }
    }

    double hv() const { return hv_; }

    /// Exact HVI of one additional point; clips the point to the reference
    /// corner so values beyond it contribute zero volume.
    double hvi_point(double px, double py) const {
        px = std::min(px, rx_);
        py = std::min(py, ry_);
        const std::size_t n = xs_.size();
        double area = 0.0;
        double y_prev = ry_;
        bool pending = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (pending && (px < xs_[i] || (px == xs_[i] && py < ys_[i]))) {
                if (py < y_prev) {
                    area += (rx_ - px) * (y_prev - py);
                    y_prev = py;
                }
                pending = false;
            }
            if (ys_[i] < y_prev) {
                area += (rx_ - xs_[i]) * (y_prev - ys_[i]);
                y_prev = ys_[i];
            }
        }
        if (pending && py < y_prev) area += (rx_ - px) * (y_prev - py);
        const double improvement = area - hv_;
        return improvement > 0.0 ? improvement : 0.0;
    }

private:
    std::vector<double> xs_, ys_;
    double rx_ = 0.0, ry_ = 0.0;
    double hv_ = 0.0;
};

}  // namespace detail

/// Exact bi-objective hypervolume: area of the union of rectangles spanned by
/// each frontier point and the reference point. Order-invariant. Throws if a
/// point exceeds the reference point.
inline double hv_2d(const ParetoSet& front, const RefPoint& ref) {
    return detail::Staircase2d(front, ref, /*clip_to_ref=*/false).hv();
}

/// Hypervolume improvement of a set of new points over the current frontier.
/// Points beyond the reference point (possible under observation noise) are
/// clipped to it and contribute zero volume.
inline double hvi(const std::vector<ObjectiveVector>& new_points, const ParetoSet& current, const RefPoint& ref) {
    const detail::Staircase2d base(current, ref, /*clip_to_ref=*/true);
    if (new_points.size() == 1) {
        const auto& p = new_points.front();
        if (p.size() != 2) throw DimensionError("hvi: new point must be 2-dimensional");
        return base.hvi_point(p[0], p[1]);
    }
    std::vector<ObjectiveVector> merged = current.points;
    merged.insert(merged.end(), new_points.begin(), new_points.end());
    if (merged.empty()) return 0.0;
    const double combined = detail::Staircase2d(pareto_front(merged), ref, /*clip_to_ref=*/true).hv();
    const double improvement = combined - base.hv();
    return improvement > 0.0 ? improvement : 0.0;
}

/// Monte Carlo expected hypervolume improvement of one candidate whose
/// per-objective posteriors are independent Gaussians. Deterministic per
/// seed. Zero posterior variance collapses to the deterministic hvi of the
/// mean vector, exactly.
inline double ehvi_mc(const std::vector<Marginal>& posteriors, const ParetoSet& current, const RefPoint& ref,
                      int n_samples, std::uint64_t seed) {
    if (posteriors.size() != 2) throw DimensionError("ehvi_mc: exactly two objectives supported");
    if (n_samples < 1) throw ConfigError("ehvi_mc: need at least one sample");
    for (const auto& m : posteriors) {
        if (m.variance < 0.0) throw Error("ehvi_mc: negative posterior variance");
    }

    const detail::Staircase2d base(current, ref, /*clip_to_ref=*/true);
    if (posteriors[0].variance == 0.0 && posteriors[1].variance == 0.0) {
        return base.hvi_point(posteriors[0].mean, posteriors[1].mean);
    }

    const double sd0 = std::sqrt(posteriors[0].variance);
    const double sd1 = std::sqrt(posteriors[1].variance);
    rng::Engine eng(seed);
    double total = 0.0;
    for (int t = 0; t < n_samples; ++t) {
        const double y0 = posteriors[0].mean + sd0 * eng.normal();
        const double y1 = posteriors[1].mean + sd1 * eng.normal();
        total += base.hvi_point(y0, y1);
    }
    return total / n_samples;
}

}  // namespace nostra
