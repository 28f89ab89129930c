#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nostra/pareto.hpp"
#include "nostra/rng.hpp"

using nostra::dominates;
using nostra::ehvi_mc;
using nostra::hv_2d;
using nostra::hvi;
using nostra::Marginal;
using nostra::ObjectiveVector;
using nostra::pareto_front;
using nostra::ParetoSet;
using nostra::RefPoint;

namespace {

ObjectiveVector vec2(double a, double b) {
    ObjectiveVector v(2);
    v << a, b;
    return v;
}

RefPoint ref2(double a, double b) { return RefPoint{vec2(a, b)}; }

ParetoSet set_of(std::initializer_list<std::pair<double, double>> pts) {
    std::vector<ObjectiveVector> v;
    for (auto [a, b] : pts) v.push_back(vec2(a, b));
    return pareto_front(v);
}

// independent O(n^2) all-pairs oracle
std::vector<int> brute_force_front(const std::vector<ObjectiveVector>& pts) {
    std::vector<int> kept;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (j != i && dominates(pts[j], pts[i])) dominated = true;
        }
        if (!dominated) kept.push_back(static_cast<int>(i));
    }
    return kept;
}

// independent Monte Carlo area oracle for the dominated region
double mc_hypervolume(const ParetoSet& front, const RefPoint& ref, int n_samples, std::uint64_t seed) {
    if (front.empty()) return 0.0;
    double lo0 = ref.r[0], lo1 = ref.r[1];
    for (const auto& p : front.points) {
        lo0 = std::min(lo0, p[0]);
        lo1 = std::min(lo1, p[1]);
    }
    const double box = (ref.r[0] - lo0) * (ref.r[1] - lo1);
    nostra::rng::Engine eng(seed);
    int hits = 0;
    for (int t = 0; t < n_samples; ++t) {
        const double u0 = eng.uniform(lo0, ref.r[0]);
        const double u1 = eng.uniform(lo1, ref.r[1]);
        for (const auto& p : front.points) {
            if (p[0] <= u0 && p[1] <= u1) {
                ++hits;
                break;
            }
        }
    }
    return box * hits / n_samples;
}

std::vector<ObjectiveVector> random_points(int n, nostra::rng::Engine& eng, double span = 1.0) {
    std::vector<ObjectiveVector> pts;
    for (int i = 0; i < n; ++i) pts.push_back(vec2(span * eng.uniform(), span * eng.uniform()));
    return pts;
}

}  // namespace

TEST_CASE("dominates: definition and edge cases") {
    REQUIRE(dominates(vec2(1, 1), vec2(2, 2)));
    REQUIRE_FALSE(dominates(vec2(1, 2), vec2(2, 1)));  // incomparable
    REQUIRE_FALSE(dominates(vec2(2, 1), vec2(1, 2)));
    REQUIRE_FALSE(dominates(vec2(1, 1), vec2(1, 1)));  // strictness
    REQUIRE(dominates(vec2(1, 1), vec2(1, 2)));
    ObjectiveVector three(3);
    three << 1, 2, 3;
    REQUIRE_THROWS_AS(dominates(vec2(1, 2), three), nostra::DimensionError);
}

TEST_CASE("dominates is a strict partial order") {
    nostra::rng::Engine eng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = vec2(eng.uniform_int(4), eng.uniform_int(4));
        const auto b = vec2(eng.uniform_int(4), eng.uniform_int(4));
        const auto c = vec2(eng.uniform_int(4), eng.uniform_int(4));
        REQUIRE_FALSE(dominates(a, a));                              // irreflexive
        if (dominates(a, b)) REQUIRE_FALSE(dominates(b, a));         // antisymmetric
        if (dominates(a, b) && dominates(b, c)) REQUIRE(dominates(a, c));  // transitive
    }
}

TEST_CASE("pareto_front: examples") {
    const auto front = set_of({{1, 3}, {2, 2}, {3, 1}, {3, 3}});
    REQUIRE(front.size() == 3);
    REQUIRE(front.source_indices == std::vector<int>{0, 1, 2});

    const auto single = pareto_front({vec2(5, 7)});
    REQUIRE(single.size() == 1);
    REQUIRE(single.points[0] == vec2(5, 7));

    // duplicates are mutually non-dominating
    const auto dup = pareto_front({vec2(1, 1), vec2(1, 1), vec2(1, 1)});
    REQUIRE(dup.size() == 3);

    REQUIRE_THROWS(pareto_front({}));
}

TEST_CASE("pareto_front matches the all-pairs brute force") {
    nostra::rng::Engine eng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(eng.uniform_int(64));
        auto pts = random_points(n, eng);
        // inject duplicates and ties to stress the sort-based path
        if (n > 4) {
            pts[1] = pts[0];
            pts[3][0] = pts[2][0];
        }
        const auto fast = pareto_front(pts);
        REQUIRE(fast.source_indices == brute_force_front(pts));
    }
}

TEST_CASE("hv_2d: examples") {
    REQUIRE(hv_2d(set_of({{1, 1}}), ref2(3, 3)) == Approx(4.0));
    REQUIRE(hv_2d(set_of({{1, 2}, {2, 1}}), ref2(3, 3)) == Approx(3.0));  // 2 + 2 - 1
    ParetoSet empty;
    REQUIRE(hv_2d(empty, ref2(3, 3)) == 0.0);
    REQUIRE_THROWS_AS(hv_2d(set_of({{4, 1}}), ref2(3, 3)), nostra::ReferencePointError);
}

TEST_CASE("hv_2d is order-invariant and handles duplicates") {
    nostra::rng::Engine eng(23);
    std::vector<ObjectiveVector> pts = random_points(12, eng);
    pts.push_back(pts[0]);
    auto front = pareto_front(pts);
    const RefPoint ref = ref2(2, 2);
    const double base = hv_2d(front, ref);
    for (int t = 0; t < 5; ++t) {
        std::vector<int> perm(front.points.size());
        std::iota(perm.begin(), perm.end(), 0);
        eng.shuffle(perm);
        ParetoSet shuffled;
        for (int idx : perm) shuffled.points.push_back(front.points[static_cast<std::size_t>(idx)]);
        REQUIRE(hv_2d(shuffled, ref) == Approx(base).epsilon(1e-14));
    }
}

TEST_CASE("hv_2d agrees with the MC area oracle") {
    nostra::rng::Engine eng(31);
    const RefPoint ref = ref2(2, 2);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(eng.uniform_int(18));
        const auto front = pareto_front(random_points(n, eng));
        const double exact = hv_2d(front, ref);
        const double estimate = mc_hypervolume(front, ref, 200000, 1000 + trial);
        REQUIRE(estimate == Approx(exact).epsilon(0.02));
    }
}

TEST_CASE("hv_2d is monotone under non-dominated insertion") {
    nostra::rng::Engine eng(37);
    const RefPoint ref = ref2(2, 2);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = random_points(10, eng);
        const auto front = pareto_front(pts);
        const double before = hv_2d(front, ref);
        pts.push_back(vec2(eng.uniform(), eng.uniform()));
        const double after = hv_2d(pareto_front(pts), ref);
        REQUIRE(after >= before - 1e-12);
    }
}

TEST_CASE("hvi: examples") {
    const auto current = set_of({{1, 1}});
    const RefPoint ref = ref2(3, 3);
    REQUIRE(hvi({vec2(0.5, 0.5)}, current, ref) == Approx(2.25));  // 6.25 - 4
    REQUIRE(hvi({vec2(2, 2)}, current, ref) == 0.0);               // dominated
    REQUIRE(hvi({vec2(1, 1)}, current, ref) == 0.0);               // equal point
}

TEST_CASE("hvi properties") {
    nostra::rng::Engine eng(41);
    const RefPoint ref = ref2(2, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto front = pareto_front(random_points(8, eng));
        const auto p = vec2(1.8 * eng.uniform(), 1.8 * eng.uniform());
        const double improvement = hvi({p}, front, ref);
        REQUIRE(improvement >= 0.0);
        // single-point fast path agrees with the general union route
        const double via_union = hvi({p, p}, front, ref);
        REQUIRE(improvement == Approx(via_union).margin(1e-12));
    }

    // a point dominating the whole frontier contributes rect(p) - HV
    const auto front = set_of({{1, 2}, {2, 1}});
    const double hv_before = hv_2d(front, ref);
    const auto p = vec2(0.5, 0.5);
    REQUIRE(hvi({p}, front, ref) == Approx((2 - 0.5) * (2 - 0.5) - hv_before));
}

TEST_CASE("hvi clips points beyond the reference point") {
    const auto current = set_of({{1, 1}});
    const RefPoint ref = ref2(3, 3);
    REQUIRE(hvi({vec2(5, 0.5)}, current, ref) == Approx(hvi({vec2(3, 0.5)}, current, ref)));
    REQUIRE(hvi({vec2(9, 9)}, current, ref) == 0.0);
}

TEST_CASE("ehvi_mc: zero variance collapses to hvi exactly") {
    const auto current = set_of({{1, 1}, {0.5, 2}});
    const RefPoint ref = ref2(3, 3);
    const std::vector<Marginal> post{{0.4, 0.0}, {0.7, 0.0}};
    REQUIRE(ehvi_mc(post, current, ref, 1000, 7) == hvi({vec2(0.4, 0.7)}, current, ref));
}

TEST_CASE("ehvi_mc: dominated mean with tiny variance is almost zero") {
    const auto current = set_of({{1, 1}});
    const RefPoint ref = ref2(3, 3);
    const std::vector<Marginal> post{{2.5, 1e-8}, {2.5, 1e-8}};
    REQUIRE(ehvi_mc(post, current, ref, 2000, 7) == Approx(0.0).margin(1e-9));
}

TEST_CASE("ehvi_mc: deterministic per seed and nonnegative") {
    const auto current = set_of({{1, 1}});
    const RefPoint ref = ref2(3, 3);
    const std::vector<Marginal> post{{1.2, 0.3}, {0.8, 0.2}};
    const double a = ehvi_mc(post, current, ref, 500, 99);
    const double b = ehvi_mc(post, current, ref, 500, 99);
    REQUIRE(a == b);
    REQUIRE(a >= 0.0);
    REQUIRE(ehvi_mc(post, current, ref, 500, 100) != a);  // distinct stream
}

TEST_CASE("ehvi_mc: quadrupling N roughly halves the MC standard error") {
    const auto current = set_of({{1, 1}, {0.6, 1.7}});
    const RefPoint ref = ref2(3, 3);
    const std::vector<Marginal> post{{0.9, 0.2}, {0.9, 0.3}};
    auto se_for = [&](int n) {
        std::vector<double> values;
        for (int s = 0; s < 24; ++s) values.push_back(ehvi_mc(post, current, ref, n, 500 + s));
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / (values.size() - 1));
    };
    const double ratio = se_for(2000) / se_for(8000);
    REQUIRE(ratio > 2.0 / 1.5);
    REQUIRE(ratio < 2.0 * 1.5);
}
