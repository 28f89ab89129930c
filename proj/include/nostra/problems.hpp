#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nostra/domain.hpp"
#include "nostra/errors.hpp"
#include "nostra/rng.hpp"

namespace nostra {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Analytic benchmark problem: noise-free objective evaluators over a box
/// domain, cached objective ranges, and a homoscedastic noise fraction.
/// Observation noise per objective is Normal(0, (rho * range_i)^2).
struct TestProblem {
    std::string name;
    DesignDomain domain;
    std::vector<ObjectiveFn> objectives;  // raw units, noise-free
    double noise_fraction = 0.0;          // rho
    Eigen::VectorXd f_min;                // dense-grid minima, cached
    Eigen::VectorXd f_max;                // dense-grid maxima, cached

    int dim() const { return domain.dim(); }
    int num_objectives() const { return static_cast<int>(objectives.size()); }

    Eigen::VectorXd ranges() const { return f_max - f_min; }

    Eigen::VectorXd evaluate_noiseless(const Eigen::VectorXd& x) const {
        if (!domain.contains(x)) throw DomainError(name + ": input outside the design domain");
        Eigen::VectorXd values(num_objectives());
        for (int k = 0; k < num_objectives(); ++k) values[k] = objectives[static_cast<std::size_t>(k)](x);
        return values;
    }
};

/// One noisy evaluation, with the noise draws recorded for reproducibility.
struct NoisyObservation {
    Eigen::VectorXd input;
    Eigen::VectorXd values;
    Eigen::VectorXd noise_draws;
};

/// Dense-grid objective ranges over the domain: (min, max) per objective on
/// a resolution^d lattice including the box corners.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_ranges(const std::vector<ObjectiveFn>& objectives,
                                                                  const DesignDomain& domain, int resolution = 256) {
    if (resolution < 64) throw ConfigError("compute_ranges: resolution must be at least 64 per dimension");
    const int d = domain.dim();
    const int k = static_cast<int>(objectives.size());
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(k, -std::numeric_limits<double>::infinity());

    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Eigen::VectorXd x(d);
    while (true) {
        for (int j = 0; j < d; ++j) {
            const double t = static_cast<double>(idx[static_cast<std::size_t>(j)]) / (resolution - 1);
            x[j] = domain.lower[j] + t * (domain.upper[j] - domain.lower[j]);
        }
        for (int kk = 0; kk < k; ++kk) {
            const double v = objectives[static_cast<std::size_t>(kk)](x);
            if (!std::isfinite(v)) throw Error("compute_ranges: non-finite objective value on the grid");
            lo[kk] = std::min(lo[kk], v);
            hi[kk] = std::max(hi[kk], v);
        }
        int j = 0;
        for (; j < d; ++j) {
            if (++idx[static_cast<std::size_t>(j)] < resolution) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j == d) break;
    }
    return {lo, hi};
}

namespace detail {

inline TestProblem finish_problem(TestProblem problem, int range_resolution) {
    auto [lo, hi] = compute_ranges(problem.objectives, problem.domain, range_resolution);
    if (((hi - lo).array() <= 0.0).any())
        throw ConfigError(problem.name + ": an objective is constant over the domain (zero range)");
    problem.f_min = std::move(lo);
    problem.f_max = std::move(hi);
    return problem;
}

// Branin with the standard constants, over x0 in [-5, 10], x1 in [0, 15].
inline double branin_raw(double x0, double x1) {
    constexpr double a = 1.0;
    const double b = 5.1 / (4.0 * M_PI * M_PI);
    const double c = 5.0 / M_PI;
    constexpr double r = 6.0;
    constexpr double s = 10.0;
    const double t = 1.0 / (8.0 * M_PI);
    const double inner = x1 - b * x0 * x0 + c * x0 - r;
    return a * inner * inner + s * (1.0 - t) * std::cos(x0) + s;
}

// Currin exponential over the unit box; the bracket takes its limit value 1
// as x1 -> 0, which keeps the evaluator continuous there.
inline double currin_raw(double x0, double x1) {
    const double bracket = x1 > 0.0 ? 1.0 - std::exp(-1.0 / (2.0 * x1)) : 1.0;
    const double numer = 2300.0 * x0 * x0 * x0 + 1900.0 * x0 * x0 + 2092.0 * x0 + 60.0;
    const double denom = 100.0 * x0 * x0 * x0 + 500.0 * x0 * x0 + 4.0 * x0 + 20.0;
    return bracket * numer / denom;
}

}  // namespace detail

/// Sphere centered at (8, 8) paired with a Bohachevsky-style objective on
/// [0, 10]^2. The second objective keeps both cosine terms in x1; set
/// classical_variant to use cos(4 pi x2) in the second term instead.
inline TestProblem make_bohachevsky_sphere(double noise_fraction, bool classical_variant = false,
                                           int range_resolution = 256) {
    TestProblem p;
    p.name = classical_variant ? "bohachevsky-sphere-classical" : "bohachevsky-sphere";
    p.domain = DesignDomain::box(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(10.0, 10.0));
    p.noise_fraction = noise_fraction;
    p.objectives.push_back([](const Eigen::VectorXd& x) {
        return (x[0] - 8.0) * (x[0] - 8.0) + (x[1] - 8.0) * (x[1] - 8.0);
    });
    p.objectives.push_back([classical_variant](const Eigen::VectorXd& x) {
        const double second_arg = classical_variant ? x[1] : x[0];
        return x[0] * x[0] + 2.0 * x[1] * x[1] - 0.3 * std::cos(3.0 * M_PI * x[0]) -
               0.4 * std::cos(4.0 * M_PI * second_arg) + 0.7;
    });
    return detail::finish_problem(std::move(p), range_resolution);
}

/// Branin-Currin over the unit box: Branin is evaluated at the affinely
/// rescaled point (15 x0 - 5, 15 x1); Currin reads the unit coordinates
/// directly.
inline TestProblem make_branin_currin(double noise_fraction, int range_resolution = 256) {
    TestProblem p;
    p.name = "branin-currin";
    p.domain = DesignDomain::unit(2);
    p.noise_fraction = noise_fraction;
    p.objectives.push_back(
        [](const Eigen::VectorXd& x) { return detail::branin_raw(15.0 * x[0] - 5.0, 15.0 * x[1]); });
    p.objectives.push_back([](const Eigen::VectorXd& x) { return detail::currin_raw(x[0], x[1]); });
    return detail::finish_problem(std::move(p), range_resolution);
}

/// Single-objective Branin on the unit box (rescaled inputs), mainly for
/// surrogate-quality studies.
inline TestProblem make_branin(double noise_fraction, int range_resolution = 256) {
    TestProblem p;
    p.name = "branin";
    p.domain = DesignDomain::unit(2);
    p.noise_fraction = noise_fraction;
    p.objectives.push_back(
        [](const Eigen::VectorXd& x) { return detail::branin_raw(15.0 * x[0] - 5.0, 15.0 * x[1]); });
    return detail::finish_problem(std::move(p), range_resolution);
}

/// Single-objective Currin exponential on the unit box.
inline TestProblem make_currin(double noise_fraction, int range_resolution = 256) {
    TestProblem p;
    p.name = "currin";
    p.domain = DesignDomain::unit(2);
    p.noise_fraction = noise_fraction;
    p.objectives.push_back([](const Eigen::VectorXd& x) { return detail::currin_raw(x[0], x[1]); });
    return detail::finish_problem(std::move(p), range_resolution);
}

/// Problem registry addressable by name from CLI configuration.
inline TestProblem get_problem(const std::string& name, double noise_fraction) {
    if (name == "bohachevsky-sphere") return make_bohachevsky_sphere(noise_fraction);
    if (name == "branin-currin") return make_branin_currin(noise_fraction);
    if (name == "branin") return make_branin(noise_fraction);
    if (name == "currin") return make_currin(noise_fraction);
    throw ConfigError("unknown problem \"" + name + "\"");
}

/// Noisy evaluation: independent Normal(0, (rho * range_i)^2) per objective,
/// deterministic per seed.
inline NoisyObservation observe(const TestProblem& problem, const Eigen::VectorXd& x, std::uint64_t seed) {
    NoisyObservation obs;
    obs.input = x;
    obs.values = problem.evaluate_noiseless(x);
    obs.noise_draws = Eigen::VectorXd::Zero(problem.num_objectives());
    rng::Engine eng(seed);
    const Eigen::VectorXd ranges = problem.ranges();
    for (int k = 0; k < problem.num_objectives(); ++k) {
        obs.noise_draws[k] = problem.noise_fraction * ranges[k] * eng.normal();
        obs.values[k] += obs.noise_draws[k];
    }
    return obs;
}

}  // namespace nostra
