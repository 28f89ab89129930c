#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numeric>
#include <vector>

#include "nostra/errors.hpp"
#include "nostra/rng.hpp"

namespace nostra {

/// Latin hypercube sample of n points in the d-dimensional unit box.
/// Each dimension's coordinates occupy the n strata [i/n, (i+1)/n) exactly
/// once, jittered uniformly within the stratum. Rows are points.
inline Eigen::MatrixXd latin_hypercube(int n, int d, std::uint64_t seed) {
    if (n < 1) throw ConfigError("latin_hypercube: need at least one sample");
    if (d < 1) throw ConfigError("latin_hypercube: need at least one dimension");
    rng::Engine eng(seed);
    Eigen::MatrixXd points(n, d);
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int j = 0; j < d; ++j) {
        std::iota(strata.begin(), strata.end(), 0);
        eng.shuffle(strata);
        for (int i = 0; i < n; ++i) {
            points(i, j) = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + eng.uniform()) / n;
        }
    }
    return points;
}

}  // namespace nostra
