#pragma once

#include <Eigen/Core>

#include "nostra/errors.hpp"

namespace nostra {

/// Axis-aligned design box in raw units, with maps to and from the unit box.
/// All internal optimizer math runs in unit coordinates; raw units appear
/// only at true-function evaluation.
struct DesignDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static DesignDomain unit(int d) {
        DesignDomain dom;
        dom.lower = Eigen::VectorXd::Zero(d);
        dom.upper = Eigen::VectorXd::Ones(d);
        return dom;
    }

    static DesignDomain box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        if (lo.size() != hi.size()) throw DimensionError("DesignDomain: bound size mismatch");
        if (((hi - lo).array() <= 0.0).any()) throw ConfigError("DesignDomain: lower must be < upper per dimension");
        DesignDomain dom;
        dom.lower = lo;
        dom.upper = hi;
        return dom;
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
        if (x.size() != lower.size()) return false;
        return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
    }

    Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const {
        return (x - lower).array() / (upper - lower).array();
    }

    Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const {
        return lower.array() + u.array() * (upper - lower).array();
    }
};

}  // namespace nostra
