#pragma once

#include <Eigen/Core>

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace nostra::optim {

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 6;
    double grad_tolerance = 1e-9;   // inf-norm of the numerical gradient
    double step_tolerance = 1e-12;  // inf-norm of the accepted step
    double value_tolerance = 1e-13; // relative objective decrease
    double fd_step = 1e-6;          // central-difference step scale
    int max_line_search = 40;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    /// Objective after the initial point and each accepted step; strictly
    /// decreasing by the Armijo condition.
    std::vector<double> trace;
};

/// Limited-memory BFGS for smooth unconstrained minimization with numerical
/// central-difference gradients and backtracking Armijo line search. The
/// objective may signal an infeasible point by returning a huge value; the
/// line search backs away from it.
template <class F>
LbfgsResult lbfgs_minimize(F&& objective, Eigen::VectorXd x0, const LbfgsOptions& opt = {}) {
    const auto dim = x0.size();
    LbfgsResult out;

    auto eval = [&](const Eigen::VectorXd& x) {
        ++out.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : 1e100;
    };
    auto gradient = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(dim);
        Eigen::VectorXd xp = x;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double h = opt.fd_step * (1.0 + std::abs(x[i]));
            xp[i] = x[i] + h;
            const double fp = eval(xp);
            xp[i] = x[i] - h;
            const double fm = eval(xp);
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    Eigen::VectorXd x = std::move(x0);
    double fx = eval(x);
    out.trace.push_back(fx);
    if (fx >= 1e100) {  // infeasible start
        out.x = std::move(x);
        out.value = fx;
        return out;
    }
    Eigen::VectorXd g = gradient(x);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= opt.grad_tolerance) {
            out.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd q = -g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }

        double slope = g.dot(q);
        if (!(slope < 0.0)) {  // not a descent direction; restart from steepest descent
            q = -g;
            slope = g.dot(q);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            if (!(slope < 0.0)) break;
        }

        // backtracking Armijo
        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < opt.max_line_search; ++ls) {
            x_new = x + step * q;
            f_new = eval(x_new);
            if (f_new < fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = true;  // no further decrease found along descent direction
            break;
        }

        const Eigen::VectorXd g_new = gradient(x_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double decrease = fx - f_new;
        x = std::move(x_new);
        fx = f_new;
        g = g_new;
        out.trace.push_back(fx);
        ++out.iterations;

        if (s.lpNorm<Eigen::Infinity>() <= opt.step_tolerance ||
            decrease <= opt.value_tolerance * std::max(1.0, std::abs(fx))) {
            out.converged = true;
            break;
        }
    }

    out.x = std::move(x);
    out.value = fx;
    return out;
}

}  // namespace nostra::optim
