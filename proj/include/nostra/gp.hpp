#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nostra/errors.hpp"
#include "nostra/lbfgs.hpp"
#include "nostra/rng.hpp"

namespace nostra {

/// Observed inputs/outputs for one objective. Inputs live in the unit box;
/// outputs are in raw units (standardization happens inside the fit).
struct TrainingSet {
    Eigen::MatrixXd inputs;   // n x d
    Eigen::VectorXd outputs;  // n

    int n() const { return static_cast<int>(inputs.rows()); }
    int d() const { return static_cast<int>(inputs.cols()); }

    void validate() const {
        if (inputs.rows() < 1) throw Error("TrainingSet: need at least one sample");
        if (inputs.rows() != outputs.size()) throw DimensionError("TrainingSet: inputs/outputs size mismatch");
        if (!inputs.allFinite() || !outputs.allFinite()) throw Error("TrainingSet: non-finite entry");
    }
};

/// Kernel hyperparameters. omega is the log10 inverse-lengthscale exponent,
/// shared across dimensions (isotropic); delta2 the nugget variance in
/// standardized units; sigma2 the closed-form prior variance.
struct GPHyperParams {
    double omega = 0.0;
    double delta2 = 0.0;
    double sigma2 = 1.0;
};

// Hyperparameter box constraints.
inline constexpr double kOmegaLo = -10.0;
inline constexpr double kOmegaHi = 10.0;
inline constexpr double kLogDelta2Lo = -8.0;  // log10 of the nugget variance
inline constexpr double kLogDelta2Hi = 1.0;

// Jitter ladder: base value always on the diagonal, escalated tenfold on
// Cholesky failure up to the cap, then a conditioning error.
inline constexpr double kJitterBase = 1e-10;
inline constexpr double kJitterMax = 1e-6;

/// Independent normal priors on omega and on log10 delta2.
struct HyperPrior {
    double omega_mean = 0.0;
    double omega_sd = 2.0;
    double delta_mean = -3.5;  // mid log-domain placeholder; prefer a data-aware center
    double delta_sd = 0.5;

    void validate() const {
        if (!(omega_sd > 0.0) || !std::isfinite(omega_sd) || !(delta_sd > 0.0) || !std::isfinite(delta_sd))
            throw ConfigError("HyperPrior: standard deviations must be positive and finite");
        if (!std::isfinite(omega_mean) || !std::isfinite(delta_mean))
            throw ConfigError("HyperPrior: non-finite prior mean");
    }
};

/// Prior centered on a known observation-noise level, expressed as a noise
/// standard deviation in standardized output units.
inline HyperPrior prior_from_noise_sd(double noise_sd_standardized) {
    HyperPrior prior;
    const double var = noise_sd_standardized * noise_sd_standardized;
    const double center = var > 0.0 ? std::log10(var) : kLogDelta2Lo;
    prior.delta_mean = std::clamp(center, kLogDelta2Lo, kLogDelta2Hi);
    prior.delta_sd = 0.5;
    return prior;
}

/// Centering/scaling constants applied to outputs before fitting: the mean
/// and sample standard deviation for n >= 2. A single observation is scaled
/// only (centering would zero it out and leave nothing to fit).
inline std::pair<double, double> standardization_constants(const Eigen::VectorXd& y) {
    const auto n = y.size();
    if (n < 1) throw Error("standardization_constants: empty outputs");
    if (n == 1) return {0.0, std::max(1.0, std::abs(y[0]))};
    const double mean = y.mean();
    const double ss = (y.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw ConditioningError("standardization: constant outputs");
    return {mean, sd};
}

/// Isotropic squared-exponential correlation: exp(-sum_i 10^omega (x_i - x'_i)^2).
/// Symmetric, in (0, 1], equal to 1 exactly at zero distance.
inline double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double omega) {
    if (x.size() != y.size()) throw DimensionError("correlation: input dimensions differ");
    const double scale = std::pow(10.0, omega);
    return std::exp(-scale * (x - y).squaredNorm());
}

/// Nugget-augmented correlation matrix: unit diagonal plus delta2 plus the
/// base jitter, squared-exponential off-diagonals.
inline Eigen::MatrixXd build_R_delta(const TrainingSet& train, const GPHyperParams& params) {
    train.validate();
    const int n = train.n();
    const double scale = std::pow(10.0, params.omega);
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i) {
        R(i, i) = 1.0 + params.delta2 + kJitterBase;
        for (int j = i + 1; j < n; ++j) {
            const double c = std::exp(-scale * (train.inputs.row(i) - train.inputs.row(j)).squaredNorm());
            R(i, j) = c;
            R(j, i) = c;
        }
    }
    return R;
}

namespace detail {

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = kJitterBase;  // total diagonal jitter in the factored matrix
};

/// Cholesky with the escalating jitter ladder. R_delta is expected to carry
/// the base jitter already (from build_R_delta).
inline Factorization factorize(Eigen::MatrixXd R_delta) {
    double jitter = kJitterBase;
    Factorization fact;
    fact.llt.compute(R_delta);
    while (fact.llt.info() != Eigen::Success) {
        const double next = jitter * 10.0;
        if (next > kJitterMax * (1.0 + 1e-12))
            throw ConditioningError("Cholesky failed at maximum jitter " + std::to_string(kJitterMax));
        R_delta.diagonal().array() += next - jitter;
        jitter = next;
        fact.llt.compute(R_delta);
    }
    fact.jitter = jitter;
    return fact;
}

inline double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

/// Closed-form prior variance (1/n) y' R_delta^-1 y given a valid factorization.
inline double sigma2_closed_form(const Eigen::VectorXd& y, const Eigen::LLT<Eigen::MatrixXd>& llt) {
    const Eigen::Index n = y.size();
    const double quad = y.dot(llt.solve(y));
    const double sigma2 = quad / static_cast<double>(n);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw ConditioningError("sigma2_closed_form: non-positive prior variance (degenerate outputs)");
    return sigma2;
}

/// Negative log-likelihood with the prior variance substituted by its
/// closed form: (n/2) log(sigma2_hat) + (1/2) log det(R_delta) + n/2.
inline double neg_log_likelihood(const TrainingSet& train, double omega, double delta2) {
    GPHyperParams p;
    p.omega = omega;
    p.delta2 = delta2;
    const auto fact = detail::factorize(build_R_delta(train, p));
    const double n = static_cast<double>(train.n());
    const double quad = train.outputs.dot(fact.llt.solve(train.outputs));
    const double sigma2 = quad / n;
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw ConditioningError("neg_log_likelihood: degenerate outputs");
    return 0.5 * n * std::log(sigma2) + 0.5 * detail::log_det_from_llt(fact.llt) + 0.5 * quad / sigma2;
}

/// Negative log-posterior: the likelihood term plus the normal prior
/// penalties on omega and log10 delta2 (normalization constants dropped, so
/// the prior term is exactly zero at the prior means).
inline double neg_log_posterior(const TrainingSet& train, double omega, double delta2, const HyperPrior& prior) {
    prior.validate();
    if (!(delta2 > 0.0)) throw ConfigError("neg_log_posterior: delta2 must be positive for the log-scale prior");
    const double u = std::log10(delta2);
    const double zo = (omega - prior.omega_mean) / prior.omega_sd;
    const double zd = (u - prior.delta_mean) / prior.delta_sd;
    return neg_log_likelihood(train, omega, delta2) + 0.5 * zo * zo + 0.5 * zd * zd;
}

/// Per-restart endpoint of the MAP search, reported in (omega, log10 delta2).
struct RestartOutcome {
    double omega = 0.0;
    double log10_delta2 = 0.0;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<double> trace;  // accepted objective values, strictly decreasing
};

struct FitInfo {
    double objective = std::numeric_limits<double>::infinity();
    int best_start = -1;
    double jitter = kJitterBase;
    std::vector<RestartOutcome> starts;
};

struct FitOptions {
    int restarts = 8;  // uniform starts; one extra start at the prior means is always appended
    optim::LbfgsOptions lbfgs{};
};

/// Fitted Gaussian-process surrogate: MAP hyperparameters plus the cached
/// factorization used for prediction. Immutable once constructed, safe to
/// share across threads.
class GPModel {
public:
    /// MAP fit over the (omega, delta2) box via multi-start quasi-Newton
    /// search on logistic-transformed coordinates. Passing no prior fits by
    /// likelihood alone. Deterministic for a fixed seed; restarts draw their
    /// start points from per-restart derived streams, so the outcome does not
    /// depend on evaluation order.
    static GPModel fit_map(const TrainingSet& train, const std::optional<HyperPrior>& prior, int restarts,
                           std::uint64_t seed, const FitOptions& options = {}) {
        train.validate();
        if (prior) prior->validate();
        if (restarts < 1) throw ConfigError("fit_map: need at least one restart");

        GPModel model;
        model.standardize(train);

        const TrainingSet& std_train = model.train_;
        auto objective = [&](const Eigen::VectorXd& z) -> double {
            const double omega = box_from_unconstrained(z[0], kOmegaLo, kOmegaHi);
            const double u = box_from_unconstrained(z[1], kLogDelta2Lo, kLogDelta2Hi);
            const double delta2 = std::pow(10.0, u);
            try {
                double value = neg_log_likelihood(std_train, omega, delta2);
                if (prior) {
                    const double zo = (omega - prior->omega_mean) / prior->omega_sd;
                    const double zd = (u - prior->delta_mean) / prior->delta_sd;
                    value += 0.5 * zo * zo + 0.5 * zd * zd;
                }
                return value;
            } catch (const ConditioningError&) {
                return 1e100;
            }
        };

        // Start points: `restarts` uniform draws in the box, plus one at the
        // prior means (box center without a prior). Starts are pulled off the
        // outer 2% shell of each coordinate: the logistic transform saturates
        // there and a quasi-Newton step cannot recover a usable gradient.
        std::vector<Eigen::Vector2d> starts;
        for (int t = 0; t < restarts; ++t) {
            rng::Engine eng(rng::derive(seed, rng::kRestart, static_cast<std::uint64_t>(t)));
            const double omega = eng.uniform(kOmegaLo, kOmegaHi);
            const double u = eng.uniform(kLogDelta2Lo, kLogDelta2Hi);
            starts.emplace_back(start_coordinate(omega, kOmegaLo, kOmegaHi),
                                start_coordinate(u, kLogDelta2Lo, kLogDelta2Hi));
        }
        {
            const double omega0 = prior ? prior->omega_mean : 0.5 * (kOmegaLo + kOmegaHi);
            const double u0 = prior ? prior->delta_mean : 0.5 * (kLogDelta2Lo + kLogDelta2Hi);
            starts.emplace_back(start_coordinate(omega0, kOmegaLo, kOmegaHi),
                                start_coordinate(u0, kLogDelta2Lo, kLogDelta2Hi));
        }

        FitOptions opts = options;
        model.info_.starts.resize(starts.size());
        for (std::size_t t = 0; t < starts.size(); ++t) {
            auto res = optim::lbfgs_minimize(objective, Eigen::VectorXd(starts[t]), opts.lbfgs);
            // A walk deep into the logistic tails stalls there: the box
            // gradient gets multiplied by e^{-|z|} and drops below tolerance
            // even when it points inward. Pull such endpoints back into the
            // responsive region and re-descend; keep whichever is better, so
            // a genuine boundary optimum survives the polish.
            for (int round = 0; round < 2 && res.x.lpNorm<Eigen::Infinity>() > 8.0; ++round) {
                Eigen::VectorXd pulled = res.x.cwiseMax(-4.0).cwiseMin(4.0);
                auto polished = optim::lbfgs_minimize(objective, pulled, opts.lbfgs);
                if (polished.value < res.value) {
                    res = std::move(polished);
                } else {
                    break;
                }
            }
            RestartOutcome& outcome = model.info_.starts[t];
            outcome.omega = box_from_unconstrained(res.x[0], kOmegaLo, kOmegaHi);
            outcome.log10_delta2 = box_from_unconstrained(res.x[1], kLogDelta2Lo, kLogDelta2Hi);
            outcome.value = res.value;
            outcome.converged = res.converged;
            outcome.trace = res.trace;
        }

        // best restart first; on a failure fall through to the next best
        std::vector<int> order(starts.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return model.info_.starts[static_cast<std::size_t>(a)].value <
                   model.info_.starts[static_cast<std::size_t>(b)].value;
        });
        std::string last_error = "no feasible restart";
        for (int idx : order) {
            const auto& outcome = model.info_.starts[static_cast<std::size_t>(idx)];
            if (!std::isfinite(outcome.value) || outcome.value >= 1e100) continue;
            try {
                model.finalize(outcome.omega, std::pow(10.0, outcome.log10_delta2));
                model.info_.best_start = idx;
                model.info_.objective = outcome.value;
                return model;
            } catch (const ConditioningError& err) {
                last_error = err.what();
            }
        }
        throw FitError("fit_map: all restarts failed (" + last_error + ")");
    }

    /// Interpolating model with explicitly supplied hyperparameters; sigma2
    /// still comes from its closed form.
    static GPModel with_params(const TrainingSet& train, double omega, double delta2) {
        train.validate();
        GPModel model;
        model.standardize(train);
        model.finalize(omega, delta2);
        return model;
    }

    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    /// Posterior predictive at x, de-standardized to raw output units. By
    /// default the variance is for the latent (noise-free) function; set
    /// include_nugget to add the observation-level nugget term.
    Prediction predict(const Eigen::VectorXd& x, bool include_nugget = false) const {
        if (x.size() != train_.inputs.cols()) throw DimensionError("predict: input dimension mismatch");
        const int n = train_.n();
        const double scale = std::pow(10.0, params_.omega);
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r[i] = std::exp(-scale * (x.transpose() - train_.inputs.row(i)).squaredNorm());

        const double mean_std = r.dot(alpha_);
        const Eigen::VectorXd v = llt_.matrixL().solve(r);
        double var_std = params_.sigma2 * (1.0 - v.squaredNorm());
        var_std = std::clamp(var_std, 0.0, params_.sigma2);
        if (include_nugget) var_std += params_.sigma2 * params_.delta2;

        Prediction out;
        out.mean = y_mean_ + y_scale_ * mean_std;
        out.variance = y_scale_ * y_scale_ * var_std;
        return out;
    }

    /// N x M matrix of independent posterior-marginal draws at the pool
    /// inputs (raw units): entry (j, i) ~ Normal(mean(x_i), var(x_i)).
    /// Realizations use per-row derived streams.
    Eigen::MatrixXd sample_marginals(const Eigen::MatrixXd& pool_inputs, int n_realizations,
                                     std::uint64_t seed) const {
        if (n_realizations < 1) throw ConfigError("sample_marginals: need at least one realization");
        const int m = static_cast<int>(pool_inputs.rows());
        if (m < 1) throw ConfigError("sample_marginals: empty pool");
        Eigen::VectorXd mean(m), sd(m);
        for (int i = 0; i < m; ++i) {
            const auto pred = predict(pool_inputs.row(i).transpose());
            mean[i] = pred.mean;
            sd[i] = std::sqrt(pred.variance);
        }
        Eigen::MatrixXd draws(n_realizations, m);
        for (int j = 0; j < n_realizations; ++j) {
            rng::Engine eng(rng::derive(seed, rng::kRealization, static_cast<std::uint64_t>(j)));
            for (int i = 0; i < m; ++i) draws(j, i) = mean[i] + sd[i] * eng.normal();
        }
        return draws;
    }

    const TrainingSet& standardized_train() const { return train_; }
    const GPHyperParams& params() const { return params_; }
    double y_mean() const { return y_mean_; }
    double y_scale() const { return y_scale_; }
    double jitter() const { return info_.jitter; }
    const FitInfo& fit_info() const { return info_; }
    const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }
    Eigen::MatrixXd chol_lower() const { return llt_.matrixL(); }
    const Eigen::VectorXd& alpha() const { return alpha_; }

private:
    GPModel() = default;

    static double box_from_unconstrained(double z, double lo, double hi) {
        return lo + (hi - lo) / (1.0 + std::exp(-z));
    }
    static double unconstrained_from_box(double theta, double lo, double hi) {
        const double f = std::clamp((theta - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
        return std::log(f / (1.0 - f));
    }
    static double start_coordinate(double theta, double lo, double hi) {
        const double f = std::clamp((theta - lo) / (hi - lo), 0.02, 0.98);
        return std::log(f / (1.0 - f));
    }

    void standardize(const TrainingSet& raw) {
        raw.validate();
        std::tie(y_mean_, y_scale_) = standardization_constants(raw.outputs);
        train_.inputs = raw.inputs;
        train_.outputs = (raw.outputs.array() - y_mean_) / y_scale_;
    }

    void finalize(double omega, double delta2) {
        params_.omega = omega;
        params_.delta2 = delta2;
        auto fact = detail::factorize(build_R_delta(train_, params_));
        params_.sigma2 = sigma2_closed_form(train_.outputs, fact.llt);
        alpha_ = fact.llt.solve(train_.outputs);
        info_.jitter = fact.jitter;
        llt_ = std::move(fact.llt);
    }

    TrainingSet train_;  // standardized outputs
    GPHyperParams params_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    FitInfo info_;
};

/// Spec-shaped convenience wrapper for the common prior-informed case.
inline GPModel fit_map(const TrainingSet& train, const HyperPrior& prior, int restarts, std::uint64_t seed) {
    return GPModel::fit_map(train, prior, restarts, seed);
}

}  // namespace nostra
