// Minimal ask/tell example: the caller owns objective evaluation, the
// optimizer only proposes designs and receives observations.

#include <iostream>

#include "nostra/optimizer.hpp"
#include "nostra/problems.hpp"

int main() {
    const auto problem = nostra::make_branin_currin(/*noise_fraction=*/0.05);

    nostra::OptimizerConfig config;
    config.d = problem.dim();
    config.k_objectives = problem.num_objectives();
    config.budget = 16;
    config.cluster_mode = nostra::ClusterMode::elbow;
    config.seed = 42;
    const Eigen::VectorXd ranges = problem.ranges();
    for (int k = 0; k < problem.num_objectives(); ++k)
        config.noise_sd.push_back(problem.noise_fraction * ranges[k]);

    nostra::Optimizer opt(config, problem.domain, nostra::reference_point_for(problem));

    for (int eval = 0; eval < config.budget; ++eval) {
        const Eigen::VectorXd x = opt.propose();
        const auto obs = nostra::observe(problem, x, nostra::rng::derive(config.seed, 1000, eval));
        opt.tell(x, obs.values);
        std::cout << (opt.initializing() ? "init" : "iter") << " x=(" << x.transpose() << ") y=("
                  << obs.values.transpose() << ")\n";
    }

    const auto frontier = opt.current_frontier();
    std::cout << "frontier size after " << config.budget << " evaluations: " << frontier.size() << '\n';
    return 0;
}
