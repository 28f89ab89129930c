#pragma once

// Umbrella header: multi-objective Bayesian optimization with prior-informed
// GP surrogates and probability-clustered trust regions.

#include "nostra/bench.hpp"
#include "nostra/domain.hpp"
#include "nostra/errors.hpp"
#include "nostra/gp.hpp"
#include "nostra/optimizer.hpp"
#include "nostra/pareto.hpp"
#include "nostra/problems.hpp"
#include "nostra/rng.hpp"
#include "nostra/sampling.hpp"
#include "nostra/trust_region.hpp"
