#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixkin/evidence.hpp"
#include "mixkin/peak_model.hpp"

namespace mixkin {

struct ParamEstimate {
    double value = 0.0;
    double se = 0.0;
    bool se_available = false;
    bool at_boundary = false;
};

struct TraceFit {
    std::string trace_id;
    ModelParams params;
    ParamEstimate mu, sigma, xi;
    std::vector<ParamEstimate> phi;  // roster order
};

struct FitOptions {
    int restarts = 5;
    std::uint64_t seed = 1;
    int threads = 1;
    int max_iter = 500;
};

struct FitResult {
    std::vector<TraceFit> traces;
    double log_likelihood = 0.0;
    int iterations = 0;      // of the winning optimizer run
    double grad_norm = 0.0;  // inf-norm over transformed coordinates at the end
    bool converged = false;
    std::uint64_t seed = 0;
    int restarts = 0;
    // printing order: unknown contributors sorted by descending share in the
    // first trace; known contributors keep their roster positions
    std::vector<int> display_order;
};

// Maximum-likelihood fit of all per-trace parameters under the
// no-relationship model, multistart from a jittered default start.
// Throws ValidationError when the case has no observed peaks at all.
FitResult fit(const CaseBundle& bundle, const FitOptions& opt = {});

// Frozen parameter snapshot every likelihood-ratio evaluation runs under.
struct ParamsContext {
    std::vector<ModelParams> params;  // per trace, bit-for-bit the fit values
};

ParamsContext null_mle_context(const FitResult& result);

}  // namespace mixkin
