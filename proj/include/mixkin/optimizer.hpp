#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mixkin {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimizerOptions {
    int max_iter = 500;
    // converged when the gradient inf-norm is <= grad_tol * max(1, |f|)
    double grad_tol = 1e-6;
    double fd_step = 1e-5;
};

struct OptimResult {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;  // inf-norm at x
    int iterations = 0;
    bool converged = false;
};

std::vector<double> numeric_gradient(const Objective& f, const std::vector<double>& x,
                                     double step);

std::vector<std::vector<double>> numeric_hessian(const Objective& f,
                                                 const std::vector<double>& x, double step);

// Quasi-Newton minimizer: BFGS inverse-Hessian updates with Armijo
// backtracking; non-finite objective values act as rejected steps.
OptimResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                          const OptimizerOptions& opt = {});

// In-place inverse of a symmetric positive definite matrix via Cholesky.
// Returns false (matrix untouched beyond scratch) when not positive definite.
bool spd_inverse(std::vector<std::vector<double>>& a);

}  // namespace mixkin
