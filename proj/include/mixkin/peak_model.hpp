#pragma once

#include <vector>

namespace mixkin {

// Per-trace parameters of the peak-height model. Heights at an allele carried
// n times by a contributor with fraction phi_i follow a gamma distribution
// with shape rho*phi_i*n and scale eta; mu = rho*eta is the mean peak height
// of a clean heterozygous single source and sigma = 1/sqrt(rho) its
// coefficient of variation. xi is the mean stutter proportion.
struct ModelParams {
    double mu = 0.0;
    double sigma = 0.0;
    double xi = 0.0;
    std::vector<double> phi;  // contributor fractions in roster order, sum 1

    double rho() const;
    double eta() const;
};

void validate_params(const ModelParams& p, int contributors);

// (mu, sigma) <-> (rho, eta): rho = 1/sigma^2, eta = mu*sigma^2.
void reparam(double mu, double sigma, double& rho, double& eta);
void reparam_inverse(double rho, double eta, double& mu, double& sigma);

// Effective dose at panel position a: the position keeps (1-xi) of its own
// weighted counts and receives xi of the position one repeat unit above
// (donor_above = that position's index, or -1 when the panel has no exact
// one-repeat neighbour).
double effective_dose(int a, int donor_above, const std::vector<std::vector<int>>& counts,
                      const std::vector<double>& phi, double xi);

// One allele position's log-likelihood factor: log pdf of the height when
// observed (z >= C), log CDF at C when not. shape == 0 means no dose: the
// factor is 0 for a dropout and -inf for an observed peak.
// z < 0 is a domain error; pass z < 0 never, "unobserved" via the flag.
double peak_log_term(bool observed, double z, double threshold, double shape, double scale);

}  // namespace mixkin
