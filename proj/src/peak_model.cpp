#include "mixkin/peak_model.hpp"

#include <cmath>
#include <limits>

#include "mixkin/errors.hpp"
#include "mixkin/gamma.hpp"

namespace mixkin {

double ModelParams::rho() const { return 1.0 / (sigma * sigma); }
double ModelParams::eta() const { return mu * sigma * sigma; }

void validate_params(const ModelParams& p, int contributors) {
    if (!(p.mu > 0.0)) throw ValidationError("mu must be > 0");
    if (!(p.sigma > 0.0)) throw ValidationError("sigma must be > 0");
    if (!(p.xi >= 0.0) || p.xi >= 1.0) throw ValidationError("xi must be in [0, 1)");
    if (static_cast<int>(p.phi.size()) != contributors)
        throw ValidationError("phi length does not match the contributor roster");
    double sum = 0.0;
    for (double f : p.phi) {
        if (!(f >= 0.0)) throw ValidationError("phi entries must be >= 0");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ValidationError("phi must sum to 1");
}

void reparam(double mu, double sigma, double& rho, double& eta) {
    if (!(mu > 0.0) || !(sigma > 0.0)) throw ValidationError("mu and sigma must be > 0");
    rho = 1.0 / (sigma * sigma);
    eta = mu * sigma * sigma;
}

void reparam_inverse(double rho, double eta, double& mu, double& sigma) {
    if (!(rho > 0.0) || !(eta > 0.0)) throw ValidationError("rho and eta must be > 0");
    mu = rho * eta;
    sigma = 1.0 / std::sqrt(rho);
}

double effective_dose(int a, int donor_above, const std::vector<std::vector<int>>& counts,
                      const std::vector<double>& phi, double xi) {
    double own = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) own += phi[i] * counts[i][a];
    double dose = (1.0 - xi) * own;
    if (donor_above >= 0 && xi > 0.0) {
        double above = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) above += phi[i] * counts[i][donor_above];
        dose += xi * above;
    }
    return dose;
}

double peak_log_term(bool observed, double z, double threshold, double shape, double scale) {
    if (observed && z < 0.0) throw ValidationError("peak height must be >= 0");
    if (!(threshold > 0.0)) throw ValidationError("detection threshold must be > 0");
    if (!(shape >= 0.0)) throw ValidationError("gamma shape must be >= 0");
    if (shape == 0.0)
        return observed ? -std::numeric_limits<double>::infinity() : 0.0;
    return observed ? log_gamma_pdf(z, shape, scale) : log_gamma_cdf(threshold, shape, scale);
}

}  // namespace mixkin
