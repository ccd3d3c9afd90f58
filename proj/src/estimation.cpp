#include "mixkin/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixkin/engine.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/optimizer.hpp"
#include "mixkin/rng.hpp"

namespace mixkin {

namespace {

constexpr double kSnapTol = 1e-7;

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double w) { return 1.0 / (1.0 + std::exp(-w)); }
double clamp_ratio(double r) { return std::min(1.0 - 1e-12, std::max(1e-12, r)); }

// Maps between per-trace (mu, sigma, xi, phi) and the unconstrained
// coordinates the optimizer works in: log mu, log sigma, logit xi (when xi is
// free), and stick-breaking logits over the contributors still carrying mass.
// Parameters snapped to a boundary leave the coordinate vector entirely.
struct Packing {
    int ntraces = 0;
    int I = 0;
    std::vector<char> xi_active;
    std::vector<std::vector<char>> phi_active;

    int active_phi(int t) const {
        int k = 0;
        for (char c : phi_active[t]) k += c != 0;
        return k;
    }

    int dim() const {
        int d = 0;
        for (int t = 0; t < ntraces; ++t) {
            d += 2;
            if (xi_active[t]) ++d;
            d += std::max(0, active_phi(t) - 1);
        }
        return d;
    }

    std::vector<double> pack(const std::vector<ModelParams>& ps) const {
        std::vector<double> x;
        x.reserve(dim());
        for (int t = 0; t < ntraces; ++t) {
            x.push_back(std::log(ps[t].mu));
            x.push_back(std::log(ps[t].sigma));
            if (xi_active[t]) x.push_back(logit(clamp_ratio(ps[t].xi)));
            int K = active_phi(t), seen = 0;
            double rem = 1.0;
            for (int i = 0; i < I && seen < K - 1; ++i) {
                if (!phi_active[t][i]) continue;
                ++seen;
                double r = clamp_ratio(ps[t].phi[i] / rem);
                x.push_back(logit(r));
                rem -= ps[t].phi[i];
            }
        }
        return x;
    }

    std::vector<ModelParams> unpack(const std::vector<double>& x) const {
        std::vector<ModelParams> ps(ntraces);
        std::size_t c = 0;
        for (int t = 0; t < ntraces; ++t) {
            ps[t].mu = std::exp(x[c++]);
            ps[t].sigma = std::exp(x[c++]);
            ps[t].xi = xi_active[t] ? sigmoid(x[c++]) : 0.0;
            ps[t].phi.assign(I, 0.0);
            int K = active_phi(t), seen = 0, last = -1;
            double rem = 1.0;
            for (int i = 0; i < I; ++i) {
                if (!phi_active[t][i]) continue;
                last = i;
                if (seen < K - 1) {
                    ++seen;
                    double f = sigmoid(x[c++]);
                    ps[t].phi[i] = rem * f;
                    rem *= 1.0 - f;
                }
            }
            if (last >= 0 && ps[t].phi[last] == 0.0) ps[t].phi[last] = rem;
        }
        return ps;
    }
};

struct CaseObjective {
    const CaseBundle* bundle;
    const Packing* pk;
    int threads;

    double operator()(const std::vector<double>& x) const {
        try {
            auto params = pk->unpack(x);
            CaseView view = build_case_view(*bundle, params);
            return -case_log_likelihood(view, threads);
        } catch (const ValidationError&) {
            return std::numeric_limits<double>::infinity();
        }
    }
};

}  // namespace

FitResult fit(const CaseBundle& bundle, const FitOptions& opt) {
    if (bundle.traces.empty()) throw ValidationError("fit requires at least one trace");
    if (bundle.roster.empty()) throw ValidationError("fit requires a contributor roster");
    const int T = static_cast<int>(bundle.traces.size());
    const int I = static_cast<int>(bundle.roster.size());

    std::vector<double> trace_mean(T, 0.0);
    double gsum = 0.0;
    long gcount = 0;
    for (int t = 0; t < T; ++t) {
        double s = 0.0;
        long n = 0;
        for (const auto& [marker, peaks] : bundle.traces[t].markers)
            for (const Peak& p : peaks) {
                if (p.sub_threshold) continue;
                s += p.height;
                ++n;
            }
        gsum += s;
        gcount += n;
        trace_mean[t] = n > 0 ? s / n : 0.0;
    }
    if (gcount == 0) throw ValidationError("no observed peaks to fit to");
    double gmean = gsum / gcount;
    for (int t = 0; t < T; ++t)
        if (trace_mean[t] <= 0.0) trace_mean[t] = gmean;

    bool any_stutter = false;
    for (const auto& panel : bundle.freqs.markers)
        for (std::size_t a = 0; a + 1 < panel.alleles.size(); ++a)
            if (one_repeat_above(panel.alleles[a], panel.alleles[a + 1])) any_stutter = true;

    Packing pk;
    pk.ntraces = T;
    pk.I = I;
    pk.xi_active.assign(T, any_stutter ? 1 : 0);
    pk.phi_active.assign(T, std::vector<char>(I, 1));

    std::vector<ModelParams> start(T);
    for (int t = 0; t < T; ++t) {
        start[t].mu = trace_mean[t];
        start[t].sigma = 0.6;
        start[t].xi = any_stutter ? 0.05 : 0.0;
        start[t].phi.assign(I, 1.0 / I);
    }

    CaseObjective obj{&bundle, &pk, opt.threads};
    OptimizerOptions oopt;
    oopt.max_iter = opt.max_iter;

    std::vector<double> x0 = pk.pack(start);
    const int restarts = std::max(1, opt.restarts);
    OptimResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> xr = x0;
        if (r > 0) {
            Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(r)));
            for (double& v : xr) v += 0.25 * rng.normal();
        }
        OptimResult res = minimize_bfgs(obj, xr, oopt);
        if (!have || res.f < best.f) {
            best = std::move(res);
            have = true;
        }
    }
    int iterations = best.iterations;

    // boundary snapping: zero out vanishing xi/phi and re-optimize the rest
    auto params = pk.unpack(best.x);
    for (int round = 0; round <= I + 1; ++round) {
        bool changed = false;
        for (int t = 0; t < T; ++t) {
            if (pk.xi_active[t] && params[t].xi < kSnapTol) {
                pk.xi_active[t] = 0;
                params[t].xi = 0.0;
                changed = true;
            }
            for (int i = 0; i < I; ++i)
                if (pk.phi_active[t][i] && params[t].phi[i] < kSnapTol) {
                    pk.phi_active[t][i] = 0;
                    params[t].phi[i] = 0.0;
                    changed = true;
                }
            double mass = std::accumulate(params[t].phi.begin(), params[t].phi.end(), 0.0);
            if (changed && mass > 0.0)
                for (double& f : params[t].phi) f /= mass;
        }
        if (!changed) break;
        OptimResult res = minimize_bfgs(obj, pk.pack(params), oopt);
        iterations += res.iterations;
        best = std::move(res);
        params = pk.unpack(best.x);
    }

    double ll = case_log_likelihood(build_case_view(bundle, params), opt.threads);

    // covariance in transformed coordinates, mapped by a numeric Jacobian
    const int dim = pk.dim();
    auto cov = numeric_hessian(obj, best.x, 1e-3);
    bool cov_ok = spd_inverse(cov);
    const int NP = 3 + I;  // mu, sigma, xi, phi per trace
    std::vector<std::vector<double>> jac(static_cast<std::size_t>(T) * NP,
                                         std::vector<double>(dim, 0.0));
    auto natural = [&](const std::vector<double>& x) {
        auto ps = pk.unpack(x);
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(T) * NP);
        for (int t = 0; t < T; ++t) {
            out.push_back(ps[t].mu);
            out.push_back(ps[t].sigma);
            out.push_back(ps[t].xi);
            for (int i = 0; i < I; ++i) out.push_back(ps[t].phi[i]);
        }
        return out;
    };
    if (cov_ok) {
        std::vector<double> xp = best.x;
        for (int c = 0; c < dim; ++c) {
            double h = 1e-6;
            xp[c] = best.x[c] + h;
            auto np = natural(xp);
            xp[c] = best.x[c] - h;
            auto nm = natural(xp);
            xp[c] = best.x[c];
            for (std::size_t k = 0; k < np.size(); ++k)
                jac[k][c] = (np[k] - nm[k]) / (2.0 * h);
        }
    }
    auto se_of = [&](int row) -> std::pair<bool, double> {
        if (!cov_ok) return {false, 0.0};
        double var = 0.0;
        for (int c = 0; c < dim; ++c)
            for (int d = 0; d < dim; ++d) var += jac[row][c] * cov[c][d] * jac[row][d];
        if (!(var > 0.0) || !std::isfinite(var)) return {false, 0.0};
        return {true, std::sqrt(var)};
    };

    FitResult result;
    result.log_likelihood = ll;
    result.iterations = iterations;
    result.grad_norm = best.grad_norm;
    result.converged = best.converged;
    result.seed = opt.seed;
    result.restarts = restarts;
    result.traces.resize(T);
    for (int t = 0; t < T; ++t) {
        TraceFit& tf = result.traces[t];
        tf.trace_id = bundle.traces[t].trace_id;
        tf.params = params[t];
        int base = t * NP;
        tf.mu.value = params[t].mu;
        std::tie(tf.mu.se_available, tf.mu.se) = se_of(base + 0);
        tf.sigma.value = params[t].sigma;
        std::tie(tf.sigma.se_available, tf.sigma.se) = se_of(base + 1);
        tf.xi.value = params[t].xi;
        tf.xi.at_boundary = !pk.xi_active[t];
        if (pk.xi_active[t]) std::tie(tf.xi.se_available, tf.xi.se) = se_of(base + 2);
        tf.phi.resize(I);
        for (int i = 0; i < I; ++i) {
            tf.phi[i].value = params[t].phi[i];
            tf.phi[i].at_boundary = !pk.phi_active[t][i];
            if (pk.phi_active[t][i] && pk.active_phi(t) > 1)
                std::tie(tf.phi[i].se_available, tf.phi[i].se) = se_of(base + 3 + i);
        }
    }

    std::vector<int> unknown_pos;
    for (int i = 0; i < I; ++i)
        if (!bundle.roster[i].known()) unknown_pos.push_back(i);
    std::vector<int> ranked = unknown_pos;
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return params[0].phi[a] > params[0].phi[b];
    });
    result.display_order.resize(I);
    std::iota(result.display_order.begin(), result.display_order.end(), 0);
    for (std::size_t j = 0; j < unknown_pos.size(); ++j)
        result.display_order[unknown_pos[j]] = ranked[j];
    return result;
}

ParamsContext null_mle_context(const FitResult& result) {
    ParamsContext ctx;
    ctx.params.reserve(result.traces.size());
    for (const auto& tf : result.traces) ctx.params.push_back(tf.params);
    return ctx;
}

}  // namespace mixkin
