#pragma once

// Exhaustive reference for the marker likelihood. Enumerates every genotype
// combination outright and shares nothing with the engine's forward pass
// except the scalar gamma functions, which have their own fixture table.

#include <cmath>
#include <limits>
#include <vector>

#include "mixkin/engine.hpp"
#include "mixkin/gamma.hpp"

namespace bf {

struct WeightedGenotype {
    mixkin::Genotype g;
    double w = 0.0;
};

// Prior genotype support for one contributor under its chain.
inline std::vector<WeightedGenotype> genotype_support(const mixkin::ChainSpec& spec,
                                                      const std::vector<double>& q) {
    const int na = static_cast<int>(q.size());
    std::vector<WeightedGenotype> out;
    auto add = [&](int x, int y, double w) {
        if (x > y) std::swap(x, y);
        for (auto& e : out)
            if (e.g.x == x && e.g.y == y) {
                e.w += w;
                return;
            }
        out.push_back({mixkin::Genotype{x, y}, w});
    };
    switch (spec.kind) {
        case mixkin::ChainSpec::kFixed:
            add(spec.fixed.x, spec.fixed.y, 1.0);
            break;
        case mixkin::ChainSpec::kFree:
            for (int x = 0; x < na; ++x)
                for (int y = 0; y < na; ++y) add(x, y, q[x] * q[y]);
            break;
        case mixkin::ChainSpec::kIbd:
            for (int y = 0; y < na; ++y) add(spec.ibd_pos, y, q[y]);
            break;
        case mixkin::ChainSpec::kMeiosis:
            // father (x, y) ordered, uniform paternal pick, mother allele from
            // the population; keep paths whose child matches child_counts
            for (int x = 0; x < na; ++x)
                for (int y = 0; y < na; ++y)
                    for (int pick = 0; pick < 2; ++pick)
                        for (int m = 0; m < na; ++m) {
                            int paternal = pick ? y : x;
                            std::vector<int> child(na, 0);
                            child[paternal]++;
                            child[m]++;
                            if (child == spec.child_counts)
                                add(x, y, q[x] * q[y] * 0.5 * q[m]);
                        }
            break;
    }
    return out;
}

inline double marker_log_likelihood(const mixkin::MarkerCase& mc,
                                    const std::vector<mixkin::CountFactor>& factors = {}) {
    const double kNegInf = -std::numeric_limits<double>::infinity();
    const int na = static_cast<int>(mc.q.size());
    const int ni = static_cast<int>(mc.chains.size());

    std::vector<std::vector<WeightedGenotype>> support;
    for (const auto& c : mc.chains) support.push_back(genotype_support(c, mc.q));

    std::vector<double> terms;
    std::vector<int> idx(ni, 0);
    for (;;) {
        double logw = 0.0;
        std::vector<std::vector<int>> counts(ni, std::vector<int>(na, 0));
        for (int i = 0; i < ni; ++i) {
            const WeightedGenotype& wg = support[i][idx[i]];
            logw += std::log(wg.w);
            counts[i][wg.g.x]++;
            counts[i][wg.g.y]++;
        }
        for (const auto& f : factors) {
            double w = f.w[counts[f.contributor][f.position]];
            logw += w > 0.0 ? std::log(w) : kNegInf;
        }
        for (const auto& tr : mc.traces) {
            for (int p = 0; p < na; ++p) {
                double dose = 0.0;
                for (int i = 0; i < ni; ++i) {
                    dose += (1.0 - tr.xi) * tr.phi[i] * counts[i][p];
                    if (mc.donor_above[p] >= 0)
                        dose += tr.xi * tr.phi[i] * counts[i][mc.donor_above[p]];
                }
                double shape = tr.rho * dose;
                double z = tr.height[p];
                if (z >= 0.0)
                    logw += shape > 0.0 ? mixkin::log_gamma_pdf(z, shape, tr.eta) : kNegInf;
                else if (shape > 0.0)
                    logw += mixkin::log_gamma_cdf(tr.threshold, shape, tr.eta);
            }
        }
        terms.push_back(logw);
        int k = ni - 1;
        while (k >= 0 && ++idx[k] == static_cast<int>(support[k].size())) idx[k--] = 0;
        if (k < 0) break;
    }

    double mx = kNegInf;
    for (double t : terms) mx = std::max(mx, t);
    if (mx == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - mx);
    return mx + std::log(acc);
}

}  // namespace bf
