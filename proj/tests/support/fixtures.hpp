#pragma once

// Builders for synthetic panels, marker cases, and family bundles shared by
// the unit and acceptance suites.

#include <string>
#include <utility>
#include <vector>

#include "mixkin/engine.hpp"
#include "mixkin/estimation.hpp"
#include "mixkin/evidence.hpp"
#include "mixkin/kinship.hpp"
#include "mixkin/rng.hpp"
#include "mixkin/simulator.hpp"

namespace fx {

inline mixkin::MarkerFrequencies named_panel(
    const std::string& marker, const std::vector<std::pair<std::string, double>>& rows) {
    mixkin::MarkerFrequencies p;
    p.marker = marker;
    for (const auto& [label, f] : rows) {
        p.alleles.push_back(mixkin::parse_allele_label(label));
        p.freq.push_back(f);
    }
    return p;
}

// consecutive repeat ladder starting at `start`, one label per frequency
inline mixkin::MarkerFrequencies ladder_panel(const std::string& marker,
                                              const std::vector<double>& freq,
                                              int start = 10) {
    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t i = 0; i < freq.size(); ++i)
        rows.emplace_back(std::to_string(start + static_cast<int>(i)), freq[i]);
    return named_panel(marker, rows);
}

inline std::vector<double> random_freqs(mixkin::Rng& rng, int n, double floor = 0.05) {
    std::vector<double> f(n);
    double sum = 0.0;
    for (double& v : f) {
        v = floor + rng.uniform();
        sum += v;
    }
    for (double& v : f) v /= sum;
    return f;
}

inline mixkin::FrequencyTable equifrequent_table(int markers, int alleles, int start = 8) {
    mixkin::FrequencyTable ft;
    for (int m = 0; m < markers; ++m)
        ft.markers.push_back(ladder_panel("M" + std::to_string(m + 1),
                                          std::vector<double>(alleles, 1.0 / alleles), start));
    return ft;
}

// Random small instance for oracle comparisons: 1..max_i contributors,
// 2..max_a alleles, 1-2 traces, random stutter topology and dropout, heights
// drawn around a sampled genotype truth so most instances carry real peaks.
inline mixkin::MarkerCase random_case(mixkin::Rng& rng, int max_i = 3, int max_a = 4,
                                      bool allow_fixed = true) {
    const int na = 2 + static_cast<int>(rng.uniform() * (max_a - 1));
    const int ni = 1 + static_cast<int>(rng.uniform() * max_i);
    const int nt = rng.uniform() < 0.35 ? 2 : 1;

    mixkin::MarkerCase mc;
    mc.marker = "M1";
    mc.q = random_freqs(rng, na);
    mc.donor_above.assign(na, -1);
    for (int a = 0; a + 1 < na; ++a)
        if (rng.uniform() < 0.5) mc.donor_above[a] = a + 1;

    std::vector<std::vector<int>> counts(ni, std::vector<int>(na, 0));
    for (int i = 0; i < ni; ++i) {
        mixkin::ChainSpec c;
        if (allow_fixed && rng.uniform() < 0.25) {
            c.kind = mixkin::ChainSpec::kFixed;
            int x = static_cast<int>(rng.uniform() * na);
            int y = static_cast<int>(rng.uniform() * na);
            c.fixed = {std::min(x, y), std::max(x, y)};
            counts[i][c.fixed.x]++;
            counts[i][c.fixed.y]++;
        } else {
            counts[i][rng.categorical(mc.q.data(), na)]++;
            counts[i][rng.categorical(mc.q.data(), na)]++;
        }
        mc.chains.push_back(c);
    }

    for (int t = 0; t < nt; ++t) {
        mixkin::TraceEvidence tr;
        tr.threshold = 50.0;
        double sigma = 0.3 + 0.6 * rng.uniform();
        double mu = 400.0 + 1200.0 * rng.uniform();
        tr.rho = 1.0 / (sigma * sigma);
        tr.eta = mu * sigma * sigma;
        tr.xi = rng.uniform() < 0.4 ? 0.0 : 0.15 * rng.uniform();
        tr.phi = random_freqs(rng, ni, 0.1);
        tr.height.assign(na, -1.0);
        for (int p = 0; p < na; ++p) {
            double dose = 0.0;
            for (int i = 0; i < ni; ++i) {
                dose += (1.0 - tr.xi) * tr.phi[i] * counts[i][p];
                if (mc.donor_above[p] >= 0)
                    dose += tr.xi * tr.phi[i] * counts[i][mc.donor_above[p]];
            }
            double z = rng.gamma(tr.rho * dose, tr.eta);
            if (z >= tr.threshold) tr.height[p] = z;
        }
        mc.traces.push_back(std::move(tr));
    }
    return mc;
}

struct FamilyCase {
    mixkin::CaseBundle bundle;  // roster U1..Uk, all unknown
    mixkin::ParamsContext ctx;  // true parameters, frozen
    mixkin::Hypothesis hyp;     // U1 is the alleged parent of typed child C
};

// Mixture of `contributors` unknowns whose first member truly fathered the
// typed child C; optionally C's true mother M is typed as well.
inline FamilyCase random_family(std::uint64_t seed, int markers = 5, int max_alleles = 4,
                                int contributors = 1, bool with_mother = false,
                                const mixkin::FrequencyTable* fixed_table = nullptr,
                                const mixkin::ModelParams* fixed_params = nullptr) {
    mixkin::Rng rng(seed);
    FamilyCase fc;

    if (fixed_table) {
        fc.bundle.freqs = *fixed_table;
    } else {
        for (int m = 0; m < markers; ++m) {
            int na = 2 + static_cast<int>(rng.uniform() * (max_alleles - 1));
            fc.bundle.freqs.markers.push_back(
                ladder_panel("M" + std::to_string(m + 1), random_freqs(rng, na), 8));
        }
    }
    const auto& ft = fc.bundle.freqs;

    mixkin::GenotypeMatrix people = mixkin::sample_hw_genotypes(ft, contributors + 1, rng);
    std::vector<mixkin::Genotype> mother = people.back();
    people.pop_back();  // rows 0..contributors-1 are the mixture
    std::vector<mixkin::Genotype> child =
        mixkin::sample_child_indices(ft, people[0], with_mother ? &mother : nullptr, rng);

    mixkin::ModelParams params;
    if (fixed_params) {
        params = *fixed_params;
    } else {
        params.mu = 600.0 + 800.0 * rng.uniform();
        params.sigma = 0.4 + 0.3 * rng.uniform();
        params.xi = rng.uniform() < 0.5 ? 0.0 : 0.1 * rng.uniform();
        params.phi = random_freqs(rng, contributors, 0.15);
    }

    fc.bundle.traces.push_back(
        mixkin::simulate_trace(ft, people, params, 50.0, "T1", rng.next_u64()));
    fc.bundle.profiles["C"] = mixkin::indices_to_profile(ft, child, "C");
    if (with_mother) fc.bundle.profiles["M"] = mixkin::indices_to_profile(ft, mother, "M");
    for (int i = 0; i < contributors; ++i)
        fc.bundle.roster.push_back({"U" + std::to_string(i + 1), ""});
    mixkin::finalize_bundle(fc.bundle);

    fc.ctx.params = {params};
    fc.hyp.name = "paternity";
    fc.hyp.target = "U1";
    fc.hyp.kind = with_mother ? mixkin::RelKind::kParentChildTypedMother
                              : mixkin::RelKind::kParentChild;
    fc.hyp.child_profile = "C";
    if (with_mother) fc.hyp.mother_profile = "M";
    return fc;
}

}  // namespace fx
