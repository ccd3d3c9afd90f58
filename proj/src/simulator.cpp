#include "mixkin/simulator.hpp"

#include <algorithm>

#include "mixkin/errors.hpp"

namespace mixkin {

GenotypeMatrix sample_hw_genotypes(const FrequencyTable& freqs, int contributors, Rng& rng) {
    if (contributors <= 0) throw ValidationError("need at least one contributor");
    GenotypeMatrix g(contributors);
    for (int i = 0; i < contributors; ++i) {
        g[i].reserve(freqs.markers.size());
        for (const auto& panel : freqs.markers) {
            int n = static_cast<int>(panel.freq.size());
            int x = rng.categorical(panel.freq.data(), n);
            int y = rng.categorical(panel.freq.data(), n);
            if (x > y) std::swap(x, y);
            g[i].push_back(Genotype{x, y});
        }
    }
    return g;
}

std::vector<Genotype> profile_to_indices(const FrequencyTable& freqs,
                                         const GenotypeProfile& profile) {
    std::vector<Genotype> out;
    out.reserve(freqs.markers.size());
    for (const auto& panel : freqs.markers) {
        if (!profile.typed_at(panel.marker))
            throw ValidationError("profile '" + profile.person_id +
                                  "' is untyped at marker " + panel.marker);
        out.push_back(genotype_indices(panel, profile.markers.at(panel.marker)));
    }
    return out;
}

GenotypeProfile indices_to_profile(const FrequencyTable& freqs,
                                   const std::vector<Genotype>& g,
                                   const std::string& person_id) {
    if (g.size() != freqs.markers.size())
        throw InternalError("genotype list does not span the table");
    GenotypeProfile p;
    p.person_id = person_id;
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto& panel = freqs.markers[m];
        GenotypePair pair{panel.alleles.at(g[m].x), panel.alleles.at(g[m].y)};
        p.markers[panel.marker] = pair;
    }
    return p;
}

std::vector<Genotype> sample_child_indices(const FrequencyTable& freqs,
                                           const std::vector<Genotype>& parent,
                                           const std::vector<Genotype>* other_parent,
                                           Rng& rng) {
    if (parent.size() != freqs.markers.size())
        throw ValidationError("parent genotypes do not span the table");
    if (other_parent && other_parent->size() != freqs.markers.size())
        throw ValidationError("second parent genotypes do not span the table");
    std::vector<Genotype> child;
    child.reserve(parent.size());
    for (std::size_t m = 0; m < parent.size(); ++m) {
        int from_parent = rng.uniform() < 0.5 ? parent[m].x : parent[m].y;
        int other;
        if (other_parent) {
            const Genotype& og = (*other_parent)[m];
            other = rng.uniform() < 0.5 ? og.x : og.y;
        } else {
            const auto& panel = freqs.markers[m];
            other = rng.categorical(panel.freq.data(), static_cast<int>(panel.freq.size()));
        }
        int x = from_parent, y = other;
        if (x > y) std::swap(x, y);
        child.push_back(Genotype{x, y});
    }
    return child;
}

GenotypeProfile sample_child(const FrequencyTable& freqs, const GenotypeProfile& parent,
                             const GenotypeProfile* other_parent, std::uint64_t seed,
                             const std::string& person_id) {
    Rng rng(seed);
    std::vector<Genotype> pg = profile_to_indices(freqs, parent);
    std::vector<Genotype> og;
    if (other_parent) og = profile_to_indices(freqs, *other_parent);
    std::vector<Genotype> cg =
        sample_child_indices(freqs, pg, other_parent ? &og : nullptr, rng);
    return indices_to_profile(freqs, cg, person_id);
}

PeakTable simulate_trace(const FrequencyTable& freqs, const GenotypeMatrix& genotypes,
                         const ModelParams& params, double threshold,
                         const std::string& trace_id, std::uint64_t seed) {
    const int I = static_cast<int>(genotypes.size());
    validate_params(params, I);
    if (!(threshold > 0.0)) throw ValidationError("detection threshold must be > 0");
    for (const auto& g : genotypes)
        if (g.size() != freqs.markers.size())
            throw ValidationError("genotypes do not span the table");
    double rho, eta;
    reparam(params.mu, params.sigma, rho, eta);

    Rng rng(seed);
    PeakTable pt;
    pt.trace_id = trace_id;
    pt.threshold = threshold;
    for (std::size_t m = 0; m < freqs.markers.size(); ++m) {
        const auto& panel = freqs.markers[m];
        const int A = static_cast<int>(panel.alleles.size());
        std::vector<double> weighted(A, 0.0);
        for (int i = 0; i < I; ++i) {
            weighted[genotypes[i][m].x] += params.phi[i];
            weighted[genotypes[i][m].y] += params.phi[i];
        }
        std::vector<Peak> peaks;
        for (int a = 0; a < A; ++a) {
            double dose = (1.0 - params.xi) * weighted[a];
            if (a + 1 < A && one_repeat_above(panel.alleles[a], panel.alleles[a + 1]))
                dose += params.xi * weighted[a + 1];
            double h = rng.gamma(rho * dose, eta);
            if (h >= threshold) peaks.push_back(Peak{panel.alleles[a], h, false});
        }
        if (!peaks.empty()) pt.markers[panel.marker] = std::move(peaks);
    }
    return pt;
}

}  // namespace mixkin
