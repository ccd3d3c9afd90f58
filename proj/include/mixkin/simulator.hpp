#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixkin/engine.hpp"
#include "mixkin/evidence.hpp"
#include "mixkin/peak_model.hpp"
#include "mixkin/rng.hpp"

namespace mixkin {

// genotypes[i][m]: contributor i's genotype at marker m, frequency-table order
using GenotypeMatrix = std::vector<std::vector<Genotype>>;

GenotypeMatrix sample_hw_genotypes(const FrequencyTable& freqs, int contributors, Rng& rng);

// profile must be typed at every marker of the table
std::vector<Genotype> profile_to_indices(const FrequencyTable& freqs,
                                         const GenotypeProfile& profile);

GenotypeProfile indices_to_profile(const FrequencyTable& freqs,
                                   const std::vector<Genotype>& g,
                                   const std::string& person_id);

// One allele uniformly from the typed parent, the other from the second
// parent when given, otherwise from the population frequencies.
std::vector<Genotype> sample_child_indices(const FrequencyTable& freqs,
                                           const std::vector<Genotype>& parent,
                                           const std::vector<Genotype>* other_parent,
                                           Rng& rng);

GenotypeProfile sample_child(const FrequencyTable& freqs, const GenotypeProfile& parent,
                             const GenotypeProfile* other_parent, std::uint64_t seed,
                             const std::string& person_id);

// Gamma peak heights from the stutter-adjusted doses; a peak is recorded only
// when its height reaches the threshold.
PeakTable simulate_trace(const FrequencyTable& freqs, const GenotypeMatrix& genotypes,
                         const ModelParams& params, double threshold,
                         const std::string& trace_id, std::uint64_t seed);

}  // namespace mixkin
