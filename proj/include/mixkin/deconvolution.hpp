#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixkin/engine.hpp"

namespace mixkin {

struct RankedEntry {
    Genotype g;
    double probability = 0.0;
    bool compatible = false;
};

struct RankedGenotypes {
    std::string marker;
    int contributor = 0;
    std::vector<RankedEntry> entries;  // descending probability
    bool has_compatibility = false;
};

// Descending probability; equal probabilities keep allele-lexicographic
// order. top_k <= 0 lists the full support.
RankedGenotypes rank_genotypes(const GenotypePosterior& posterior, int top_k);

// Flags each genotype compatible iff the supplied relationship ratio is
// positive for it.
void annotate_compatibility(RankedGenotypes& ranked,
                            const std::function<double(const Genotype&)>& lr_ugt);

// Rows: marker,contributor,rank,allele1,allele2,probability[,compatible].
// The compatible column appears only when the rankings carry flags.
void write_deconvolution_csv(const std::string& path,
                             const std::vector<RankedGenotypes>& rankings,
                             const FrequencyTable& freqs,
                             const std::vector<std::string>& contributor_ids,
                             const std::vector<std::string>& extra_comments = {});

}  // namespace mixkin
