#include "mixkin/deconvolution.hpp"

#include <algorithm>
#include <fstream>

#include "mixkin/csv.hpp"
#include "mixkin/errors.hpp"

namespace mixkin {

RankedGenotypes rank_genotypes(const GenotypePosterior& posterior, int top_k) {
    RankedGenotypes out;
    out.marker = posterior.marker;
    out.contributor = posterior.contributor;
    out.entries.reserve(posterior.entries.size());
    for (const auto& [g, p] : posterior.entries) out.entries.push_back(RankedEntry{g, p, false});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         return a.probability > b.probability;
                     });
    if (top_k > 0 && static_cast<int>(out.entries.size()) > top_k) out.entries.resize(top_k);
    return out;
}

void annotate_compatibility(RankedGenotypes& ranked,
                            const std::function<double(const Genotype&)>& lr_ugt) {
    for (RankedEntry& e : ranked.entries) e.compatible = lr_ugt(e.g) > 0.0;
    ranked.has_compatibility = true;
}

void write_deconvolution_csv(const std::string& path,
                             const std::vector<RankedGenotypes>& rankings,
                             const FrequencyTable& freqs,
                             const std::vector<std::string>& contributor_ids,
                             const std::vector<std::string>& extra_comments) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    bool flags = false;
    for (const auto& r : rankings) flags = flags || r.has_compatibility;
    for (const auto& c : extra_comments) out << "# " << c << "\n";
    out << "marker,contributor,rank,allele1,allele2,probability";
    if (flags) out << ",compatible";
    out << "\n";
    for (const auto& r : rankings) {
        const MarkerFrequencies* panel = freqs.find(r.marker);
        if (!panel) throw InternalError("ranking for a marker missing from the table");
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            const RankedEntry& e = r.entries[i];
            out << r.marker << ',' << contributor_ids.at(r.contributor) << ',' << i + 1 << ','
                << panel->alleles.at(e.g.x).text << ',' << panel->alleles.at(e.g.y).text << ','
                << format_double(e.probability);
            if (flags) out << ',' << (e.compatible ? 1 : 0);
            out << "\n";
        }
    }
    if (!out.good()) throw ValidationError("failed writing " + path);
}

}  // namespace mixkin
