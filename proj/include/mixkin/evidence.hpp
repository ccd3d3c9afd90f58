#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mixkin/alleles.hpp"

namespace mixkin {

struct MarkerFrequencies {
    std::string marker;
    std::vector<AlleleLabel> alleles;  // ascending
    std::vector<double> freq;          // normalized, strictly positive
    // -1 when the label is not in the panel
    int index_of(const AlleleLabel& a) const;
};

struct FrequencyTable {
    std::vector<MarkerFrequencies> markers;  // file order
    std::vector<std::string> warnings;       // normalization notices
    std::vector<std::string> augmentations;  // alleles added by flooring

    const MarkerFrequencies* find(const std::string& marker) const;
    MarkerFrequencies* find(const std::string& marker);
};

struct Peak {
    AlleleLabel allele;
    double height = 0.0;
    bool sub_threshold = false;  // recorded below C; treated as unobserved
};

struct PeakTable {
    std::string trace_id;
    double threshold = 0.0;  // C
    // marker -> peaks; panel markers absent here are full dropout
    std::map<std::string, std::vector<Peak>> markers;
};

struct GenotypePair {
    AlleleLabel a, b;  // stored with a <= b
};

struct GenotypeProfile {
    std::string person_id;
    std::map<std::string, GenotypePair> markers;  // untyped markers absent

    bool typed_at(const std::string& marker) const { return markers.count(marker) > 0; }
};

struct Contributor {
    std::string id;
    std::string profile_id;  // empty for unknown contributors
    bool known() const { return !profile_id.empty(); }
};

struct CaseOptions {
    double frequency_floor = 0.001;
    std::string sex_marker = "AMEL";
    double sex_freq_x = 0.5;
    double sex_freq_y = 0.5;
};

struct CaseBundle {
    FrequencyTable freqs;  // already sex-marker injected and augmented
    std::vector<PeakTable> traces;
    std::map<std::string, GenotypeProfile> profiles;
    std::vector<Contributor> roster;
    std::set<std::string> males;    // contributor ids with maleness evidence
    std::set<std::string> females;  // contributor ids typed female
    CaseOptions options;

    int contributor_index(const std::string& id) const;
    const GenotypeProfile* profile_of(const std::string& person_id) const;
};

FrequencyTable load_frequency_table(const std::string& path);

using ObservedAlleles = std::set<std::pair<std::string, std::string>>;  // (marker, label)

FrequencyTable augment_rare_alleles(FrequencyTable table, const ObservedAlleles& observed,
                                    double floor);

PeakTable load_peak_table(const std::string& path, const std::string& trace_id,
                          double threshold);

GenotypeProfile load_profile(const std::string& path, const std::string& person_id);

// Inserts the two-allele sex marker into the table if it is missing.
void inject_sex_marker(FrequencyTable& table, const CaseOptions& options);

// Checks peak/profile markers against the table, augments rare alleles, and
// verifies roster and sex lists. Throws ValidationError on any violation.
void finalize_bundle(CaseBundle& bundle);

// Writers emit the exact formats the loaders accept; extra_comments (if any)
// are prefixed as '#' lines.
void write_frequency_table(const FrequencyTable& table, const std::string& path,
                           const std::vector<std::string>& extra_comments = {});
void write_peak_table(const PeakTable& peaks, const std::string& path,
                      const std::vector<std::string>& extra_comments = {});
void write_profile(const GenotypeProfile& profile, const std::string& path,
                   const std::vector<std::string>& extra_comments = {});

}  // namespace mixkin
