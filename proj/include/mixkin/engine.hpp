#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mixkin/evidence.hpp"
#include "mixkin/peak_model.hpp"

namespace mixkin {

// Unordered genotype as a pair of panel positions, x <= y.
struct Genotype {
    int x = 0;
    int y = 0;
    bool operator==(const Genotype&) const = default;
};

double hardy_weinberg(const Genotype& g, const std::vector<double>& q);

// All unordered genotypes over an A-allele panel, in (x, y) lexicographic order.
std::vector<Genotype> enumerate_genotypes(int alleles);

Genotype genotype_indices(const MarkerFrequencies& panel, const GenotypePair& pair);

// How a contributor's allele counts evolve across the panel. The default is
// the population chain: counts at each position are binomial in the remaining
// frequency mass, which reproduces Hardy-Weinberg genotype probabilities.
struct ChainSpec {
    enum Kind {
        kFree,     // two alleles from the population
        kFixed,    // genotype known (typed profile, sex clamp, posterior clamp)
        kIbd,      // one allele pinned at ibd_pos, the other from the population
        kMeiosis,  // paternity chain: gate + untyped-mother counts vs child_counts
    };
    Kind kind = kFree;
    Genotype fixed{};
    int ibd_pos = -1;
    std::vector<int> child_counts;
};

struct TraceEvidence {
    std::vector<double> height;  // per panel position; -1 means no peak >= C
    double threshold = 0.0;
    double rho = 0.0;
    double eta = 0.0;
    double xi = 0.0;
    std::vector<double> phi;  // roster order
};

// Multiplies the forward weight by w[count] for one contributor at one panel
// position; the hook that likelihood-ratio numerators attach to.
struct CountFactor {
    int contributor = 0;
    int position = 0;
    std::array<double, 3> w{1.0, 1.0, 1.0};
};

struct MarkerCase {
    std::string marker;
    bool sex_marker = false;
    std::vector<double> q;
    std::vector<int> donor_above;  // position whose stutter lands here, or -1
    std::vector<TraceEvidence> traces;
    std::vector<ChainSpec> chains;  // per contributor
};

// Gamma-term caches for one trace, shared across markers: the weighted count
// sums take at most 3^I values, so dropout CDF and lgamma values are
// precomputed per (counts, stutter-neighbour counts) pair.
struct TraceTables {
    int nn = 0;
    double rho = 0.0, eta = 0.0, xi = 0.0, threshold = 0.0, log_eta = 0.0;
    std::vector<double> wsum;       // [nn]
    std::vector<double> shape_own;  // [nn] no stutter neighbour
    std::vector<double> lg_own;
    std::vector<double> drop_own;
    std::vector<double> shape_adj;  // [nn*nn], j*nn + k
    std::vector<double> lg_adj;
    std::vector<double> drop_adj;
};

TraceTables build_trace_tables(const TraceEvidence& trace);

// Exact log of the marker likelihood: the sum over all genotype-count
// configurations of the per-trace peak factors times the chain priors (and
// any extra count factors), by a scaled forward pass. Returns -inf when the
// evidence excludes every configuration; never NaN.
double marker_log_likelihood(const MarkerCase& mc, const std::vector<CountFactor>& factors,
                             const std::vector<TraceTables>& tables);
double marker_log_likelihood(const MarkerCase& mc,
                             const std::vector<CountFactor>& factors = {});

struct GenotypePosterior {
    std::string marker;
    int contributor = 0;
    std::vector<std::pair<Genotype, double>> entries;  // enumeration order, sums to 1
};

// Exact genotype posterior for one contributor: each genotype's clamped
// likelihood times its Hardy-Weinberg prior, normalized.
GenotypePosterior marker_posterior(const MarkerCase& mc, int contributor,
                                   const std::vector<TraceTables>& tables);
GenotypePosterior marker_posterior(const MarkerCase& mc, int contributor);

// Clamps a contributor's sex-marker genotype ({X,Y} for male, {X,X} for
// female). No-op unless mc is the sex-marker case.
void apply_sex_evidence(MarkerCase& mc, int contributor, bool male);

// Evaluation view of a whole case at one parameter setting.
struct CaseView {
    std::vector<MarkerCase> markers;  // frequency-table order
    std::vector<TraceTables> tables;  // per trace
};

MarkerCase build_marker_case(const CaseBundle& bundle, const MarkerFrequencies& panel,
                             const std::vector<ModelParams>& params_per_trace);

CaseView build_case_view(const CaseBundle& bundle,
                         const std::vector<ModelParams>& params_per_trace);

// Sum of marker log-likelihoods; markers evaluate in parallel, the reduction
// is sequential in marker order so the result is thread-count independent.
double case_log_likelihood(const CaseView& view, int threads = 1);

double log_sum_exp(const double* v, std::size_t n);

}  // namespace mixkin
