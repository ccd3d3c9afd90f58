#pragma once

#include <string>
#include <vector>

#include "mixkin/engine.hpp"
#include "mixkin/estimation.hpp"
#include "mixkin/evidence.hpp"

namespace mixkin {

enum class RelKind {
    kParentChild,             // untyped parent in the mixture, typed child
    kParentChildTypedMother,  // as above plus the child's other typed parent
    kTypedParentOfContributor,  // typed parent, the child is in the mixture
};

struct Hypothesis {
    std::string name;
    std::string target;  // contributor id, must be an unknown in the roster
    RelKind kind = RelKind::kParentChild;
    std::string child_profile;   // paternity kinds
    std::string mother_profile;  // typed-mother kind
    std::string parent_profile;  // reversed kind
};

enum class LrMethod { kWlr, kAln, kMbn, kRpt };

std::string method_name(LrMethod m);
LrMethod method_from_name(const std::string& name);

struct MarkerLR {
    std::string marker;
    double lr = 1.0;
};

struct LRReport {
    LrMethod method = LrMethod::kAln;
    std::string hypothesis;
    std::vector<MarkerLR> markers;  // frequency-table order
    double log10_overall = 0.0;
    double overall = 1.0;
};

// Single-genotype ratios, counts read off ugt against the panel frequencies.
double lr_ugt_child_only(const Genotype& ugt, const Genotype& cgt,
                         const std::vector<double>& q);
// Throws ValidationError when cgt and mgt share no allele (maternal
// exclusion falsifies the assumed mother-child relation).
double lr_ugt_mother_child(const Genotype& ugt, const Genotype& cgt, const Genotype& mgt,
                           const std::vector<double>& q);

// Relationship ratio for one candidate genotype of the hypothesis target at
// one marker; 1 when the relative is untyped there.
double hypothesis_lr_ugt(const CaseBundle& bundle, const Hypothesis& h,
                         const MarkerFrequencies& panel, const Genotype& ugt);

// Full-case likelihood ratio under the frozen null-MLE parameter context.
LRReport kinship_lr(const CaseBundle& bundle, const ParamsContext& ctx, const Hypothesis& h,
                    LrMethod method, int threads = 1);

// LR*prior / (LR*prior + 1 - prior)
double posterior_probability(double lr, double prior);

double combine_union_weighted(const std::vector<double>& lrs,
                              const std::vector<double>& priors);
double combine_union_min(const std::vector<double>& lrs);
double combine_union_max(const std::vector<double>& lrs);
// Two sub-hypotheses: weighted LR swept over first-hypothesis priors.
std::vector<std::pair<double, double>> combine_union_range(const std::vector<double>& lrs,
                                                           const std::vector<double>& grid);

// Report formatting: ratios with 6 significant digits, log10 with 4 decimals.
std::string format_significant(double v);
std::string format_log10(double v);

// Rows: marker,lr; then a summary block method,log10_lr,lr,posterior_uniform_prior.
void write_lr_csv(const std::string& path, const std::vector<LRReport>& reports,
                  const std::vector<std::string>& extra_comments = {});

}  // namespace mixkin
