#include "mixkin/kinship.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mixkin/csv.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/parallel.hpp"

namespace mixkin {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int count_in(const Genotype& g, int a) { return (g.x == a ? 1 : 0) + (g.y == a ? 1 : 0); }

double positive_freq(const std::vector<double>& q, int a) {
    double v = q.at(a);
    if (!(v > 0.0)) throw ValidationError("zero frequency for a relative's allele");
    return v;
}

struct LrBranch {
    double weight = 1.0;
    int pos = 0;
    double scale = 1.0;  // used by the count-factor form, ignored by the IBD form
};

// The per-marker relationship, reduced to the algebraic case that applies
// after per-marker typing is taken into account.
struct EffectiveCase {
    bool informative = false;
    bool with_mother = false;
    Genotype cgt{};
    Genotype mgt{};
};

EffectiveCase effective_case(const std::string& marker, const MarkerFrequencies& panel,
                             RelKind kind, const GenotypeProfile* child,
                             const GenotypeProfile* mother, const GenotypeProfile* parent) {
    EffectiveCase ec;
    if (kind == RelKind::kTypedParentOfContributor) {
        if (!parent->typed_at(marker)) return ec;
        ec.informative = true;
        ec.cgt = genotype_indices(panel, parent->markers.at(marker));
        return ec;
    }
    if (!child->typed_at(marker)) return ec;
    ec.informative = true;
    ec.cgt = genotype_indices(panel, child->markers.at(marker));
    if (kind == RelKind::kParentChildTypedMother && mother->typed_at(marker)) {
        ec.with_mother = true;
        ec.mgt = genotype_indices(panel, mother->markers.at(marker));
    }
    return ec;
}

// Branch decomposition of LR_Ugt: a mixture over which child allele is
// paternal. weight/scale feed the count-factor form, weight/pos the
// replaced-prior form.
std::vector<LrBranch> paternal_branches(const EffectiveCase& ec, const std::vector<double>& q,
                                        bool ibd_weights) {
    const Genotype& c = ec.cgt;
    double qa = positive_freq(q, c.x);
    if (!ec.with_mother) {
        if (c.x == c.y) return {LrBranch{1.0, c.x, 1.0 / (2.0 * qa)}};
        double qb = positive_freq(q, c.y);
        return {LrBranch{0.5, c.x, 1.0 / (2.0 * qa)}, LrBranch{0.5, c.y, 1.0 / (2.0 * qb)}};
    }
    bool m_has_x = count_in(ec.mgt, c.x) > 0;
    bool m_has_y = count_in(ec.mgt, c.y) > 0;
    if (!m_has_x && !m_has_y)
        throw ValidationError("maternal exclusion: child and mother genotypes share no allele");
    if (c.x == c.y) return {LrBranch{1.0, c.x, 1.0 / (2.0 * qa)}};
    double qb = positive_freq(q, c.y);
    if (m_has_x && m_has_y) {
        double s = 1.0 / (qa + qb);
        if (ibd_weights)
            return {LrBranch{qa * s, c.x, s}, LrBranch{qb * s, c.y, s}};
        return {LrBranch{0.5, c.x, s}, LrBranch{0.5, c.y, s}};
    }
    int paternal = m_has_x ? c.y : c.x;
    return {LrBranch{1.0, paternal, 1.0 / (2.0 * positive_freq(q, paternal))}};
}

double plain_or_throw(const MarkerCase& mc, const std::vector<TraceTables>& tables) {
    double ll = marker_log_likelihood(mc, {}, tables);
    if (ll == kNegInf)
        throw ValidationError("no genotype configuration consistent with evidence at marker " +
                              mc.marker);
    return ll;
}

double one_marker_lr(const MarkerCase& mc, const MarkerFrequencies& panel,
                     const std::vector<TraceTables>& tables, int ti, LrMethod method,
                     RelKind kind, const GenotypeProfile* child, const GenotypeProfile* mother,
                     const GenotypeProfile* parent) {
    if (mc.sex_marker) return 1.0;
    if (mc.chains[ti].kind != ChainSpec::kFree)
        throw InternalError("hypothesis target is constrained at marker " + mc.marker);
    EffectiveCase ec = effective_case(mc.marker, panel, kind, child, mother, parent);
    if (!ec.informative) return 1.0;

    switch (method) {
        case LrMethod::kWlr: {
            GenotypePosterior post = marker_posterior(mc, ti, tables);
            double lr = 0.0;
            for (const auto& [g, p] : post.entries) {
                if (p == 0.0) continue;
                double r = ec.with_mother ? lr_ugt_mother_child(g, ec.cgt, ec.mgt, mc.q)
                                          : lr_ugt_child_only(g, ec.cgt, mc.q);
                lr += p * r;
            }
            return lr;
        }
        case LrMethod::kAln: {
            double ll_plain = plain_or_throw(mc, tables);
            double lr = 0.0;
            for (const LrBranch& b : paternal_branches(ec, mc.q, false)) {
                CountFactor f{ti, b.pos, {0.0, 1.0, 2.0}};
                double ll = marker_log_likelihood(mc, {f}, tables);
                lr += b.weight * b.scale * std::exp(ll - ll_plain);
            }
            return lr;
        }
        case LrMethod::kRpt: {
            double ll_plain = plain_or_throw(mc, tables);
            double lr = 0.0;
            MarkerCase work = mc;
            for (const LrBranch& b : paternal_branches(ec, mc.q, true)) {
                work.chains[ti] = ChainSpec{ChainSpec::kIbd, {}, b.pos, {}};
                double ll = marker_log_likelihood(work, {}, tables);
                lr += b.weight * std::exp(ll - ll_plain);
            }
            return lr;
        }
        case LrMethod::kMbn: {
            double ll_plain = plain_or_throw(mc, tables);
            std::vector<int> counts(mc.q.size(), 0);
            counts.at(ec.cgt.x) += 1;
            counts.at(ec.cgt.y) += 1;
            MarkerCase work = mc;
            work.chains[ti] = ChainSpec{ChainSpec::kMeiosis, {}, -1, counts};
            double ll = marker_log_likelihood(work, {}, tables);
            return std::exp(ll - ll_plain - std::log(hardy_weinberg(ec.cgt, mc.q)));
        }
    }
    throw InternalError("unhandled method");
}

const GenotypeProfile* need_profile(const CaseBundle& bundle, const std::string& name,
                                    const char* role) {
    if (name.empty())
        throw ValidationError(std::string("hypothesis requires a ") + role + " profile");
    const GenotypeProfile* p = bundle.profile_of(name);
    if (!p) throw ValidationError("hypothesis references unknown profile '" + name + "'");
    if (p->markers.empty())
        throw ValidationError("profile '" + name + "' is typed at no marker");
    return p;
}

}  // namespace

std::string method_name(LrMethod m) {
    switch (m) {
        case LrMethod::kWlr: return "wlr";
        case LrMethod::kAln: return "aln";
        case LrMethod::kMbn: return "mbn";
        case LrMethod::kRpt: return "rpt";
    }
    throw InternalError("unhandled method");
}

LrMethod method_from_name(const std::string& name) {
    if (name == "wlr") return LrMethod::kWlr;
    if (name == "aln") return LrMethod::kAln;
    if (name == "mbn") return LrMethod::kMbn;
    if (name == "rpt") return LrMethod::kRpt;
    throw ValidationError("unknown method '" + name + "' (expected wlr, aln, mbn, or rpt)");
}

double lr_ugt_child_only(const Genotype& ugt, const Genotype& cgt,
                         const std::vector<double>& q) {
    double qa = positive_freq(q, cgt.x);
    if (cgt.x == cgt.y) return count_in(ugt, cgt.x) / (2.0 * qa);
    double qb = positive_freq(q, cgt.y);
    return count_in(ugt, cgt.x) / (4.0 * qa) + count_in(ugt, cgt.y) / (4.0 * qb);
}

double lr_ugt_mother_child(const Genotype& ugt, const Genotype& cgt, const Genotype& mgt,
                           const std::vector<double>& q) {
    bool m_has_x = count_in(mgt, cgt.x) > 0;
    bool m_has_y = count_in(mgt, cgt.y) > 0;
    if (!m_has_x && !m_has_y)
        throw ValidationError("maternal exclusion: child and mother genotypes share no allele");
    if (cgt.x == cgt.y) return count_in(ugt, cgt.x) / (2.0 * positive_freq(q, cgt.x));
    if (m_has_x && m_has_y)
        return (count_in(ugt, cgt.x) + count_in(ugt, cgt.y)) /
               (2.0 * (positive_freq(q, cgt.x) + positive_freq(q, cgt.y)));
    int paternal = m_has_x ? cgt.y : cgt.x;
    return count_in(ugt, paternal) / (2.0 * positive_freq(q, paternal));
}

double hypothesis_lr_ugt(const CaseBundle& bundle, const Hypothesis& h,
                         const MarkerFrequencies& panel, const Genotype& ugt) {
    const GenotypeProfile *child = nullptr, *mother = nullptr, *parent = nullptr;
    if (h.kind == RelKind::kTypedParentOfContributor)
        parent = need_profile(bundle, h.parent_profile, "parent");
    else
        child = need_profile(bundle, h.child_profile, "child");
    if (h.kind == RelKind::kParentChildTypedMother)
        mother = need_profile(bundle, h.mother_profile, "mother");
    EffectiveCase ec = effective_case(panel.marker, panel, h.kind, child, mother, parent);
    if (!ec.informative) return 1.0;
    return ec.with_mother ? lr_ugt_mother_child(ugt, ec.cgt, ec.mgt, panel.freq)
                          : lr_ugt_child_only(ugt, ec.cgt, panel.freq);
}

LRReport kinship_lr(const CaseBundle& bundle, const ParamsContext& ctx, const Hypothesis& h,
                    LrMethod method, int threads) {
    int ti = bundle.contributor_index(h.target);
    if (ti < 0)
        throw ValidationError("hypothesis target '" + h.target + "' is not in the roster");
    if (bundle.roster[ti].known())
        throw ValidationError("hypothesis target '" + h.target +
                              "' must be an unknown contributor");

    const GenotypeProfile *child = nullptr, *mother = nullptr, *parent = nullptr;
    switch (h.kind) {
        case RelKind::kParentChild:
            child = need_profile(bundle, h.child_profile, "child");
            break;
        case RelKind::kParentChildTypedMother:
            child = need_profile(bundle, h.child_profile, "child");
            mother = need_profile(bundle, h.mother_profile, "mother");
            if (method == LrMethod::kMbn)
                throw ValidationError(
                    "mbn does not support a typed mother; use wlr, aln, or rpt");
            break;
        case RelKind::kTypedParentOfContributor:
            parent = need_profile(bundle, h.parent_profile, "parent");
            if (method == LrMethod::kMbn)
                throw ValidationError(
                    "mbn does not support the typed-parent direction; use wlr, aln, or rpt");
            break;
    }

    // a typed mother must be consistent with the child everywhere up front
    if (mother)
        for (const auto& panel : bundle.freqs.markers) {
            if (!child->typed_at(panel.marker) || !mother->typed_at(panel.marker)) continue;
            Genotype c = genotype_indices(panel, child->markers.at(panel.marker));
            Genotype m = genotype_indices(panel, mother->markers.at(panel.marker));
            if (count_in(m, c.x) == 0 && count_in(m, c.y) == 0)
                throw ValidationError(
                    "maternal exclusion: child and mother genotypes share no allele at "
                    "marker " +
                    panel.marker);
        }

    CaseView view = build_case_view(bundle, ctx.params);
    LRReport rep;
    rep.method = method;
    rep.hypothesis = h.name.empty() ? h.target : h.name;
    rep.markers.resize(view.markers.size());
    parallel_for(view.markers.size(), threads, [&](std::size_t i) {
        rep.markers[i].marker = view.markers[i].marker;
        rep.markers[i].lr = one_marker_lr(view.markers[i], bundle.freqs.markers[i],
                                          view.tables, ti, method, h.kind, child, mother,
                                          parent);
    });
    double lg = 0.0;
    for (const auto& m : rep.markers) lg += std::log10(m.lr);
    rep.log10_overall = lg;
    rep.overall = std::pow(10.0, lg);
    return rep;
}

double posterior_probability(double lr, double prior) {
    if (!(lr >= 0.0)) throw ValidationError("likelihood ratio must be nonnegative");
    if (!(prior >= 0.0 && prior <= 1.0)) throw ValidationError("prior must be in [0, 1]");
    if (std::isinf(lr)) return prior > 0.0 ? 1.0 : 0.0;
    double num = lr * prior;
    double den = num + (1.0 - prior);
    if (den == 0.0) throw ValidationError("prior 1 with ratio 0 has no posterior");
    return num / den;
}

double combine_union_weighted(const std::vector<double>& lrs,
                              const std::vector<double>& priors) {
    if (lrs.empty()) throw ValidationError("union of zero hypotheses");
    if (lrs.size() != priors.size())
        throw ValidationError("union priors must match the hypothesis count");
    double tot = 0.0;
    for (double p : priors) {
        if (!(p >= 0.0)) throw ValidationError("union priors must be nonnegative");
        tot += p;
    }
    if (!(tot > 0.0)) throw ValidationError("union priors must not all be zero");
    double s = 0.0;
    for (std::size_t k = 0; k < lrs.size(); ++k) s += lrs[k] * (priors[k] / tot);
    return s;
}

double combine_union_min(const std::vector<double>& lrs) {
    if (lrs.empty()) throw ValidationError("union of zero hypotheses");
    return *std::min_element(lrs.begin(), lrs.end());
}

double combine_union_max(const std::vector<double>& lrs) {
    if (lrs.empty()) throw ValidationError("union of zero hypotheses");
    return *std::max_element(lrs.begin(), lrs.end());
}

std::vector<std::pair<double, double>> combine_union_range(const std::vector<double>& lrs,
                                                           const std::vector<double>& grid) {
    if (lrs.size() != 2)
        throw ValidationError("the prior-range sweep is defined for exactly two hypotheses");
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double t : grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("prior grid values must be in [0, 1]");
        out.emplace_back(t, t * lrs[0] + (1.0 - t) * lrs[1]);
    }
    return out;
}

std::string format_significant(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_log10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_lr_csv(const std::string& path, const std::vector<LRReport>& reports,
                  const std::vector<std::string>& extra_comments) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    for (const auto& c : extra_comments) out << "# " << c << "\n";
    for (const auto& rep : reports) {
        out << "# method: " << method_name(rep.method) << "\n";
        out << "marker,lr\n";
        for (const auto& m : rep.markers)
            out << m.marker << ',' << format_significant(m.lr) << "\n";
    }
    out << "method,log10_lr,lr,posterior_uniform_prior\n";
    for (const auto& rep : reports)
        out << method_name(rep.method) << ',' << format_log10(rep.log10_overall) << ','
            << format_significant(rep.overall) << ','
            << format_significant(posterior_probability(rep.overall, 0.5)) << "\n";
    if (!out.good()) throw ValidationError("failed writing " + path);
}

}  // namespace mixkin
