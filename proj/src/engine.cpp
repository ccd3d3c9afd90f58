#include "mixkin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixkin/errors.hpp"
#include "mixkin/gamma.hpp"
#include "mixkin/kernels.hpp"
#include "mixkin/parallel.hpp"

namespace mixkin {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double binom_weight(int k, int trials, double p) {
    switch (trials) {
        case 0:
            return k == 0 ? 1.0 : 0.0;
        case 1:
            return k == 0 ? 1.0 - p : (k == 1 ? p : 0.0);
        case 2:
            if (k == 0) return (1.0 - p) * (1.0 - p);
            if (k == 1) return 2.0 * p * (1.0 - p);
            return k == 2 ? p * p : 0.0;
        default:
            return 0.0;
    }
}

struct Branch {
    int to = 0;
    double w = 0.0;
};

struct BranchList {
    Branch b[2];
    int n = 0;
    void add(int to, double w) {
        if (w <= 0.0) return;
        if (n >= 2) throw InternalError("chain transition fan-out exceeds 2");
        b[n++] = Branch{to, w};
    }
};

struct ChainDP {
    int nstates = 1;
    int init = 0;
    std::vector<BranchList> steps;  // [A * nstates * 3]

    const BranchList& at(int t, int s, int n) const {
        return steps[(static_cast<std::size_t>(t) * nstates + s) * 3 + n];
    }
    BranchList& at(int t, int s, int n) {
        return steps[(static_cast<std::size_t>(t) * nstates + s) * 3 + n];
    }
};

ChainDP build_chain(const ChainSpec& spec, int A, const std::vector<double>& p) {
    ChainDP dp;
    switch (spec.kind) {
        case ChainSpec::kFree: {
            dp.nstates = 3;  // alleles placed so far
            dp.init = 0;
            dp.steps.resize(static_cast<std::size_t>(A) * 3 * 3);
            for (int t = 0; t < A; ++t)
                for (int s = 0; s <= 2; ++s)
                    for (int n = 0; n <= 2 - s; ++n)
                        dp.at(t, s, n).add(s + n, binom_weight(n, 2 - s, p[t]));
            break;
        }
        case ChainSpec::kFixed: {
            if (spec.fixed.x < 0 || spec.fixed.y < spec.fixed.x || spec.fixed.y >= A)
                throw InternalError("fixed genotype outside the panel");
            dp.nstates = 1;
            dp.steps.resize(static_cast<std::size_t>(A) * 3);
            for (int t = 0; t < A; ++t) {
                int need = (spec.fixed.x == t) + (spec.fixed.y == t);
                dp.at(t, 0, need).add(0, 1.0);
            }
            break;
        }
        case ChainSpec::kIbd: {
            if (spec.ibd_pos < 0 || spec.ibd_pos >= A)
                throw InternalError("IBD position outside the panel");
            dp.nstates = 2;  // non-IBD alleles placed so far
            dp.init = 0;
            dp.steps.resize(static_cast<std::size_t>(A) * 2 * 3);
            for (int t = 0; t < A; ++t) {
                int extra = t == spec.ibd_pos ? 1 : 0;
                for (int s = 0; s <= 1; ++s)
                    for (int base = 0; base <= 1 - s; ++base)
                        dp.at(t, s, base + extra)
                            .add(s + base, binom_weight(base, 1 - s, p[t]));
            }
            break;
        }
        case ChainSpec::kMeiosis: {
            if (static_cast<int>(spec.child_counts.size()) != A)
                throw InternalError("meiosis child counts do not span the panel");
            int total = 0;
            for (int c : spec.child_counts) total += c;
            if (total != 2) throw InternalError("meiosis child counts must sum to 2");
            // state = Sf*6 + g*2 + Scm: father's placed alleles, the
            // passed-allele gate, and whether the maternal allele is placed
            dp.nstates = 18;
            dp.init = 0 * 6 + 1 * 2 + 0;
            dp.steps.resize(static_cast<std::size_t>(A) * 18 * 3);
            for (int t = 0; t < A; ++t) {
                int cn = spec.child_counts[t];
                for (int sf = 0; sf <= 2; ++sf)
                    for (int g = 0; g <= 2; ++g)
                        for (int scm = 0; scm <= 1; ++scm) {
                            int from = sf * 6 + g * 2 + scm;
                            for (int n = 0; n <= 2 - sf; ++n) {
                                double fw = binom_weight(n, 2 - sf, p[t]);
                                if (fw <= 0.0) continue;
                                double pass = n == 0 ? 0.0 : (n == 1 ? g / 2.0 : 1.0);
                                for (int cp = 0; cp <= 1; ++cp) {
                                    double pw = cp ? pass : 1.0 - pass;
                                    if (pw <= 0.0) continue;
                                    int cm = cn - cp;
                                    if (cm < 0 || cm > 1 - scm) continue;
                                    double mw = scm == 1 ? 1.0 : (cm ? p[t] : 1.0 - p[t]);
                                    if (mw <= 0.0) continue;
                                    int g2 = (n >= 1 && g == 1) ? (cp ? 0 : 2) : g;
                                    int to = (sf + n) * 6 + g2 * 2 + (scm + cm);
                                    dp.at(t, from, n).add(to, fw * pw * mw);
                                }
                            }
                        }
            }
            break;
        }
    }
    return dp;
}

}  // namespace

double hardy_weinberg(const Genotype& g, const std::vector<double>& q) {
    double qa = q.at(g.x), qb = q.at(g.y);
    return g.x == g.y ? qa * qb : 2.0 * qa * qb;
}

std::vector<Genotype> enumerate_genotypes(int alleles) {
    std::vector<Genotype> out;
    out.reserve(static_cast<std::size_t>(alleles) * (alleles + 1) / 2);
    for (int x = 0; x < alleles; ++x)
        for (int y = x; y < alleles; ++y) out.push_back(Genotype{x, y});
    return out;
}

Genotype genotype_indices(const MarkerFrequencies& panel, const GenotypePair& pair) {
    int x = panel.index_of(pair.a);
    int y = panel.index_of(pair.b);
    if (x < 0 || y < 0)
        throw InternalError("profile allele missing from the augmented panel at marker " +
                            panel.marker);
    if (x > y) std::swap(x, y);
    return Genotype{x, y};
}

double log_sum_exp(const double* v, std::size_t n) {
    if (n == 0) return kNegInf;
    double m = kernel_max(v, n);
    if (m == kNegInf) return kNegInf;
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

TraceTables build_trace_tables(const TraceEvidence& trace) {
    if (!(trace.rho > 0.0) || !(trace.eta > 0.0))
        throw ValidationError("trace parameters must have rho > 0 and eta > 0");
    if (!(trace.xi >= 0.0) || trace.xi >= 1.0) throw ValidationError("xi must be in [0, 1)");
    if (!(trace.threshold > 0.0)) throw ValidationError("detection threshold must be > 0");
    const int I = static_cast<int>(trace.phi.size());
    if (I <= 0 || I > 8) throw ValidationError("unsupported contributor count");
    int nn = 1;
    for (int i = 0; i < I; ++i) nn *= 3;

    TraceTables tt;
    tt.nn = nn;
    tt.rho = trace.rho;
    tt.eta = trace.eta;
    tt.xi = trace.xi;
    tt.threshold = trace.threshold;
    tt.log_eta = std::log(trace.eta);
    tt.wsum.assign(nn, 0.0);
    for (int j = 0; j < nn; ++j) {
        int rem = j;
        double s = 0.0;
        for (int i = 0; i < I; ++i) {
            s += trace.phi[i] * (rem % 3);
            rem /= 3;
        }
        tt.wsum[j] = s;
    }
    tt.shape_own.resize(nn);
    tt.lg_own.resize(nn);
    tt.drop_own.resize(nn);
    for (int j = 0; j < nn; ++j) {
        double shape = tt.rho * (1.0 - tt.xi) * tt.wsum[j];
        tt.shape_own[j] = shape;
        tt.lg_own[j] = shape > 0.0 ? std::lgamma(shape) : 0.0;
        tt.drop_own[j] = shape > 0.0 ? log_gamma_cdf(tt.threshold, shape, tt.eta) : 0.0;
    }
    tt.shape_adj.resize(static_cast<std::size_t>(nn) * nn);
    tt.lg_adj.resize(tt.shape_adj.size());
    tt.drop_adj.resize(tt.shape_adj.size());
    for (int j = 0; j < nn; ++j)
        for (int k = 0; k < nn; ++k) {
            std::size_t idx = static_cast<std::size_t>(j) * nn + k;
            if (tt.xi == 0.0 || k == 0) {
                tt.shape_adj[idx] = tt.shape_own[j];
                tt.lg_adj[idx] = tt.lg_own[j];
                tt.drop_adj[idx] = tt.drop_own[j];
                continue;
            }
            double shape = tt.rho * ((1.0 - tt.xi) * tt.wsum[j] + tt.xi * tt.wsum[k]);
            tt.shape_adj[idx] = shape;
            tt.lg_adj[idx] = shape > 0.0 ? std::lgamma(shape) : 0.0;
            tt.drop_adj[idx] = shape > 0.0 ? log_gamma_cdf(tt.threshold, shape, tt.eta) : 0.0;
        }
    return tt;
}

namespace {

// log emission factor of panel position p given the joint counts j at p and
// k at the position above (k is ignored unless the stutter neighbour exists)
double position_log_term(const MarkerCase& mc, const std::vector<TraceTables>& tables,
                         const std::vector<std::vector<double>>& obs_logz,
                         const std::vector<std::vector<double>>& obs_zdiv, int p, int j, int k,
                         bool adj) {
    double total = 0.0;
    for (std::size_t tr = 0; tr < mc.traces.size(); ++tr) {
        const TraceTables& tt = tables[tr];
        std::size_t idx = static_cast<std::size_t>(j) * tt.nn + k;
        double shape = adj ? tt.shape_adj[idx] : tt.shape_own[j];
        if (mc.traces[tr].height[p] >= 0.0) {
            if (shape == 0.0) return kNegInf;
            double lg = adj ? tt.lg_adj[idx] : tt.lg_own[j];
            total += (shape - 1.0) * obs_logz[tr][p] - obs_zdiv[tr][p] - lg - tt.log_eta;
        } else {
            total += adj ? tt.drop_adj[idx] : tt.drop_own[j];
        }
    }
    return total;
}

}  // namespace

double marker_log_likelihood(const MarkerCase& mc, const std::vector<CountFactor>& factors,
                             const std::vector<TraceTables>& tables) {
    const int A = static_cast<int>(mc.q.size());
    const int I = static_cast<int>(mc.chains.size());
    if (A <= 0) throw InternalError("marker has an empty panel");
    if (I <= 0) throw InternalError("marker has an empty roster");
    if (mc.traces.size() != tables.size())
        throw InternalError("trace table count does not match the traces");
    if (static_cast<int>(mc.donor_above.size()) != A)
        throw InternalError("stutter map does not span the panel");
    for (int a = 0; a < A; ++a)
        if (mc.donor_above[a] != -1 && mc.donor_above[a] != a + 1)
            throw InternalError("stutter must come from the next panel position");
    int NN = 1;
    for (int i = 0; i < I; ++i) NN *= 3;
    for (const auto& tt : tables)
        if (tt.nn != NN) throw InternalError("trace tables built for a different roster size");
    for (const auto& f : factors) {
        if (f.contributor < 0 || f.contributor >= I)
            throw InternalError("count factor names an unknown contributor");
        if (f.position < 0 || f.position >= A)
            throw InternalError("count factor position outside the panel");
    }

    std::vector<double> tail(A + 1, 0.0);
    for (int t = A - 1; t >= 0; --t) {
        if (!(mc.q[t] > 0.0)) throw ValidationError("allele frequencies must be positive");
        tail[t] = tail[t + 1] + mc.q[t];
    }
    std::vector<double> p(A);
    for (int t = 0; t < A; ++t) p[t] = mc.q[t] / tail[t];

    std::vector<ChainDP> chains;
    chains.reserve(I);
    for (const auto& spec : mc.chains) chains.push_back(build_chain(spec, A, p));
    int M = 1;
    std::vector<int> stride(I);
    for (int i = 0; i < I; ++i) {
        stride[i] = M;
        M *= chains[i].nstates;
    }
    int init_joint = 0;
    for (int i = 0; i < I; ++i) init_joint += chains[i].init * stride[i];

    std::vector<int> sdig(static_cast<std::size_t>(M) * I);
    for (int s = 0; s < M; ++s)
        for (int i = 0; i < I; ++i) sdig[static_cast<std::size_t>(s) * I + i] =
            (s / stride[i]) % chains[i].nstates;
    std::vector<int> kdig(static_cast<std::size_t>(NN) * I);
    for (int k = 0; k < NN; ++k) {
        int rem = k;
        for (int i = 0; i < I; ++i) {
            kdig[static_cast<std::size_t>(k) * I + i] = rem % 3;
            rem /= 3;
        }
    }

    std::vector<std::vector<double>> obs_logz(mc.traces.size()), obs_zdiv(mc.traces.size());
    for (std::size_t tr = 0; tr < mc.traces.size(); ++tr) {
        const TraceEvidence& ev = mc.traces[tr];
        if (static_cast<int>(ev.height.size()) != A)
            throw InternalError("trace heights do not span the panel");
        obs_logz[tr].assign(A, 0.0);
        obs_zdiv[tr].assign(A, 0.0);
        for (int a = 0; a < A; ++a) {
            double z = ev.height[a];
            if (z < 0.0) continue;
            if (!(z > 0.0)) throw ValidationError("observed peak height must be positive");
            obs_logz[tr][a] = std::log(z / tables[tr].eta);
            obs_zdiv[tr][a] = z / tables[tr].eta;
        }
    }

    const std::size_t total = static_cast<std::size_t>(M) * NN;
    std::vector<double> W(total, 0.0), V(total), Wn(total);
    std::vector<double> ET(static_cast<std::size_t>(NN) * NN);
    W[static_cast<std::size_t>(init_joint) * NN + 0] = 1.0;
    double logscale = 0.0;

    for (int t = 0; t < A; ++t) {
        if (t == 0) {
            for (int s = 0; s < M; ++s) {
                double w0 = W[static_cast<std::size_t>(s) * NN + 0];
                for (int k = 0; k < NN; ++k) V[static_cast<std::size_t>(s) * NN + k] = w0;
            }
        } else {
            int pprev = t - 1;
            bool adj = mc.donor_above[pprev] == t;
            double m = kNegInf;
            for (int k = 0; k < NN; ++k)
                for (int j = 0; j < NN; ++j) {
                    double lv =
                        position_log_term(mc, tables, obs_logz, obs_zdiv, pprev, j, k, adj);
                    ET[static_cast<std::size_t>(k) * NN + j] = lv;
                    if (lv > m) m = lv;
                }
            if (m == kNegInf) return kNegInf;
            for (double& e : ET) e = std::exp(e - m);
            logscale += m;
            for (int s = 0; s < M; ++s)
                for (int k = 0; k < NN; ++k)
                    V[static_cast<std::size_t>(s) * NN + k] =
                        kernel_dot(&W[static_cast<std::size_t>(s) * NN],
                                   &ET[static_cast<std::size_t>(k) * NN], NN);
        }

        for (const auto& f : factors) {
            if (f.position != t) continue;
            for (int s = 0; s < M; ++s)
                for (int k = 0; k < NN; ++k)
                    V[static_cast<std::size_t>(s) * NN + k] *=
                        f.w[kdig[static_cast<std::size_t>(k) * I + f.contributor]];
        }

        std::fill(Wn.begin(), Wn.end(), 0.0);
        for (int s = 0; s < M; ++s) {
            const int* sd = &sdig[static_cast<std::size_t>(s) * I];
            for (int k = 0; k < NN; ++k) {
                double v = V[static_cast<std::size_t>(s) * NN + k];
                if (v == 0.0) continue;
                const int* kd = &kdig[static_cast<std::size_t>(k) * I];
                int fr_to[16];
                double fr_w[16];
                int fr_n = 1;
                fr_to[0] = 0;
                fr_w[0] = v;
                for (int i = 0; i < I && fr_n > 0; ++i) {
                    const BranchList& bl = chains[i].at(t, sd[i], kd[i]);
                    if (bl.n == 0) {
                        fr_n = 0;
                        break;
                    }
                    if (bl.n == 1) {
                        for (int f = 0; f < fr_n; ++f) {
                            fr_to[f] += bl.b[0].to * stride[i];
                            fr_w[f] *= bl.b[0].w;
                        }
                    } else {
                        int out = fr_n * bl.n;
                        if (out > 16) throw InternalError("transition fan-out overflow");
                        for (int f = fr_n - 1; f >= 0; --f)
                            for (int c = bl.n - 1; c >= 0; --c) {
                                int slot = f * bl.n + c;
                                fr_to[slot] = fr_to[f] + bl.b[c].to * stride[i];
                                fr_w[slot] = fr_w[f] * bl.b[c].w;
                            }
                        fr_n = out;
                    }
                }
                for (int f = 0; f < fr_n; ++f)
                    Wn[static_cast<std::size_t>(fr_to[f]) * NN + k] += fr_w[f];
            }
        }
        W.swap(Wn);

        double mx = kernel_max(W.data(), total);
        if (!(mx > 0.0)) return kNegInf;
        if (mx != 1.0) {
            kernel_scale(W.data(), total, 1.0 / mx);
            logscale += std::log(mx);
        }
    }

    std::vector<double> Ef(NN);
    double mf = kNegInf;
    for (int j = 0; j < NN; ++j) {
        double lv = position_log_term(mc, tables, obs_logz, obs_zdiv, A - 1, j, 0, false);
        Ef[j] = lv;
        if (lv > mf) mf = lv;
    }
    if (mf == kNegInf) return kNegInf;
    for (double& e : Ef) e = std::exp(e - mf);
    double sum = 0.0;
    for (int s = 0; s < M; ++s)
        sum += kernel_dot(&W[static_cast<std::size_t>(s) * NN], Ef.data(), NN);
    if (!(sum > 0.0)) return kNegInf;
    if (std::isnan(sum)) throw InternalError("likelihood recursion produced NaN");
    return std::log(sum) + logscale + mf;
}

double marker_log_likelihood(const MarkerCase& mc, const std::vector<CountFactor>& factors) {
    std::vector<TraceTables> tables;
    tables.reserve(mc.traces.size());
    for (const auto& tr : mc.traces) tables.push_back(build_trace_tables(tr));
    return marker_log_likelihood(mc, factors, tables);
}

GenotypePosterior marker_posterior(const MarkerCase& mc, int contributor,
                                   const std::vector<TraceTables>& tables) {
    if (contributor < 0 || contributor >= static_cast<int>(mc.chains.size()))
        throw InternalError("posterior target outside the roster");
    const ChainSpec& orig = mc.chains[contributor];
    if (orig.kind != ChainSpec::kFree && orig.kind != ChainSpec::kFixed)
        throw InternalError("genotype posterior requires an unmodified chain");
    auto genotypes = enumerate_genotypes(static_cast<int>(mc.q.size()));
    std::vector<double> logpost(genotypes.size(), kNegInf);
    MarkerCase work = mc;
    for (std::size_t gi = 0; gi < genotypes.size(); ++gi) {
        if (orig.kind == ChainSpec::kFixed && !(orig.fixed == genotypes[gi])) continue;
        work.chains[contributor] = ChainSpec{ChainSpec::kFixed, genotypes[gi], -1, {}};
        double ll = marker_log_likelihood(work, {}, tables);
        logpost[gi] = ll + std::log(hardy_weinberg(genotypes[gi], mc.q));
    }
    double lse = log_sum_exp(logpost.data(), logpost.size());
    if (lse == kNegInf)
        throw ValidationError("no genotype configuration consistent with evidence at marker " +
                              mc.marker);
    GenotypePosterior post;
    post.marker = mc.marker;
    post.contributor = contributor;
    post.entries.reserve(genotypes.size());
    for (std::size_t gi = 0; gi < genotypes.size(); ++gi)
        post.entries.push_back({genotypes[gi], std::exp(logpost[gi] - lse)});
    return post;
}

GenotypePosterior marker_posterior(const MarkerCase& mc, int contributor) {
    std::vector<TraceTables> tables;
    tables.reserve(mc.traces.size());
    for (const auto& tr : mc.traces) tables.push_back(build_trace_tables(tr));
    return marker_posterior(mc, contributor, tables);
}

void apply_sex_evidence(MarkerCase& mc, int contributor, bool male) {
    if (!mc.sex_marker) return;
    if (contributor < 0 || contributor >= static_cast<int>(mc.chains.size()))
        throw InternalError("sex evidence targets an unknown contributor");
    if (mc.q.size() != 2)
        throw ValidationError("sex-marker panel must hold exactly the X and Y alleles");
    mc.chains[contributor] =
        ChainSpec{ChainSpec::kFixed, male ? Genotype{0, 1} : Genotype{0, 0}, -1, {}};
}

MarkerCase build_marker_case(const CaseBundle& bundle, const MarkerFrequencies& panel,
                             const std::vector<ModelParams>& params_per_trace) {
    if (params_per_trace.size() != bundle.traces.size())
        throw ValidationError("parameter sets do not match the trace count");
    const int A = static_cast<int>(panel.alleles.size());
    const int I = static_cast<int>(bundle.roster.size());
    MarkerCase mc;
    mc.marker = panel.marker;
    mc.sex_marker =
        !bundle.options.sex_marker.empty() && panel.marker == bundle.options.sex_marker;
    mc.q = panel.freq;
    mc.donor_above.assign(A, -1);
    for (int a = 0; a + 1 < A; ++a)
        if (one_repeat_above(panel.alleles[a], panel.alleles[a + 1])) mc.donor_above[a] = a + 1;

    mc.traces.reserve(bundle.traces.size());
    for (std::size_t tr = 0; tr < bundle.traces.size(); ++tr) {
        const ModelParams& mp = params_per_trace[tr];
        validate_params(mp, I);
        TraceEvidence ev;
        ev.height.assign(A, -1.0);
        ev.threshold = bundle.traces[tr].threshold;
        ev.rho = mp.rho();
        ev.eta = mp.eta();
        ev.xi = mp.xi;
        ev.phi = mp.phi;
        auto it = bundle.traces[tr].markers.find(panel.marker);
        if (it != bundle.traces[tr].markers.end())
            for (const Peak& pk : it->second) {
                if (pk.sub_threshold) continue;
                int idx = panel.index_of(pk.allele);
                if (idx < 0)
                    throw InternalError("peak allele missing from the augmented panel at " +
                                        panel.marker);
                ev.height[idx] = pk.height;
            }
        mc.traces.push_back(std::move(ev));
    }

    mc.chains.assign(I, ChainSpec{});
    for (int i = 0; i < I; ++i) {
        const Contributor& c = bundle.roster[i];
        if (c.known()) {
            const GenotypeProfile* prof = bundle.profile_of(c.profile_id);
            if (prof && prof->typed_at(panel.marker)) {
                mc.chains[i] = ChainSpec{ChainSpec::kFixed,
                                         genotype_indices(panel, prof->markers.at(panel.marker)),
                                         -1,
                                         {}};
                continue;
            }
        }
        if (mc.sex_marker) {
            if (bundle.males.count(c.id)) apply_sex_evidence(mc, i, true);
            else if (bundle.females.count(c.id)) apply_sex_evidence(mc, i, false);
        }
    }
    return mc;
}

CaseView build_case_view(const CaseBundle& bundle,
                         const std::vector<ModelParams>& params_per_trace) {
    CaseView view;
    view.markers.reserve(bundle.freqs.markers.size());
    for (const auto& panel : bundle.freqs.markers)
        view.markers.push_back(build_marker_case(bundle, panel, params_per_trace));
    view.tables.reserve(bundle.traces.size());
    if (!view.markers.empty())
        for (const auto& tr : view.markers.front().traces)
            view.tables.push_back(build_trace_tables(tr));
    return view;
}

double case_log_likelihood(const CaseView& view, int threads) {
    std::vector<double> lls(view.markers.size(), 0.0);
    parallel_for(view.markers.size(), threads, [&](std::size_t i) {
        lls[i] = marker_log_likelihood(view.markers[i], {}, view.tables);
    });
    double sum = 0.0;
    for (double v : lls) sum += v;
    return sum;
}

}  // namespace mixkin
