// Acceptance checks for the full pipeline. Run as:
//   acceptance_suite <path-to-mixkin-binary>
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mixkin/engine.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/estimation.hpp"
#include "mixkin/kinship.hpp"
#include "mixkin/rng.hpp"
#include "mixkin/simulator.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"

using namespace mixkin;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail = "") {
    std::printf("%s criterion %d: %s%s%s%s\n", ok ? "PASS" : "FAIL", n, what.c_str(),
                detail.empty() ? "" : " (", detail.c_str(), detail.empty() ? "" : ")");
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double ln_overall(const LRReport& r) { return r.log10_overall * std::log(10.0); }

int run_cmd(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct MleRecord {
    double grad_norm;
    double log_likelihood;
};
std::vector<MleRecord> g_mles;  // every converged fit the suite produced

// ---------------------------------------------------------------------------

void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(90001);
    int bad = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        MarkerCase mc = fx::random_case(rng);
        double dp = marker_log_likelihood(mc);
        double ref = bf::marker_log_likelihood(mc);
        if (std::isinf(dp) || std::isinf(ref)) {
            if (dp != ref) ++bad;
            continue;
        }
        double rel = std::fabs(dp - ref) / std::max(1.0, std::fabs(ref));
        worst = std::max(worst, rel);
        if (!(rel <= 1e-9)) ++bad;
    }
    double secs = seconds_since(t0);
    report(1, bad == 0 && secs < 60.0,
           "marker likelihood matches exhaustive enumeration on 1000 random instances",
           "worst rel " + fmt(worst) + ", " + fmt(secs) + " s");
}

void criterion2() {
    auto t0 = std::chrono::steady_clock::now();
    const LrMethod methods[] = {LrMethod::kWlr, LrMethod::kAln, LrMethod::kMbn,
                                LrMethod::kRpt};
    int bad = 0;
    double worst = 0.0;
    for (int seed = 0; seed < 500; ++seed) {
        fx::FamilyCase fc =
            fx::random_family(10000 + seed, 5, 4, 1 + seed % 2, false);
        double lnlr[4];
        for (int m = 0; m < 4; ++m)
            lnlr[m] = ln_overall(kinship_lr(fc.bundle, fc.ctx, fc.hyp, methods[m]));
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                if (std::isinf(lnlr[a]) || std::isinf(lnlr[b])) {
                    if (lnlr[a] != lnlr[b]) ++bad;
                    continue;
                }
                double d = std::fabs(lnlr[a] - lnlr[b]);
                worst = std::max(worst, d);
                if (!(d <= 1e-9)) ++bad;
            }
    }
    double secs = seconds_since(t0);
    report(2, bad == 0 && secs < 120.0,
           "four ratio methods agree pairwise on 500 parent-child cases",
           "worst |dln| " + fmt(worst) + ", " + fmt(secs) + " s");
}

void criterion3() {
    bool ok = true;
    std::string why;

    // heterozygous child 30/32, untyped-parent candidate 30/31.2, frequencies
    // implied by the published per-genotype likelihoods 0.0055 and 0.0051
    std::vector<double> qf = {0.2318181818, 0.7571818182, 0.011};
    double lr = lr_ugt_child_only({0, 1}, {0, 2}, qf);
    if (!(std::fabs(lr - 1.08) <= 0.005)) {
        ok = false;
        why = "ratio " + fmt(lr);
    }
    double published = 0.0055 / 0.0051;
    if (!(std::fabs(lr - published) / published <= 1e-8)) {
        ok = false;
        why += " vs published " + fmt(published);
    }

    // single-genotype ratio algebra, child typed
    std::vector<double> q = {0.25, 0.25, 0.5};
    ok = ok && lr_ugt_child_only({0, 1}, {0, 1}, q) == 2.0;  // shared het
    ok = ok && lr_ugt_child_only({2, 2}, {0, 1}, q) == 0.0;  // exclusion
    ok = ok && lr_ugt_child_only({0, 0}, {0, 1}, q) == 2.0;  // homozygous candidate
    ok = ok && lr_ugt_child_only({0, 1}, {0, 0}, q) == 2.0;  // homozygous child

    // mother also typed
    std::vector<double> qm = {0.1, 0.2, 0.7};
    ok = ok && lr_ugt_mother_child({0, 1}, {0, 1}, {1, 1}, qm) == 5.0;  // paternal forced
    ok = ok && lr_ugt_mother_child({1, 2}, {0, 1}, {1, 1}, qm) == 0.0;  // candidate excluded
    ok = ok && lr_ugt_mother_child({0, 1}, {0, 1}, {0, 1}, q) == 2.0;   // pooled alleles
    bool threw = false;
    try {
        lr_ugt_mother_child({0, 1}, {0, 0}, {1, 2}, qm);
    } catch (const ValidationError&) {
        threw = true;
    }
    ok = ok && threw;

    report(3, ok, "per-marker ratio fixtures and genotype algebra", why);
}

void criterion4() {
    double p1 = posterior_probability(370.0, 0.5);
    double p2 = posterior_probability(std::pow(10.0, 5.4251), 0.5);
    bool ok = std::fabs(p1 - 0.99730) <= 1e-5 && std::fabs(p2 - 0.999996) <= 1e-6;
    report(4, ok, "posterior probabilities at the published ratios",
           fmt(p1) + ", " + fmt(p2));
}

void criterion5() {
    std::vector<double> lrs = {188330.3, 37.05};
    double w = combine_union_weighted(lrs, {0.5, 0.5});
    double mn = combine_union_min(lrs);
    bool ok = std::fabs(w - 94183.67) / 94183.67 <= 1e-6 && mn == 37.05;
    report(5, ok, "union-of-hypotheses combiner", fmt(w) + ", min " + fmt(mn));
}

void criterion6() {
    const LrMethod methods[] = {LrMethod::kWlr, LrMethod::kAln, LrMethod::kRpt};
    int bad = 0;
    double worst = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        fx::FamilyCase fc =
            fx::random_family(20000 + seed, 4, 4, 1 + seed % 2, false);
        Hypothesis rev;
        rev.name = "reversed";
        rev.target = "U1";
        rev.kind = RelKind::kTypedParentOfContributor;
        rev.parent_profile = "C";
        for (LrMethod m : methods) {
            double fwd = ln_overall(kinship_lr(fc.bundle, fc.ctx, fc.hyp, m));
            double bwd = ln_overall(kinship_lr(fc.bundle, fc.ctx, rev, m));
            if (std::isinf(fwd) || std::isinf(bwd)) {
                if (fwd != bwd) ++bad;
                continue;
            }
            double d = std::fabs(fwd - bwd) / std::max({1.0, std::fabs(fwd), std::fabs(bwd)});
            worst = std::max(worst, d);
            if (!(d <= 1e-9)) ++bad;
        }
    }
    report(6, bad == 0, "ratio is direction-exchangeable on 100 cases",
           "worst log-rel " + fmt(worst));
}

bool criterion7() {
    auto t0 = std::chrono::steady_clock::now();
    FrequencyTable ft = fx::equifrequent_table(200, 8);
    int good = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(5000 + rep);
        GenotypeMatrix g = sample_hw_genotypes(ft, 1, rng);
        ModelParams truth;
        truth.mu = 800.0;
        truth.sigma = 0.6;
        truth.xi = 0.05;
        truth.phi = {1.0};

        CaseBundle b;
        b.freqs = ft;
        b.traces.push_back(simulate_trace(ft, g, truth, 50.0, "T1", 6000 + rep));
        b.roster.push_back({"U1", ""});
        finalize_bundle(b);

        FitOptions opt;
        opt.restarts = 2;
        opt.seed = 11;
        FitResult fr = fit(b, opt);
        if (fr.converged)
            g_mles.push_back({fr.grad_norm, fr.log_likelihood});
        const TraceFit& tf = fr.traces[0];
        bool hit = fr.converged && std::fabs(tf.mu.value - 800.0) / 800.0 <= 0.10 &&
                   std::fabs(tf.sigma.value - 0.6) / 0.6 <= 0.15 &&
                   std::fabs(tf.xi.value - 0.05) <= 0.03;
        if (hit) ++good;
    }
    double secs = seconds_since(t0);
    bool ok = good >= 18 && secs < 300.0;
    report(7, ok, "fit recovers the generating parameters",
           std::to_string(good) + "/20 replicates, " + fmt(secs) + " s");
    return ok;
}

void criterion8() {
    bool ok = !g_mles.empty();
    double worst = 0.0;
    for (const MleRecord& r : g_mles) {
        double bound = 1e-4 * std::max(1.0, std::fabs(r.log_likelihood));
        worst = std::max(worst, r.grad_norm / bound);
        if (!(r.grad_norm <= bound)) ok = false;
    }
    report(8, ok, "gradient is stationary at every reported optimum",
           std::to_string(g_mles.size()) + " optima, worst ratio " + fmt(worst));
}

int criterion9_wins() {
    FrequencyTable ft = fx::equifrequent_table(15, 8);
    int wins = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(7000 + rep);
        GenotypeMatrix father = sample_hw_genotypes(ft, 1, rng);
        std::vector<Genotype> child = sample_child_indices(ft, father[0], nullptr, rng);
        ModelParams truth;
        truth.mu = 1000.0;
        truth.sigma = 0.5;
        truth.xi = 0.05;
        truth.phi = {1.0};

        CaseBundle b;
        b.freqs = ft;
        b.traces.push_back(simulate_trace(ft, father, truth, 50.0, "T1", rng.next_u64()));
        b.profiles["C"] = indices_to_profile(ft, child, "C");
        b.roster.push_back({"U1", ""});
        finalize_bundle(b);

        FitOptions opt;
        opt.restarts = 2;
        opt.seed = 3;
        FitResult fr = fit(b, opt);
        if (fr.converged)
            g_mles.push_back({fr.grad_norm, fr.log_likelihood});

        Hypothesis h;
        h.name = "paternity";
        h.target = "U1";
        h.kind = RelKind::kParentChild;
        h.child_profile = "C";
        LRReport rep_lr = kinship_lr(b, null_mle_context(fr), h, LrMethod::kAln);
        if (rep_lr.overall > 1.0) ++wins;
    }
    return wins;
}

void criterion10(const std::string& mixkin_bin) {
    fs::path dir = fs::temp_directory_path() / "mixkin_acceptance";
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);

    FrequencyTable ft = fx::equifrequent_table(6, 6);
    write_frequency_table(ft, (dir / "freqs.csv").string());
    Rng rng(31337);
    GenotypeMatrix fam = sample_hw_genotypes(ft, 2, rng);
    std::vector<Genotype> child = sample_child_indices(ft, fam[0], nullptr, rng);
    write_profile(indices_to_profile(ft, child, "C"), (dir / "child.csv").string());

    {
        std::ofstream s(dir / "scenario.json");
        s << "{\n"
             "  \"frequencies\": \"freqs.csv\",\n"
             "  \"threshold\": 50,\n"
             "  \"seed\": 424242,\n"
             "  \"contributors\": [{\"id\": \"U1\"}, {\"id\": \"U2\"}],\n"
             "  \"traces\": [{\"id\": \"T1\", \"params\": "
             "{\"mu\": 900, \"sigma\": 0.5, \"xi\": 0.05, \"phi\": [0.6, 0.4]}}]\n"
             "}\n";
    }
    {
        std::ofstream s(dir / "case.json");
        s << "{\n"
             "  \"frequencies\": \"freqs.csv\",\n"
             "  \"traces\": [{\"id\": \"T1\", \"peaks\": \"simA/T1.csv\", "
             "\"threshold\": 50}],\n"
             "  \"profiles\": {\"C\": \"child.csv\"},\n"
             "  \"contributors\": [{\"id\": \"U1\"}, {\"id\": \"U2\"}],\n"
             "  \"hypotheses\": [{\"name\": \"paternity\", \"target\": \"U1\", "
             "\"kind\": \"parent-of-typed-child\", \"child\": \"C\"}],\n"
             "  \"fit\": {\"restarts\": 2, \"seed\": 5}\n"
             "}\n";
    }

    auto at = [&](const std::string& rel) { return (dir / rel).string(); };
    std::string quiet = " > /dev/null 2>&1";
    bool ok = true;
    std::string why;

    if (run_cmd(mixkin_bin + " simulate --config " + at("scenario.json") +
                " --out-dir " + at("simA") + quiet) != 0 ||
        run_cmd(mixkin_bin + " simulate --config " + at("scenario.json") +
                " --out-dir " + at("simB") + quiet) != 0) {
        ok = false;
        why = "simulate failed";
    } else if (slurp(dir / "simA" / "T1.csv") != slurp(dir / "simB" / "T1.csv") ||
               slurp(dir / "simA" / "T1.csv").empty()) {
        ok = false;
        why = "simulate outputs differ";
    }

    if (ok) {
        if (run_cmd(mixkin_bin + " fit --config " + at("case.json") +
                    " --threads 1 --out " + at("fit1.csv") + quiet) != 0 ||
            run_cmd(mixkin_bin + " fit --config " + at("case.json") +
                    " --threads 4 --out " + at("fit2.csv") + quiet) != 0) {
            ok = false;
            why = "fit failed";
        } else if (slurp(dir / "fit1.csv") != slurp(dir / "fit2.csv") ||
                   slurp(dir / "fit1.csv").empty()) {
            ok = false;
            why = "fit outputs differ across thread counts";
        }
    }

    if (ok) {
        if (run_cmd(mixkin_bin + " lr --config " + at("case.json") +
                    " --threads 1 --out " + at("lr1.csv") + quiet) != 0 ||
            run_cmd(mixkin_bin + " lr --config " + at("case.json") +
                    " --threads 4 --out " + at("lr2.csv") + quiet) != 0) {
            ok = false;
            why = "lr failed";
        } else if (slurp(dir / "lr1.csv") != slurp(dir / "lr2.csv") ||
                   slurp(dir / "lr1.csv").empty()) {
            ok = false;
            why = "lr outputs differ across thread counts";
        }
    }

    report(10, ok, "byte-identical outputs across reruns and thread counts", why);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance_suite <mixkin-binary>\n");
        return 2;
    }
    const std::string mixkin_bin = argv[1];

    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        bool fits_ok = criterion7();
        (void)fits_ok;
        int wins = criterion9_wins();  // computed first so criterion 8 sees its optima
        criterion8();
        report(9, wins >= 95, "true-parent ratio exceeds 1 end to end",
               std::to_string(wins) + "/100 replicates");
        criterion10(mixkin_bin);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
        return 1;
    }

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
