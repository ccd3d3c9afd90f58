#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mixkin/engine.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/gamma.hpp"
#include "mixkin/rng.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"

using namespace mixkin;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

bool log_close(double a, double b, double tol = 1e-9) {
    if (a == -kInf || b == -kInf) return a == b;
    return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}
}  // namespace

TEST_CASE("genotype enumeration and Hardy-Weinberg weights") {
    auto gts = enumerate_genotypes(3);
    REQUIRE(gts.size() == 6);
    CHECK(gts[0] == Genotype{0, 0});
    CHECK(gts[1] == Genotype{0, 1});
    CHECK(gts[5] == Genotype{2, 2});
    std::vector<double> q{0.5, 0.3, 0.2};
    double sum = 0.0;
    for (const auto& g : gts) sum += hardy_weinberg(g, q);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hardy_weinberg({0, 1}, q) == doctest::Approx(2 * 0.5 * 0.3));
    CHECK(hardy_weinberg({2, 2}, q) == doctest::Approx(0.04));
}

TEST_CASE("population chain reproduces the binomial allocation") {
    // two equifrequent alleles, no peak evidence: genotype posterior must be
    // the plain prior (0.25, 0.5, 0.25)
    MarkerCase mc;
    mc.marker = "M1";
    mc.q = {0.5, 0.5};
    mc.donor_above = {-1, -1};
    mc.chains.push_back({});
    GenotypePosterior post = marker_posterior(mc, 0);
    REQUIRE(post.entries.size() == 3);
    CHECK(post.entries[0].second == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(post.entries[1].second == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.entries[2].second == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(marker_log_likelihood(mc) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single contributor, two alleles, total dropout, no stutter") {
    MarkerCase mc;
    mc.marker = "M1";
    mc.q = {0.7, 0.3};
    mc.donor_above = {-1, -1};
    mc.chains.push_back({});
    TraceEvidence tr;
    tr.threshold = 50.0;
    tr.rho = 4.0;
    tr.eta = 200.0;
    tr.xi = 0.0;
    tr.phi = {1.0};
    tr.height = {-1.0, -1.0};
    mc.traces.push_back(tr);

    double g2 = std::exp(log_gamma_cdf(50.0, 8.0, 200.0));
    double g1 = std::exp(log_gamma_cdf(50.0, 4.0, 200.0));
    double want = std::log(0.49 * g2 + 2 * 0.7 * 0.3 * g1 * g1 + 0.09 * g2);
    CHECK(marker_log_likelihood(mc) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("forward pass equals exhaustive enumeration on random instances") {
    Rng rng(2024);
    int impossible = 0;
    for (int n = 0; n < 200; ++n) {
        MarkerCase mc = fx::random_case(rng);
        double got = marker_log_likelihood(mc);
        double want = bf::marker_log_likelihood(mc);
        CAPTURE(n);
        CHECK(log_close(got, want));
        if (got == -kInf) impossible++;
    }
    CHECK(impossible < 20);
}

TEST_CASE("two traces share one genotype chain") {
    Rng rng(515);
    int done = 0;
    while (done < 25) {
        MarkerCase mc = fx::random_case(rng, 2, 4);
        if (mc.traces.size() != 2) continue;
        CHECK(log_close(marker_log_likelihood(mc), bf::marker_log_likelihood(mc)));
        done++;
    }
}

TEST_CASE("count factors multiply into the pass where they claim to") {
    Rng rng(88);
    for (int n = 0; n < 60; ++n) {
        MarkerCase mc = fx::random_case(rng, 2, 4);
        int na = static_cast<int>(mc.q.size());
        CountFactor f;
        f.contributor = static_cast<int>(rng.uniform() * mc.chains.size());
        f.position = static_cast<int>(rng.uniform() * na);
        f.w = {0.3, 1.7, 0.9};
        double got = marker_log_likelihood(mc, {f});
        double want = bf::marker_log_likelihood(mc, {f});
        CHECK(log_close(got, want));

        CountFactor unit;
        unit.contributor = f.contributor;
        unit.position = f.position;
        double plain = marker_log_likelihood(mc);
        CHECK(log_close(marker_log_likelihood(mc, {unit}), plain, 1e-12));
    }
}

TEST_CASE("ibd and meiosis chains match their enumerations") {
    Rng rng(3141);
    for (int n = 0; n < 120; ++n) {
        MarkerCase mc = fx::random_case(rng, 2, 4, false);
        int na = static_cast<int>(mc.q.size());
        if (rng.uniform() < 0.5) {
            ChainSpec ibd;
            ibd.kind = ChainSpec::kIbd;
            ibd.ibd_pos = static_cast<int>(rng.uniform() * na);
            mc.chains[0] = ibd;
        } else {
            ChainSpec mei;
            mei.kind = ChainSpec::kMeiosis;
            mei.child_counts.assign(na, 0);
            mei.child_counts[static_cast<int>(rng.uniform() * na)]++;
            mei.child_counts[static_cast<int>(rng.uniform() * na)]++;
            mc.chains[0] = mei;
        }
        CAPTURE(n);
        CHECK(log_close(marker_log_likelihood(mc), bf::marker_log_likelihood(mc)));
    }
}

TEST_CASE("meiosis chain with flat evidence marginalizes to the child prior") {
    // with no peaks, the chain's total weight is P(father) * P(child | father)
    // summed over fathers, i.e. the Hardy-Weinberg probability of the child
    std::vector<double> q{0.5, 0.3, 0.2};
    for (auto cgt : enumerate_genotypes(3)) {
        MarkerCase mc;
        mc.marker = "M1";
        mc.q = q;
        mc.donor_above = {-1, -1, -1};
        ChainSpec mei;
        mei.kind = ChainSpec::kMeiosis;
        mei.child_counts.assign(3, 0);
        mei.child_counts[cgt.x]++;
        mei.child_counts[cgt.y]++;
        mc.chains.push_back(mei);
        CHECK(marker_log_likelihood(mc) ==
              doctest::Approx(std::log(hardy_weinberg(cgt, q))).epsilon(1e-12));
    }
}

TEST_CASE("homozygous father passes his allele with certainty") {
    // father fixed {1,1}; child must then carry allele 1 from him
    std::vector<double> q{0.6, 0.4};
    for (int child_other = 0; child_other < 2; ++child_other) {
        MarkerCase mc;
        mc.marker = "M1";
        mc.q = q;
        mc.donor_above = {-1, -1};
        ChainSpec mei;
        mei.kind = ChainSpec::kMeiosis;
        mei.child_counts = {0, 0};
        mei.child_counts[1]++;
        mei.child_counts[child_other]++;
        mc.chains.push_back(mei);
        // restrict the father to {1,1} with a count factor that zeroes other counts
        CountFactor only11;
        only11.contributor = 0;
        only11.position = 1;
        only11.w = {0.0, 0.0, 1.0};
        double ll = marker_log_likelihood(mc, {only11});
        // P(father {1,1}) * P(child | father) = q1^2 * q_mother-allele
        double want = q[1] * q[1] * q[child_other];
        CHECK(std::exp(ll) == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("posterior matches enumeration and normalizes") {
    Rng rng(990);
    for (int n = 0; n < 40; ++n) {
        MarkerCase mc = fx::random_case(rng);
        int target = -1;
        for (std::size_t i = 0; i < mc.chains.size(); ++i)
            if (mc.chains[i].kind == ChainSpec::kFree) target = static_cast<int>(i);
        if (target < 0) continue;
        double plain = marker_log_likelihood(mc);
        if (plain == -kInf) continue;

        GenotypePosterior post = marker_posterior(mc, target);
        double sum = 0.0;
        for (const auto& [g, p] : post.entries) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

        // law of total probability: clamped likelihoods recompose the total
        double total = 0.0;
        for (const auto& [g, p] : post.entries) {
            MarkerCase clamped = mc;
            clamped.chains[target].kind = ChainSpec::kFixed;
            clamped.chains[target].fixed = g;
            total += hardy_weinberg(g, mc.q) * std::exp(bf::marker_log_likelihood(clamped));
            double want = hardy_weinberg(g, mc.q) *
                          std::exp(bf::marker_log_likelihood(clamped) - plain);
            CHECK(std::fabs(p - want) <= 1e-9);
        }
        CHECK(log_close(std::log(total), plain));
    }
}

TEST_CASE("posterior with impossible evidence reports exclusion") {
    MarkerCase mc;
    mc.marker = "D7";
    mc.q = {0.5, 0.5};
    mc.donor_above = {-1, -1};
    ChainSpec fixed;
    fixed.kind = ChainSpec::kFixed;
    fixed.fixed = {0, 0};
    mc.chains.push_back(fixed);
    mc.chains.push_back({});
    TraceEvidence tr;
    tr.threshold = 50.0;
    tr.rho = 4.0;
    tr.eta = 200.0;
    tr.xi = 0.0;
    tr.phi = {1.0, 0.0};  // the free contributor never amplifies
    tr.height = {-1.0, 900.0};
    mc.traces.push_back(tr);
    CHECK(marker_log_likelihood(mc) == -kInf);
    CHECK_THROWS_WITH_AS(marker_posterior(mc, 1),
                         "no genotype configuration consistent with evidence at marker D7",
                         ValidationError);
}

TEST_CASE("sex evidence clamps the sex-marker genotype") {
    MarkerCase mc;
    mc.marker = "AMEL";
    mc.sex_marker = true;
    mc.q = {0.5, 0.5};
    mc.donor_above = {-1, -1};
    mc.chains.push_back({});
    mc.chains.push_back({});
    apply_sex_evidence(mc, 0, true);
    apply_sex_evidence(mc, 1, false);
    GenotypePosterior male = marker_posterior(mc, 0);
    GenotypePosterior female = marker_posterior(mc, 1);
    for (const auto& [g, p] : male.entries)
        CHECK(p == ((g == Genotype{0, 1}) ? doctest::Approx(1.0) : doctest::Approx(0.0)));
    for (const auto& [g, p] : female.entries)
        CHECK(p == ((g == Genotype{0, 0}) ? doctest::Approx(1.0) : doctest::Approx(0.0)));

    MarkerCase other;
    other.marker = "D1";
    other.q = {0.5, 0.5};
    other.donor_above = {-1, -1};
    other.chains.push_back({});
    MarkerCase copy = other;
    apply_sex_evidence(other, 0, true);
    CHECK(other.chains[0].kind == copy.chains[0].kind);
}

TEST_CASE("case view wires stutter topology from the panel") {
    CaseBundle b;
    b.freqs.markers.push_back(
        fx::named_panel("D1", {{"30", 0.3}, {"31", 0.3}, {"31.2", 0.4}}));
    b.roster.push_back({"U1", ""});
    PeakTable pt;
    pt.trace_id = "T1";
    pt.threshold = 50.0;
    pt.markers["D1"] = {{parse_allele_label("30"), 600.0, false},
                        {parse_allele_label("31.2"), 44.0, true}};
    b.traces.push_back(pt);
    finalize_bundle(b);

    ModelParams p;
    p.mu = 800.0;
    p.sigma = 0.5;
    p.xi = 0.05;
    p.phi = {1.0};
    CaseView view = build_case_view(b, {p});
    const MarkerCase* d1 = nullptr;
    for (const auto& mc : view.markers)
        if (mc.marker == "D1") d1 = &mc;
    REQUIRE(d1 != nullptr);
    // 31 sits one repeat above 30 in the next slot; 31.2 is a microvariant
    // step away from 31, so no stutter flows between those two
    CHECK(d1->donor_above[0] == 1);
    CHECK(d1->donor_above[1] == -1);
    CHECK(d1->donor_above[2] == -1);
    // the sub-threshold 31.2 peak is treated as unobserved
    CHECK(d1->traces[0].height[0] == 600.0);
    CHECK(d1->traces[0].height[2] == -1.0);

    double ll1 = case_log_likelihood(view, 1);
    double ll4 = case_log_likelihood(view, 4);
    CHECK(ll1 == ll4);
    CHECK(std::isfinite(ll1));
}

TEST_CASE("likelihood never returns NaN") {
    Rng rng(4242);
    for (int n = 0; n < 100; ++n) {
        MarkerCase mc = fx::random_case(rng);
        double ll = marker_log_likelihood(mc);
        CHECK_FALSE(std::isnan(ll));
    }
}
