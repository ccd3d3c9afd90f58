#include "mixkin/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mixkin/config.hpp"
#include "mixkin/csv.hpp"
#include "mixkin/deconvolution.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/estimation.hpp"
#include "mixkin/kinship.hpp"
#include "mixkin/manifest.hpp"
#include "mixkin/parallel.hpp"
#include "mixkin/rng.hpp"
#include "mixkin/simulator.hpp"
#include "mixkin/version.hpp"

namespace mixkin {

namespace {

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

void log_start(const std::string& command) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    if (std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now)))
        std::cerr << "mixkin " << command << " started " << buf << "\n";
}

RunManifest make_manifest(const std::string& command, const CaseConfig& cfg, bool has_seed,
                          std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.config_path = cfg.config_path;
    m.config_digest = cfg.config_digest;
    m.inputs = cfg.input_files;
    m.has_seed = has_seed;
    m.seed = seed;
    m.version = kVersion;
    return m;
}

std::string se_text(const ParamEstimate& e) {
    if (e.at_boundary || !e.se_available) return "na";
    return format_double(e.se);
}

void write_fit_csv(const std::string& path, const CaseConfig& cfg, const FitResult& fr,
                   const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "# log_likelihood: " << format_double(fr.log_likelihood) << "\n";
    out << "# converged: " << (fr.converged ? "yes" : "no") << "\n";
    out << "# iterations: " << fr.iterations << "\n";
    out << "# gradient_norm: " << format_double(fr.grad_norm) << "\n";
    out << "trace,parameter,estimate,se\n";
    for (const auto& tf : fr.traces) {
        out << tf.trace_id << ",mu," << format_double(tf.mu.value) << ',' << se_text(tf.mu)
            << "\n";
        out << tf.trace_id << ",sigma," << format_double(tf.sigma.value) << ','
            << se_text(tf.sigma) << "\n";
        out << tf.trace_id << ",xi," << format_double(tf.xi.value) << ',' << se_text(tf.xi)
            << "\n";
        for (int i : fr.display_order)
            out << tf.trace_id << ",phi_" << cfg.bundle.roster[i].id << ','
                << format_double(tf.phi[i].value) << ',' << se_text(tf.phi[i]) << "\n";
    }
    if (!out.good()) throw ValidationError("failed writing " + path);
}

void print_fit(std::ostream& os, const CaseConfig& cfg, const FitResult& fr) {
    os << "log-likelihood " << format_significant(fr.log_likelihood) << ", "
       << (fr.converged ? "converged" : "NOT converged") << " after " << fr.iterations
       << " iterations (gradient norm " << format_significant(fr.grad_norm) << ")\n";
    for (const auto& tf : fr.traces) {
        os << "trace " << tf.trace_id << "\n";
        auto row = [&](const std::string& name, const ParamEstimate& e) {
            os << "  " << name << " = " << format_significant(e.value);
            if (e.at_boundary)
                os << " (boundary, se na)";
            else if (e.se_available)
                os << " (se " << format_significant(e.se) << ")";
            else
                os << " (se na)";
            os << "\n";
        };
        row("mu", tf.mu);
        row("sigma", tf.sigma);
        row("xi", tf.xi);
        for (int i : fr.display_order) row("phi_" + cfg.bundle.roster[i].id, tf.phi[i]);
    }
}

FitResult fitted_or_throw(const CaseConfig& cfg) {
    FitResult fr = fit(cfg.bundle, cfg.fit);
    if (!fr.converged)
        throw ConvergenceError("fit did not converge within the iteration limit (" +
                               std::to_string(fr.iterations) + " iterations, gradient norm " +
                               format_significant(fr.grad_norm) + ")");
    return fr;
}

struct LrOptions {
    std::string method = "all";
    std::vector<std::string> hypotheses;  // empty = all configured
    double prior = -1.0;                  // extra posterior column when in [0,1]
    std::string union_priors;             // comma list
    std::string union_grid;               // comma list for the prior sweep
};

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    long pos = 0;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what, ++pos));
    if (out.empty()) throw ValidationError(std::string(what) + " is empty");
    return out;
}

std::vector<LrMethod> applicable_methods(const std::string& method, RelKind kind) {
    if (method != "all") return {method_from_name(method)};
    std::vector<LrMethod> ms{LrMethod::kWlr, LrMethod::kAln, LrMethod::kMbn, LrMethod::kRpt};
    if (kind != RelKind::kParentChild)
        ms.erase(std::remove(ms.begin(), ms.end(), LrMethod::kMbn), ms.end());
    return ms;
}

void assert_agreement(const std::vector<LRReport>& reports) {
    for (std::size_t a = 0; a < reports.size(); ++a)
        for (std::size_t b = a + 1; b < reports.size(); ++b) {
            double la = reports[a].log10_overall, lb = reports[b].log10_overall;
            double tol = 1e-9 * std::max(1.0, std::max(std::fabs(la), std::fabs(lb)));
            bool ok = (std::isinf(la) && std::isinf(lb) && la == lb) || std::fabs(la - lb) <= tol;
            if (!ok)
                throw InternalError("methods disagree: " + method_name(reports[a].method) +
                                    " log10 " + format_log10(la) + " vs " +
                                    method_name(reports[b].method) + " log10 " +
                                    format_log10(lb));
        }
}

const Hypothesis* find_hypothesis(const CaseConfig& cfg, const std::string& name) {
    for (const auto& h : cfg.hypotheses)
        if (h.name == name) return &h;
    return nullptr;
}

int cmd_fit(const CaseConfig& cfg, int threads, const std::string& out_path) {
    (void)threads;
    FitResult fr = fit(cfg.bundle, cfg.fit);
    RunManifest man = make_manifest("fit", cfg, true, cfg.fit.seed);
    write_fit_csv(out_path, cfg, fr, manifest_comments(man));
    print_fit(std::cout, cfg, fr);
    std::cout << "wrote " << out_path << "\n";
    if (!fr.converged)
        throw ConvergenceError("fit did not converge within the iteration limit");
    return 0;
}

int cmd_deconvolve(const CaseConfig& cfg, int threads, int top_k,
                   const std::vector<std::string>& only, const std::string& hyp_name,
                   const std::string& out_path) {
    FitResult fr = fitted_or_throw(cfg);
    ParamsContext ctx = null_mle_context(fr);
    CaseView view = build_case_view(cfg.bundle, ctx.params);

    std::vector<int> targets;
    if (only.empty()) {
        for (std::size_t i = 0; i < cfg.bundle.roster.size(); ++i)
            if (!cfg.bundle.roster[i].known()) targets.push_back(static_cast<int>(i));
    } else {
        for (const auto& id : only) {
            int idx = cfg.bundle.contributor_index(id);
            if (idx < 0) throw ValidationError("unknown contributor '" + id + "'");
            targets.push_back(idx);
        }
    }
    if (targets.empty()) throw ValidationError("no unknown contributors to deconvolve");

    const Hypothesis* hyp = nullptr;
    if (!hyp_name.empty()) {
        hyp = find_hypothesis(cfg, hyp_name);
        if (!hyp) throw ValidationError("unknown hypothesis '" + hyp_name + "'");
    } else if (!cfg.hypotheses.empty()) {
        hyp = &cfg.hypotheses.front();
    }

    const std::size_t nm = view.markers.size();
    std::vector<RankedGenotypes> rankings(nm * targets.size());
    parallel_for(nm * targets.size(), threads, [&](std::size_t slot) {
        std::size_t mi = slot / targets.size();
        int ti = targets[slot % targets.size()];
        GenotypePosterior post = marker_posterior(view.markers[mi], ti, view.tables);
        RankedGenotypes rg = rank_genotypes(post, top_k);
        if (hyp) {
            const MarkerFrequencies& panel = cfg.bundle.freqs.markers[mi];
            annotate_compatibility(rg, [&](const Genotype& g) {
                return hypothesis_lr_ugt(cfg.bundle, *hyp, panel, g);
            });
        }
        rankings[slot] = std::move(rg);
    });

    std::vector<std::string> ids;
    for (const auto& c : cfg.bundle.roster) ids.push_back(c.id);
    RunManifest man = make_manifest("deconvolve", cfg, true, cfg.fit.seed);
    write_deconvolution_csv(out_path, rankings, cfg.bundle.freqs, ids,
                            manifest_comments(man));
    for (const auto& rg : rankings) {
        if (rg.entries.empty()) continue;
        const MarkerFrequencies* panel = cfg.bundle.freqs.find(rg.marker);
        const RankedEntry& top = rg.entries.front();
        std::cout << rg.marker << " " << ids[rg.contributor] << ": {"
                  << panel->alleles[top.g.x].text << "," << panel->alleles[top.g.y].text
                  << "} p=" << format_significant(top.probability) << "\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_lr(const CaseConfig& cfg, int threads, const LrOptions& opt,
           const std::string& out_path) {
    if (cfg.hypotheses.empty())
        throw ValidationError("config declares no hypotheses to evaluate");
    std::vector<const Hypothesis*> selected;
    if (opt.hypotheses.empty()) {
        for (const auto& h : cfg.hypotheses) selected.push_back(&h);
    } else {
        for (const auto& name : opt.hypotheses) {
            const Hypothesis* h = find_hypothesis(cfg, name);
            if (!h) throw ValidationError("unknown hypothesis '" + name + "'");
            selected.push_back(h);
        }
    }

    FitResult fr = fitted_or_throw(cfg);
    ParamsContext ctx = null_mle_context(fr);

    std::vector<std::vector<LRReport>> all_reports;
    for (const Hypothesis* h : selected) {
        std::vector<LRReport> reports;
        for (LrMethod m : applicable_methods(opt.method, h->kind))
            reports.push_back(kinship_lr(cfg.bundle, ctx, *h, m, threads));
        if (reports.size() > 1) assert_agreement(reports);
        all_reports.push_back(std::move(reports));
    }

    RunManifest man = make_manifest("lr", cfg, true, cfg.fit.seed);
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write " + out_path);
    for (const auto& c : manifest_comments(man)) out << "# " << c << "\n";
    for (std::size_t k = 0; k < selected.size(); ++k) {
        out << "# hypothesis: " << selected[k]->name << "\n";
        for (const auto& rep : all_reports[k]) {
            out << "# method: " << method_name(rep.method) << "\n";
            out << "marker,lr\n";
            for (const auto& m : rep.markers)
                out << m.marker << ',' << format_significant(m.lr) << "\n";
        }
        bool extra_prior = opt.prior >= 0.0;
        out << "method,log10_lr,lr,posterior_uniform_prior";
        if (extra_prior) out << ",posterior_prior";
        out << "\n";
        for (const auto& rep : all_reports[k]) {
            out << method_name(rep.method) << ',' << format_log10(rep.log10_overall) << ','
                << format_significant(rep.overall) << ','
                << format_significant(posterior_probability(rep.overall, 0.5));
            if (extra_prior)
                out << ',' << format_significant(posterior_probability(rep.overall, opt.prior));
            out << "\n";
        }
    }

    if (!opt.union_priors.empty()) {
        std::vector<double> priors = parse_double_list(opt.union_priors, "union priors");
        if (priors.size() != selected.size())
            throw ValidationError("union priors must match the selected hypothesis count");
        std::vector<double> lrs;
        for (const auto& reports : all_reports) lrs.push_back(reports.front().overall);
        out << "union_mode,lr\n";
        out << "weighted," << format_significant(combine_union_weighted(lrs, priors)) << "\n";
        out << "min," << format_significant(combine_union_min(lrs)) << "\n";
        out << "max," << format_significant(combine_union_max(lrs)) << "\n";
        if (!opt.union_grid.empty()) {
            auto grid = parse_double_list(opt.union_grid, "union grid");
            out << "prior_first_hypothesis,lr\n";
            for (const auto& [t, v] : combine_union_range(lrs, grid))
                out << format_double(t) << ',' << format_significant(v) << "\n";
        }
    }
    if (!out.good()) throw ValidationError("failed writing " + out_path);
    out.close();

    for (std::size_t k = 0; k < selected.size(); ++k) {
        std::cout << "hypothesis " << selected[k]->name << "\n";
        for (const auto& rep : all_reports[k])
            std::cout << "  " << method_name(rep.method) << ": log10 LR "
                      << format_log10(rep.log10_overall) << ", LR "
                      << format_significant(rep.overall) << ", posterior (uniform prior) "
                      << format_significant(posterior_probability(rep.overall, 0.5)) << "\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, long seed_override, int replicates,
                 const std::string& out_dir) {
    Scenario sc = load_scenario_config(config_path);
    if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
    if (replicates < 1) throw ValidationError("--replicates must be >= 1");
    std::filesystem::create_directories(out_dir);

    RunManifest man;
    man.command = "simulate";
    man.config_path = sc.config_path;
    man.config_digest = sc.config_digest;
    man.inputs = sc.input_files;
    man.has_seed = true;
    man.seed = sc.seed;
    man.version = kVersion;

    int written = 0;
    for (int r = 0; r < replicates; ++r) {
        std::uint64_t rep_seed = mix_seed(sc.seed, static_cast<std::uint64_t>(r));
        GenotypeMatrix truth = realize_genotypes(sc, mix_seed(rep_seed, 0));
        for (std::size_t t = 0; t < sc.traces.size(); ++t) {
            PeakTable pt =
                simulate_trace(sc.freqs, truth, sc.traces[t].params, sc.threshold,
                               sc.traces[t].id, mix_seed(rep_seed, 1 + t));
            std::string name = sc.traces[t].id;
            if (replicates > 1) name += "_r" + std::to_string(r + 1);
            std::filesystem::path file = std::filesystem::path(out_dir) / (name + ".csv");
            auto comments = manifest_comments(man);
            if (replicates > 1) comments.push_back("replicate: " + std::to_string(r + 1));
            write_peak_table(pt, file.string(), comments);
            ++written;
        }
    }
    std::cout << "wrote " << written << " peak table" << (written == 1 ? "" : "s") << " to "
              << out_dir << "\n";
    return 0;
}

int cmd_report(const CaseConfig& cfg, int threads, const std::string& out_path) {
    FitResult fr = fitted_or_throw(cfg);
    ParamsContext ctx = null_mle_context(fr);
    CaseView view = build_case_view(cfg.bundle, ctx.params);

    std::ostringstream os;
    RunManifest man = make_manifest("report", cfg, true, cfg.fit.seed);
    for (const auto& c : manifest_comments(man)) os << "# " << c << "\n";
    os << "\n== model fit ==\n";
    print_fit(os, cfg, fr);

    os << "\n== genotype posteriors (top 3) ==\n";
    std::vector<int> targets;
    for (std::size_t i = 0; i < cfg.bundle.roster.size(); ++i)
        if (!cfg.bundle.roster[i].known()) targets.push_back(static_cast<int>(i));
    for (std::size_t mi = 0; mi < view.markers.size(); ++mi)
        for (int ti : targets) {
            GenotypePosterior post = marker_posterior(view.markers[mi], ti, view.tables);
            RankedGenotypes rg = rank_genotypes(post, 3);
            const MarkerFrequencies& panel = cfg.bundle.freqs.markers[mi];
            os << view.markers[mi].marker << " " << cfg.bundle.roster[ti].id << ":";
            for (const auto& e : rg.entries)
                os << " {" << panel.alleles[e.g.x].text << "," << panel.alleles[e.g.y].text
                   << "} " << format_significant(e.probability);
            os << "\n";
        }

    if (!cfg.hypotheses.empty()) {
        os << "\n== likelihood ratios ==\n";
        for (const auto& h : cfg.hypotheses) {
            std::vector<LRReport> reports;
            for (LrMethod m : applicable_methods("all", h.kind))
                reports.push_back(kinship_lr(cfg.bundle, ctx, h, m, threads));
            assert_agreement(reports);
            os << "hypothesis " << h.name << "\n";
            os << "  marker ratios (" << method_name(reports.front().method) << "):";
            for (const auto& m : reports.front().markers)
                os << " " << m.marker << "=" << format_significant(m.lr);
            os << "\n";
            for (const auto& rep : reports)
                os << "  " << method_name(rep.method) << ": log10 LR "
                   << format_log10(rep.log10_overall) << ", LR "
                   << format_significant(rep.overall) << ", posterior (uniform prior) "
                   << format_significant(posterior_probability(rep.overall, 0.5)) << "\n";
        }
    }

    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write " + out_path);
    out << os.str();
    if (!out.good()) throw ValidationError("failed writing " + out_path);
    std::cout << os.str();
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"gamma-model DNA mixture interpretation and kinship ratios"};
    app.require_subcommand(1);

    std::string config_path, out_path, method = "all", hyp_for_flags, union_priors, union_grid,
                out_dir = ".";
    std::vector<std::string> contributors, hypotheses;
    int threads = default_threads();
    int top_k = 0, replicates = 1, restarts = -1;
    long seed = -1;
    double prior = -1.0;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* o = sub->add_option("--config", config_path, "case configuration file");
        if (needs_config) o->required();
        sub->add_option("--threads", threads, "worker threads for marker-level parallelism");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "estimate peak-height model parameters");
    add_common(fit_cmd);
    fit_cmd->add_option("--out", out_path, "output CSV path");
    fit_cmd->add_option("--restarts", restarts, "jittered multistart count");
    fit_cmd->add_option("--seed", seed, "multistart jitter seed");

    CLI::App* dec_cmd =
        app.add_subcommand("deconvolve", "rank contributor genotypes by posterior");
    add_common(dec_cmd);
    dec_cmd->add_option("--out", out_path, "output CSV path");
    dec_cmd->add_option("--top", top_k, "rows per marker and contributor (0 = all)");
    dec_cmd->add_option("--contributor", contributors, "only these contributor ids");
    dec_cmd->add_option("--hypothesis", hyp_for_flags,
                        "hypothesis supplying the compatibility flags");
    dec_cmd->add_option("--restarts", restarts, "jittered multistart count");
    dec_cmd->add_option("--seed", seed, "multistart jitter seed");

    CLI::App* lr_cmd = app.add_subcommand("lr", "relationship likelihood ratios");
    add_common(lr_cmd);
    lr_cmd->add_option("--out", out_path, "output CSV path");
    lr_cmd->add_option("--method", method, "wlr, aln, mbn, rpt, or all");
    lr_cmd->add_option("--hypothesis", hypotheses, "hypothesis names (default: all)");
    lr_cmd->add_option("--prior", prior, "extra posterior column at this prior")
        ->check(CLI::Range(0.0, 1.0));
    lr_cmd->add_option("--union-priors", union_priors,
                       "comma list of relative priors for a hypothesis union");
    lr_cmd->add_option("--union-grid", union_grid,
                       "comma list of first-hypothesis priors to sweep");
    lr_cmd->add_option("--restarts", restarts, "jittered multistart count");
    lr_cmd->add_option("--seed", seed, "multistart jitter seed");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "draw synthetic peak tables");
    sim_cmd->add_option("--config", config_path, "scenario configuration file")->required();
    sim_cmd->add_option("--seed", seed, "override the scenario seed");
    sim_cmd->add_option("--replicates", replicates, "independent replicates");
    sim_cmd->add_option("--out-dir", out_dir, "output directory");

    CLI::App* rep_cmd = app.add_subcommand("report", "fit + deconvolution + ratios in one");
    add_common(rep_cmd);
    rep_cmd->add_option("--out", out_path, "output text path");
    rep_cmd->add_option("--restarts", restarts, "jittered multistart count");
    rep_cmd->add_option("--seed", seed, "multistart jitter seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    if (threads < 1) {
        std::cerr << "error: --threads must be >= 1\n";
        return kExitValidation;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        log_start(name);
        if (name == "simulate")
            return cmd_simulate(config_path, seed, replicates, out_dir);

        CaseConfig cfg = load_case_config(config_path);
        if (restarts > 0) cfg.fit.restarts = restarts;
        if (seed >= 0) cfg.fit.seed = static_cast<std::uint64_t>(seed);
        cfg.fit.threads = threads;

        if (name == "fit") return cmd_fit(cfg, threads, out_path.empty() ? "fit.csv" : out_path);
        if (name == "deconvolve")
            return cmd_deconvolve(cfg, threads, top_k, contributors, hyp_for_flags,
                                  out_path.empty() ? "deconvolution.csv" : out_path);
        if (name == "lr") {
            LrOptions opt;
            opt.method = method;
            opt.hypotheses = hypotheses;
            opt.prior = prior;
            opt.union_priors = union_priors;
            opt.union_grid = union_grid;
            return cmd_lr(cfg, threads, opt, out_path.empty() ? "lr.csv" : out_path);
        }
        if (name == "report")
            return cmd_report(cfg, threads, out_path.empty() ? "report.txt" : out_path);
        throw InternalError("unhandled subcommand " + name);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("mixkin");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mixkin
