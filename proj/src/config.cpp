#include "mixkin/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mixkin/errors.hpp"
#include "mixkin/manifest.hpp"

namespace mixkin {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config " + path);
    try {
        return json::parse(in, nullptr, true, true);  // comments allowed
    } catch (const json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad value for '" + key + "'");
    }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw ValidationError("config: missing '" + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad value for '" + key + "' in " + where);
    }
}

RelKind kind_from_string(const std::string& s) {
    if (s == "parent-of-typed-child") return RelKind::kParentChild;
    if (s == "parent-of-typed-child-with-mother") return RelKind::kParentChildTypedMother;
    if (s == "child-of-typed-parent") return RelKind::kTypedParentOfContributor;
    throw ValidationError(
        "config: unknown relationship kind '" + s +
        "' (expected parent-of-typed-child, parent-of-typed-child-with-mother, or "
        "child-of-typed-parent)");
}

ModelParams params_from_json(const json& j, const std::string& where) {
    check_keys(j, where, {"mu", "sigma", "xi", "phi"});
    ModelParams p;
    p.mu = require<double>(j, "mu", where);
    p.sigma = require<double>(j, "sigma", where);
    p.xi = get_or<double>(j, "xi", 0.0);
    p.phi = require<std::vector<double>>(j, "phi", where);
    return p;
}

}  // namespace

std::string resolve_path(const std::string& config_path, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(config_path).parent_path() / p).string();
}

CaseConfig load_case_config(const std::string& path) {
    json j = parse_file(path);
    if (!j.is_object()) throw ValidationError("config " + path + ": expected an object");
    check_keys(j, "top level",
               {"frequencies", "options", "traces", "profiles", "contributors", "male",
                "female", "hypotheses", "fit"});

    CaseConfig cfg;
    cfg.config_path = path;
    cfg.config_digest = sha256_file(path);

    if (j.contains("options")) {
        const json& o = j.at("options");
        check_keys(o, "options", {"frequency_floor", "sex_marker", "sex_marker_frequencies"});
        cfg.bundle.options.frequency_floor =
            get_or<double>(o, "frequency_floor", cfg.bundle.options.frequency_floor);
        cfg.bundle.options.sex_marker =
            get_or<std::string>(o, "sex_marker", cfg.bundle.options.sex_marker);
        if (o.contains("sex_marker_frequencies")) {
            auto v = require<std::vector<double>>(o, "sex_marker_frequencies", "options");
            if (v.size() != 2)
                throw ValidationError("config: sex_marker_frequencies needs two values");
            cfg.bundle.options.sex_freq_x = v[0];
            cfg.bundle.options.sex_freq_y = v[1];
        }
    }

    std::string freq_rel = require<std::string>(j, "frequencies", "top level");
    std::string freq_path = resolve_path(path, freq_rel);
    cfg.bundle.freqs = load_frequency_table(freq_path);
    cfg.input_files.emplace_back(freq_path, sha256_file(freq_path));

    if (j.contains("traces")) {
        for (const json& t : j.at("traces")) {
            check_keys(t, "traces[]", {"id", "peaks", "threshold"});
            std::string id = require<std::string>(t, "id", "traces[]");
            std::string peaks = resolve_path(path, require<std::string>(t, "peaks", "traces[]"));
            double threshold = require<double>(t, "threshold", "traces[]");
            cfg.bundle.traces.push_back(load_peak_table(peaks, id, threshold));
            cfg.input_files.emplace_back(peaks, sha256_file(peaks));
        }
    }

    if (j.contains("profiles")) {
        const json& ps = j.at("profiles");
        if (!ps.is_object()) throw ValidationError("config: profiles must map names to paths");
        for (auto it = ps.begin(); it != ps.end(); ++it) {
            std::string ppath = resolve_path(path, it.value().get<std::string>());
            cfg.bundle.profiles[it.key()] = load_profile(ppath, it.key());
            cfg.input_files.emplace_back(ppath, sha256_file(ppath));
        }
    }

    for (const json& c : require<json>(j, "contributors", "top level")) {
        check_keys(c, "contributors[]", {"id", "profile"});
        Contributor person;
        person.id = require<std::string>(c, "id", "contributors[]");
        person.profile_id = get_or<std::string>(c, "profile", "");
        cfg.bundle.roster.push_back(person);
    }
    for (const std::string& id : get_or<std::vector<std::string>>(j, "male", {}))
        cfg.bundle.males.insert(id);
    for (const std::string& id : get_or<std::vector<std::string>>(j, "female", {}))
        cfg.bundle.females.insert(id);

    finalize_bundle(cfg.bundle);

    if (j.contains("hypotheses")) {
        for (const json& h : j.at("hypotheses")) {
            check_keys(h, "hypotheses[]", {"name", "target", "kind", "child", "mother", "parent"});
            Hypothesis hy;
            hy.target = require<std::string>(h, "target", "hypotheses[]");
            hy.kind = kind_from_string(require<std::string>(h, "kind", "hypotheses[]"));
            hy.name = get_or<std::string>(h, "name", hy.target);
            hy.child_profile = get_or<std::string>(h, "child", "");
            hy.mother_profile = get_or<std::string>(h, "mother", "");
            hy.parent_profile = get_or<std::string>(h, "parent", "");
            cfg.hypotheses.push_back(std::move(hy));
        }
    }

    if (j.contains("fit")) {
        const json& f = j.at("fit");
        check_keys(f, "fit", {"restarts", "seed"});
        cfg.fit.restarts = get_or<int>(f, "restarts", cfg.fit.restarts);
        if (cfg.fit.restarts < 1) throw ValidationError("config: fit.restarts must be >= 1");
        cfg.fit.seed = get_or<std::uint64_t>(f, "seed", cfg.fit.seed);
    }
    return cfg;
}

Scenario load_scenario_config(const std::string& path) {
    json j = parse_file(path);
    if (!j.is_object()) throw ValidationError("config " + path + ": expected an object");
    check_keys(j, "top level",
               {"frequencies", "threshold", "seed", "contributors", "traces"});

    Scenario sc;
    sc.config_path = path;
    sc.config_digest = sha256_file(path);

    std::string freq_rel = require<std::string>(j, "frequencies", "top level");
    std::string freq_path = resolve_path(path, freq_rel);
    sc.freqs = load_frequency_table(freq_path);
    sc.input_files.emplace_back(freq_path, sha256_file(freq_path));

    sc.threshold = require<double>(j, "threshold", "top level");
    if (!(sc.threshold > 0.0)) throw ValidationError("config: threshold must be > 0");
    sc.seed = get_or<std::uint64_t>(j, "seed", sc.seed);

    std::set<std::string> ids;
    for (const json& c : require<json>(j, "contributors", "top level")) {
        check_keys(c, "contributors[]", {"id", "profile", "child_of", "other_parent"});
        ScenarioContributor person;
        person.id = require<std::string>(c, "id", "contributors[]");
        if (!ids.insert(person.id).second)
            throw ValidationError("config: duplicate contributor id '" + person.id + "'");
        if (c.contains("profile")) {
            std::string ppath = resolve_path(path, c.at("profile").get<std::string>());
            person.profile = load_profile(ppath, person.id);
            person.has_profile = true;
            sc.input_files.emplace_back(ppath, sha256_file(ppath));
        }
        person.child_of = get_or<std::string>(c, "child_of", "");
        person.other_parent = get_or<std::string>(c, "other_parent", "");
        if (person.has_profile && !person.child_of.empty())
            throw ValidationError("config: contributor '" + person.id +
                                  "' cannot be both profiled and child_of");
        if (!person.other_parent.empty() && person.child_of.empty())
            throw ValidationError("config: other_parent requires child_of");
        sc.contributors.push_back(std::move(person));
    }
    if (sc.contributors.empty()) throw ValidationError("config: scenario needs contributors");
    for (std::size_t i = 0; i < sc.contributors.size(); ++i) {
        for (const std::string& ref :
             {sc.contributors[i].child_of, sc.contributors[i].other_parent}) {
            if (ref.empty()) continue;
            bool found = false;
            for (std::size_t k = 0; k < i; ++k) found = found || sc.contributors[k].id == ref;
            if (!found)
                throw ValidationError("config: '" + ref +
                                      "' must be listed before its child");
        }
    }

    for (const json& t : require<json>(j, "traces", "top level")) {
        check_keys(t, "traces[]", {"id", "params"});
        ScenarioTrace tr;
        tr.id = require<std::string>(t, "id", "traces[]");
        tr.params = params_from_json(require<json>(t, "params", "traces[]"), "traces[].params");
        validate_params(tr.params, static_cast<int>(sc.contributors.size()));
        sc.traces.push_back(std::move(tr));
    }
    if (sc.traces.empty()) throw ValidationError("config: scenario needs traces");
    return sc;
}

GenotypeMatrix realize_genotypes(const Scenario& sc, std::uint64_t seed) {
    Rng rng(seed);
    GenotypeMatrix out;
    out.reserve(sc.contributors.size());
    for (const auto& person : sc.contributors) {
        if (person.has_profile) {
            out.push_back(profile_to_indices(sc.freqs, person.profile));
            continue;
        }
        if (!person.child_of.empty()) {
            const std::vector<Genotype>* parent = nullptr;
            const std::vector<Genotype>* other = nullptr;
            for (std::size_t k = 0; k < out.size(); ++k) {
                if (sc.contributors[k].id == person.child_of) parent = &out[k];
                if (!person.other_parent.empty() && sc.contributors[k].id == person.other_parent)
                    other = &out[k];
            }
            if (!parent) throw InternalError("parent genotypes not realized");
            out.push_back(sample_child_indices(sc.freqs, *parent, other, rng));
            continue;
        }
        out.push_back(sample_hw_genotypes(sc.freqs, 1, rng).front());
    }
    return out;
}

}  // namespace mixkin
