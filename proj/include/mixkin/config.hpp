#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixkin/estimation.hpp"
#include "mixkin/evidence.hpp"
#include "mixkin/kinship.hpp"
#include "mixkin/peak_model.hpp"
#include "mixkin/simulator.hpp"

namespace mixkin {

// Relative paths inside a config resolve against the config file's directory.
std::string resolve_path(const std::string& config_path, const std::string& rel);

struct CaseConfig {
    CaseBundle bundle;  // finalized: sex marker injected, rare alleles added
    std::vector<Hypothesis> hypotheses;
    FitOptions fit;
    std::vector<std::pair<std::string, std::string>> input_files;  // (path, digest)
    std::string config_path;
    std::string config_digest;
};

CaseConfig load_case_config(const std::string& path);

struct ScenarioContributor {
    std::string id;
    bool has_profile = false;
    GenotypeProfile profile;  // fixed truth when given
    std::string child_of;     // id of an earlier contributor
    std::string other_parent;  // optional second parent id
};

struct ScenarioTrace {
    std::string id;
    ModelParams params;
};

struct Scenario {
    FrequencyTable freqs;
    std::vector<ScenarioContributor> contributors;
    std::vector<ScenarioTrace> traces;
    double threshold = 50.0;
    std::uint64_t seed = 1;
    std::vector<std::pair<std::string, std::string>> input_files;
    std::string config_path;
    std::string config_digest;
};

Scenario load_scenario_config(const std::string& path);

// True genotypes for one replicate: profiles fixed, unknowns Hardy-Weinberg,
// children by Mendelian draws from already-realized parents.
GenotypeMatrix realize_genotypes(const Scenario& sc, std::uint64_t seed);

}  // namespace mixkin
