#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mixkin {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::string& path);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_digest;
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string version;
};

// Comment lines embedded at the top of every output file. Wall-clock time is
// deliberately absent so reruns stay byte-identical; the CLI logs it to
// stderr instead.
std::vector<std::string> manifest_comments(const RunManifest& m);

}  // namespace mixkin
