#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace phasepos::manifest {

/// Provenance record written next to every produced artifact: inputs and
/// outputs by content hash, plus everything needed to reproduce the run
/// byte for byte.
struct RunManifest {
    std::string tool = "phasepos";
    std::string version;
    std::string command;
    std::uint64_t seed = 0;
    std::string scenario_hash;
    std::string kernel_backend;
    unsigned threads = 1;
    std::map<std::string, std::string> inputs;   // path -> fnv1a hex
    std::map<std::string, std::string> outputs;  // path -> fnv1a hex
    std::string timestamp;                       // informational only
};

void add_input(RunManifest& m, const std::string& path);
void add_output(RunManifest& m, const std::string& path);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace phasepos::manifest
