#include "manifest.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

#include "util/text.hpp"

namespace phasepos::manifest {

using nlohmann::json;

void add_input(RunManifest& m, const std::string& path) {
    m.inputs[path] = text::to_hex(text::fnv1a_file(path));
}

void add_output(RunManifest& m, const std::string& path) {
    m.outputs[path] = text::to_hex(text::fnv1a_file(path));
}

void write_manifest(const RunManifest& m, const std::string& path) {
    json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["scenario_hash"] = m.scenario_hash;
    j["kernel_backend"] = m.kernel_backend;
    j["threads"] = m.threads;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["timestamp"] = m.timestamp;
    text::write_file(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
    json j = json::parse(text::read_file(path));
    RunManifest m;
    m.tool = j.value("tool", "");
    m.version = j.value("version", "");
    m.command = j.value("command", "");
    m.seed = j.value("seed", 0ull);
    m.scenario_hash = j.value("scenario_hash", "");
    m.kernel_backend = j.value("kernel_backend", "");
    m.threads = j.value("threads", 1u);
    if (j.contains("inputs"))
        m.inputs = j["inputs"].get<std::map<std::string, std::string>>();
    if (j.contains("outputs"))
        m.outputs = j["outputs"].get<std::map<std::string, std::string>>();
    m.timestamp = j.value("timestamp", "");
    return m;
}

}  // namespace phasepos::manifest
