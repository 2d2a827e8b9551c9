#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phasepos::text {

/// Shortest decimal form that round-trips a double exactly ("%.17g" fallback).
std::string format_double(double v);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split_ws(std::string_view line);
std::string trim(std::string_view s);

// FNV-1a, used for scenario/dataset/model fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a_file(const std::string& path);
std::string to_hex(std::uint64_t v);

/// Key/value config file: `key = value` lines, '#' comments, repeated keys
/// collected in order.
struct KvFile {
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    // last occurrence wins for scalars
    std::string get(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;
};

KvFile read_kv_file(const std::string& path);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace phasepos::text
