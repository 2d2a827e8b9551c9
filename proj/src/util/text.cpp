#include "util/text.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phasepos::text {

std::string format_double(double v) {
    char buf[40];
    // try shortest precision that round-trips
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str() || (end && *end != '\0'))
        throw std::invalid_argument("not a number: '" + tmp + "'");
    return v;
}

long long parse_int(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    long long v = std::strtoll(tmp.c_str(), &end, 10);
    if (end == tmp.c_str() || (end && *end != '\0'))
        throw std::invalid_argument("not an integer: '" + tmp + "'");
    return v;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream iss{std::string(line)};
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a(buf, static_cast<std::size_t>(got), h);
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool KvFile::has(const std::string& key) const {
    for (const auto& [k, _] : entries)
        if (k == key) return true;
    return false;
}

std::string KvFile::get(const std::string& key, const std::string& fallback) const {
    std::string out = fallback;
    for (const auto& [k, v] : entries)
        if (k == key) out = v;
    return out;
}

std::vector<std::string> KvFile::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
        if (k == key) out.push_back(v);
    return out;
}

KvFile read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    KvFile kv;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        kv.entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace phasepos::text
