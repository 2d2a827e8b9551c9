#include "util/rng.hpp"

#include <cmath>

namespace phasepos::rng {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(splitmix64(seed ^ splitmix64(stream_id))) {}

std::uint64_t Stream::next_u64() {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
}

double Stream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Stream::normal() {
    // Box-Muller, cosine branch only: fixed draw count per call.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Stream::normal(double mean, double stddev) { return mean + stddev * normal(); }

std::uint64_t stream_id(std::string_view label, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return splitmix64(h ^ (0x9e3779b97f4a7c15ull * index));
}

}  // namespace phasepos::rng
