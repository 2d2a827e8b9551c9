#pragma once

#include <cstdint>
#include <string_view>

namespace phasepos::rng {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream: the whole sequence is a pure function of
/// (seed, stream). Streams derived from distinct ids are independent, so
/// parallel workers can draw without coordination and the output is
/// order-independent.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// uniform in [0, 1)
    double uniform();
    /// uniform in [lo, hi)
    double uniform(double lo, double hi);
    /// standard normal via Box-Muller; consumes exactly two uniforms
    double normal();
    double normal(double mean, double stddev);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stable stream id from a label, for named sub-streams.
std::uint64_t stream_id(std::string_view label, std::uint64_t index = 0);

}  // namespace phasepos::rng
