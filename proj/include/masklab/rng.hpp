#pragma once

#include <cstdint>

namespace masklab {

// Counter-based pseudorandom stream: every output is a pure function of
// (seed, stream_id, counter), so any draw can be replayed from its
// coordinates and masks can be regenerated instead of stored.
//
// Streams are single-owner. To use randomness on another thread (or to key
// randomness off an external id such as a sample id), derive an independent
// stream via split() or keyed().
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0,
                       std::uint64_t counter = 0)
        : seed_(seed), stream_id_(stream_id), counter_(counter) {}

    // Independent child stream keyed off this stream's current position.
    // Consumes one counter slot of the parent.
    RngStream split();

    // Independent stream for (seed, key), e.g. key = sample id.
    static RngStream keyed(std::uint64_t seed, std::uint64_t key);

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1); one counter per draw.
    double next_uniform();

    // Inverse-CDF normal draw; one counter per draw.
    double next_normal(double mean, double stddev);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
};

// Standard normal quantile, accurate to ~1 ulp after Halley refinement.
// Exposed for tests and for anything that needs deterministic normals from
// uniforms.
double inverse_normal_cdf(double p);

// 64-bit mixing function used to derive stream ids and hash run keys.
std::uint64_t mix64(std::uint64_t x);

} // namespace masklab
