#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace igbm {

// xoshiro256** engine. All samplers below are hand-written so that a given
// (seed, stream) reproduces the same doubles with any standard library.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on (0, 1).
    double uniform_open();
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    // Gamma(shape, scale); Marsaglia-Tsang with the shape < 1 boost.
    double gamma(double shape, double scale);
    // Fair +1/-1.
    int sign();
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t stream_id);
// FNV-1a of a stream name, used to derive named sub-streams.
std::uint64_t stream_id_of(std::string_view name);

// Immutable (seed, stream_id) pair. Engines are derived from the hash of the
// pair, so distinct ids give statistically independent streams.
class RngStream {
public:
    constexpr RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    Rng engine() const { return Rng(hash_combine(seed_, stream_id_)); }

    // Child stream keyed by name; children of children stay distinct.
    RngStream substream(std::string_view name) const;
    RngStream substream(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
};

}  // namespace igbm
