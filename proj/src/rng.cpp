#include "igbm/rng.hpp"

#include <cmath>

namespace igbm {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t state = seed ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t h = splitmix64(state);
    state = h ^ (stream_id * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    splitmix64(state);
    return splitmix64(state);
}

std::uint64_t stream_id_of(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream RngStream::substream(std::string_view name) const {
    return RngStream(seed_, hash_combine(stream_id_, stream_id_of(name)));
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(seed_, hash_combine(stream_id_ ^ 0x5851f42d4c957f2dULL, index));
}

Rng::Rng(std::uint64_t key) {
    std::uint64_t state = key;
    for (auto& w : s_) w = splitmix64(state);
}

Rng::result_type Rng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method: only sqrt and log, no trig.
    double x, y, r2;
    do {
        x = 2.0 * uniform() - 1.0;
        y = 2.0 * uniform() - 1.0;
        r2 = x * x + y * y;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = y * f;
    has_spare_ = true;
    return x * f;
}

double Rng::gamma(double shape, double scale) {
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0, 1.0);
        return scale * g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

int Rng::sign() { return ((*this)() >> 63) ? 1 : -1; }

}  // namespace igbm
