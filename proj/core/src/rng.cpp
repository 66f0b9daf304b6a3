#include "pointcat/rng.hpp"

#include <cmath>

#include "pointcat/errors.hpp"

namespace pointcat {

std::uint64_t hash64(std::uint64_t seed, const std::string& purpose, std::uint64_t index) {
    // FNV-1a over the seed bytes, the purpose string, and the index bytes.
    std::uint64_t h = 14695981039346656037ull;
    auto mix_byte = [&h](std::uint8_t b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(seed >> (8 * i)));
    for (unsigned char c : purpose) mix_byte(c);
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(index >> (8 * i)));
    return h;
}

rng_stream::rng_stream(std::uint64_t global_seed, const std::string& purpose, std::uint64_t index)
    : engine_(hash64(global_seed, purpose, index)) {}

std::uint64_t rng_stream::next_u64() {
    return engine_();
}

double rng_stream::uniform() {
    // 53 significant bits -> exactly representable double in [0, 1).
    return std::ldexp(static_cast<double>(next_u64() >> 11), -53);
}

double rng_stream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double rng_stream::normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    // Box-Muller; reject u1 == 0 to keep log() finite.
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(a);
    have_spare_normal_ = true;
    return r * std::cos(a);
}

double rng_stream::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::uint64_t rng_stream::uniform_index(std::uint64_t n) {
    if (n == 0) throw contract_error("uniform_index: n must be > 0");
    // Rejection sampling to avoid modulo bias.
    std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t x = 0;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

}  // namespace pointcat
