#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pointcat {

// Deterministic named random streams.
//
// Every consumer of randomness derives its own stream from (global seed,
// purpose string, index). Streams are independent of each other and of the
// order in which they are created, which is what makes runs reproducible even
// when code is refactored or parameters are registered in a different order.
class rng_stream {
  public:
    rng_stream(std::uint64_t global_seed, const std::string& purpose, std::uint64_t index = 0);

    // Raw 64 random bits.
    std::uint64_t next_u64();

    // Uniform in [0, 1). Derived from the top 53 bits so the result is
    // identical on every platform (std::uniform_real_distribution is not).
    double uniform();

    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (again, platform-independent).
    double normal();

    double normal(double mean, double stddev);

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    // Fisher-Yates shuffle of [0, n) indices.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

// 64-bit FNV-1a, used to mix (seed, purpose, index) into a stream seed.
std::uint64_t hash64(std::uint64_t seed, const std::string& purpose, std::uint64_t index);

}  // namespace pointcat
