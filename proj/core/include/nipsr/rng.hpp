#ifndef NIPSR_RNG_HPP
#define NIPSR_RNG_HPP

#include <cstdint>
#include <vector>

#include "nipsr/tensor.hpp"

namespace nipsr {

// Deterministic random source: splitmix64 state advance, Box-Muller for
// normal deviates. The same seed yields the same sequence on every run,
// which is what makes checkpoints and sweeps reproducible.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // One normal deviate; consumes exactly two uniform draws.
    double normal(double mean = 0.0, double stddev = 1.0);

    // Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

  private:
    std::uint64_t state_;
};

// Tensor of normal deviates; advances rng. stddev must be >= 0.
Tensor rng_normal(SeededRng& rng, int n, int c, int h, int w,
                  double mean, double stddev);

// In-place Fisher-Yates. std::shuffle is implementation-defined, so the
// permutation is hand-rolled to keep runs reproducible across toolchains.
template <typename T>
void shuffle_in_place(std::vector<T>& v, SeededRng& rng) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const std::size_t j = i + rng.uniform_index(v.size() - i);
        std::swap(v[i], v[j]);
    }
}

}  // namespace nipsr

#endif
