#include "nipsr/rng.hpp"

#include <cmath>

namespace nipsr {

std::uint64_t SeededRng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SeededRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal(double mean, double stddev) {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * r * std::cos(two_pi * u2);
}

std::size_t SeededRng::uniform_index(std::size_t n) {
    if (n == 0) throw ContractError("uniform_index: n must be positive");
    return static_cast<std::size_t>(next_u64() % n);
}

Tensor rng_normal(SeededRng& rng, int n, int c, int h, int w,
                  double mean, double stddev) {
    if (stddev < 0.0) throw ContractError("rng_normal: stddev must be >= 0");
    Tensor t(n, c, h, w);
    for (double& v : t.data) v = rng.normal(mean, stddev);
    t.check_finite("rng_normal");
    return t;
}

}  // namespace nipsr
