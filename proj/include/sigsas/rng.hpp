#pragma once

// Seeded random number generation. mt19937_64 is fully specified by the
// standard, and the Gaussian sampler is our own (Marsaglia polar), so a seed
// reproduces the same stream on any conforming implementation. Never use
// std::normal_distribution here: its algorithm is implementation-defined.

#include <cstdint>
#include <random>

namespace sigsas {

/// splitmix64 mix, used to derive independent per-trial seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix_seed(base ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    int rademacher() { return (eng_() & 1u) ? 1 : -1; }

    /// Standard normal via the Marsaglia polar method.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    void fill_gaussian(double* dst, std::size_t n, double sigma) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = sigma * gaussian();
    }

    void fill_uniform(double* dst, std::size_t n, double a, double b) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = uniform(a, b);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sigsas
