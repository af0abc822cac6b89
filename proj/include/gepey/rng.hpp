#pragma once

#include <cstdint>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

// xoshiro256++ seeded through splitmix64, with explicit Box-Muller gaussians.
// Hand-rolled instead of <random> so that a seed reproduces the same stream
// bit-for-bit on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double uniform();
    // Standard normal via Box-Muller; pairs are cached.
    double gaussian();
    // Uniform in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n);

    void shuffle(std::vector<std::size_t>& v);

    Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale = 1.0);
    std::vector<double> gaussian_vector(std::size_t n, double scale = 1.0);

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gepey
