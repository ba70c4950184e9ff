#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace crosscam {

/// Deterministic RNG with named sub-streams. Each sub-stream is an mt19937_64
/// seeded from (master seed, stream name), so toggling one noise source never
/// shifts the draws of another. Distributions are hand-rolled because the
/// standard library leaves their algorithms implementation-defined.
class SplitRng {
public:
    SplitRng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0,1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller (no cached spare).
    double normal();
    double normal(double mu, double sigma);

    /// Knuth's method; fine for the small rates used here.
    int poisson(double lambda);

    /// Gaussian vector normalized to unit length.
    std::vector<double> unit_vector(std::size_t dim);

    /// Deterministic Fisher-Yates (std::shuffle is implementation-defined).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace crosscam
