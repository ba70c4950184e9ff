#include "crosscam/rng.hpp"

#include <cmath>
#include <numbers>

namespace crosscam {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

SplitRng::SplitRng(std::uint64_t seed, std::string_view stream)
    : engine_(splitmix64(seed ^ fnv1a(stream))) {}

double SplitRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t SplitRng::uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SplitRng::normal() {
    double u1;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SplitRng::normal(double mu, double sigma) { return mu + sigma * normal(); }

int SplitRng::poisson(double lambda) {
    if (lambda <= 0) return 0;
    const double l = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform01();
    } while (p > l);
    return k - 1;
}

std::vector<double> SplitRng::unit_vector(std::size_t dim) {
    std::vector<double> v(dim);
    double norm2 = 0;
    do {
        norm2 = 0;
        for (auto& e : v) {
            e = normal();
            norm2 += e * e;
        }
    } while (norm2 < 1e-24);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : v) e *= inv;
    return v;
}

}  // namespace crosscam
