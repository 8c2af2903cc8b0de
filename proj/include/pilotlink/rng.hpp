// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <utility>

namespace pl::rng {

// Counter-based generator: every consumer derives its own key from
// (seed, index...) so draw order never depends on scheduling.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used to turn purpose strings into key components.
constexpr std::uint64_t label(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) h = (h ^ static_cast<std::uint64_t>(*s)) * 0x100000001b3ULL;
    return h;
}

constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> idx) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t i : idx) h = splitmix64(h ^ splitmix64(i));
    return h;
}

class Stream {
public:
    explicit Stream(std::uint64_t key) : s_(key) {}

    std::uint64_t next_u64() {
        s_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * next_unit(); }

    // Box-Muller; both marginals exactly N(0,1).
    std::pair<double, double> next_normal_pair() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0,1]
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * M_PI * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    double next_normal() {
        auto [a, b] = next_normal_pair();
        (void)b;
        return a;
    }

    // CN(0, var): independent real/imag parts, each N(0, var/2).
    std::complex<double> next_cnormal(double var) {
        auto [a, b] = next_normal_pair();
        double s = std::sqrt(var / 2.0);
        return {s * a, s * b};
    }

private:
    std::uint64_t s_;
};

} // namespace pl::rng
