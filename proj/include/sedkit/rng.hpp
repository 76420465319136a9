#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace sedkit {

// Seeded random stream with explicitly defined draw primitives so a test (or
// any other consumer) can reproduce a draw sequence exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n < 1) throw std::invalid_argument("Rng::uniform_int: n must be >= 1");
        const int v = static_cast<int>(uniform() * n);
        return v >= n ? n - 1 : v;
    }

    // Standard normal via Box-Muller. One pair of uniforms per draw.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang gamma sampler, shape alpha > 0, unit scale.
    double gamma(double alpha) {
        if (alpha <= 0.0) throw std::invalid_argument("Rng::gamma: alpha must be > 0");
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double ga = gamma(a);
        const double gb = gamma(b);
        return ga / (ga + gb);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace sedkit
