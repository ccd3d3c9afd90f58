#include "mixkin/rng.hpp"

#include <cmath>

#include "mixkin/errors.hpp"

namespace mixkin {

double Rng::normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

double Rng::gamma(double shape, double scale) {
    if (shape < 0.0 || scale <= 0.0) throw InternalError("gamma draw with invalid parameters");
    if (shape == 0.0) return 0.0;
    if (shape < 1.0) {
        double u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

int Rng::categorical(const double* w, int n) {
    if (n <= 0) throw InternalError("categorical draw over an empty set");
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    if (!(total > 0.0)) throw InternalError("categorical draw with no mass");
    double u = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    return n - 1;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mixkin
