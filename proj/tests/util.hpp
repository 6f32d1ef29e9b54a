#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "sphere2b/core.hpp"

namespace testutil {

using namespace sphere2b;

inline constexpr double kPi = std::numbers::pi;

inline Vec3 random_unit(std::mt19937_64& g) {
    std::normal_distribution<double> n(0, 1);
    Vec3 v{n(g), n(g), n(g)};
    const double r = norm(v);
    return {v[0] / r, v[1] / r, v[2] / r};
}

inline Vec3 random_tangent(std::mt19937_64& g, const Vec3& at, double scale) {
    std::normal_distribution<double> n(0, scale);
    Vec3 v{n(g), n(g), n(g)};
    const double d = dot(v, at);
    return {v[0] - d * at[0], v[1] - d * at[1], v[2] - d * at[2]};
}

// Two bodies with separation in [0.3, pi - 0.3] and tangent momenta.
inline FullState random_full_state(std::mt19937_64& g, double momentum_scale = 0.5) {
    FullState f;
    do {
        f.q1 = random_unit(g);
        f.q2 = random_unit(g);
    } while (std::abs(dot(f.q1, f.q2)) > std::cos(0.3));
    f.p1 = random_tangent(g, f.q1, momentum_scale);
    f.p2 = random_tangent(g, f.q2, momentum_scale);
    return f;
}

inline double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
