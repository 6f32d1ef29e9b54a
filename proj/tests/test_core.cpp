#include <doctest.h>

#include "sphere2b/core.hpp"
#include "sphere2b/fields.hpp"
#include "util.hpp"

using namespace sphere2b;
using testutil::kPi;

TEST_SUITE("core") {
    TEST_CASE("xi and q are inverse on (0, pi)") {
        CHECK(xi_from_q(kPi / 4) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(xi_from_q(kPi / 2) == doctest::Approx(0.0).epsilon(1e-15));
        for (double q = 0.01; q < kPi; q += 0.07) CHECK(q_from_xi(xi_from_q(q)) == doctest::Approx(q).epsilon(1e-13));
        CHECK_THROWS_AS(xi_from_q(0.0), Error);
        CHECK_THROWS_AS(xi_from_q(kPi), Error);
    }

    TEST_CASE("regularised coordinates round-trip") {
        const PolyState s{0.3, -1.2, 0.7, 2.5, -0.4};
        const RegState r = to_regularised(s);
        CHECK(r.eta == doctest::Approx(0.4));
        CHECK(r.zeta == doctest::Approx(-0.16));
        const PolyState b = to_poly(r);
        CHECK(b.xi == doctest::Approx(s.xi));
        CHECK(b.p == doctest::Approx(s.p));
        CHECK_THROWS_AS(to_regularised(PolyState{0, 0, 0, 0, 1}), Error);
    }

    TEST_CASE("chart pushforward and pullback are inverse") {
        std::mt19937_64 g(11);
        std::uniform_real_distribution<double> u(0, 1);
        for (Chart c : {Chart::Chart1, Chart::Chart2}) {
            for (int k = 0; k < 500; ++k) {
                BlowupChartState s;
                s.chart = c;
                s.m1 = u(g);
                s.m2 = -u(g);
                s.radial = 0.01 + 3 * u(g);
                s.angle1 = 0.05 + (kPi - 0.1) * u(g);
                s.angle2 = 2 * kPi * u(g);
                const Vec3 v = chart_pushforward(s);
                CHECK(weighted_radius(v) == doctest::Approx(s.radial).epsilon(1e-12));
                const BlowupChartState b = chart_pullback(c, s.m1, s.m2, v);
                CHECK(b.radial == doctest::Approx(s.radial).epsilon(1e-12));
                CHECK(b.angle1 == doctest::Approx(s.angle1).epsilon(1e-9));
                CHECK(std::abs(std::remainder(b.angle2 - s.angle2, 2 * kPi)) < 1e-9);
            }
        }
        // Invariant plane: (0, r^2 sin phi, r cos phi).
        BlowupChartState ip;
        ip.chart = Chart::InvariantPlane;
        ip.radial = 0.7;
        ip.angle1 = 2.1;
        const auto back = chart_pullback(Chart::InvariantPlane, 0, 0, chart_pushforward(ip));
        CHECK(back.radial == doctest::Approx(0.7));
        CHECK(back.angle1 == doctest::Approx(2.1));
    }

    TEST_CASE("reduction preserves energy and the Casimir") {
        std::mt19937_64 g(5);
        for (const Masses m : {Masses{1, 1}, Masses{1, 3}, Masses{2.5, 0.7}}) {
            for (int k = 0; k < 50; ++k) {
                const FullState f = testutil::random_full_state(g);
                const ReducedState r = reduce_full_state(f, m);
                const Vec3 L = angular_momentum(f);
                CHECK(casimir(r.m1, r.m2, r.m3) == doctest::Approx(dot(L, L)).epsilon(1e-12));
                CHECK(hamiltonian_reduced(r, m) == doctest::Approx(hamiltonian_full(f, m)).epsilon(1e-11));
                CHECK(r.q == doctest::Approx(std::acos(dot(f.q1, f.q2))));
            }
        }
    }

    TEST_CASE("body frame is orthonormal and right-handed") {
        std::mt19937_64 g(9);
        const FullState f = testutil::random_full_state(g);
        const auto e = body_frame(f);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(dot(e[i], e[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
        const Vec3 c = cross(e[0], e[1]);
        CHECK(dot(c, e[2]) == doctest::Approx(1.0));
        // e3 = -q1 and q2 lies in the (e2, e3) plane.
        CHECK(dot(e[2], f.q1) == doctest::Approx(-1.0));
        CHECK(std::abs(dot(e[0], f.q2)) < 1e-14);
    }

    TEST_CASE("frame angles recover the direction of m") {
        const Vec3 m{1.0, 2.0, -0.5};
        const double L = norm(m);
        const FrameAngles a = frame_angles_from_m(m, L);
        CHECK(std::sin(a.theta) * std::sin(a.phi) * L == doctest::Approx(1.0));
        CHECK(std::sin(a.theta) * std::cos(a.phi) * L == doctest::Approx(2.0));
        CHECK(std::cos(a.theta) * L == doctest::Approx(-0.5));
        CHECK_THROWS_AS(frame_angles_from_m(m, 2 * L), Error);
    }

    TEST_CASE("invalid states are rejected with the violated invariant") {
        CHECK_THROWS_WITH_AS(validate(ReducedState{1, 0, 0.5, 3.5, 0}), "q must lie in (0, pi)", Error);
        FullState f;
        f.q1 = {1, 0, 0};
        f.q2 = {0, 1, 0};
        f.p1 = {0.1, 0, 0};
        CHECK_THROWS_WITH_AS(validate(f), "momenta must be tangent to the sphere", Error);
        f.p1 = {0, 0, 0};
        f.q2 = {1, 0, 0};
        CHECK_THROWS_AS(validate(f), Error);
    }
}
