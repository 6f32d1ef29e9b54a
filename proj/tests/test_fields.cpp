#include <doctest.h>

#include <functional>

#include "sphere2b/fields.hpp"
#include "util.hpp"

using namespace sphere2b;
using testutil::kPi;

namespace {

// Directional derivative of a scalar along a vector field, by central differences.
template <std::size_t N>
double lie_derivative(const std::function<double(const std::array<double, N>&)>& F, const std::array<double, N>& x,
                      const std::array<double, N>& v) {
    const double h = 1e-6;
    std::array<double, N> p = x, m = x;
    for (std::size_t i = 0; i < N; ++i) {
        p[i] += h * v[i];
        m[i] -= h * v[i];
    }
    return (F(p) - F(m)) / (2 * h);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

BlowupChartState random_chart_state(std::mt19937_64& g, Chart c, double r_lo = 0.05, double r_hi = 1.5) {
    std::uniform_real_distribution<double> u(0, 1);
    BlowupChartState s;
    s.chart = c;
    s.m1 = -2 + 4 * u(g);
    s.m2 = -2 + 4 * u(g);
    s.radial = r_lo + (r_hi - r_lo) * u(g);
    s.angle1 = 0.1 + (kPi - 0.2) * u(g);
    s.angle2 = 2 * kPi * u(g);
    return s;
}

}  // namespace

TEST_SUITE("fields") {
    TEST_CASE("polynomial field is the equal-mass field in xi = cot q") {
        std::mt19937_64 g(1);
        std::uniform_real_distribution<double> u(-2, 2);
        for (int k = 0; k < 200; ++k) {
            const ReducedState r{u(g), u(g), u(g), 0.2 + (kPi - 0.4) * (u(g) + 2) / 4, u(g)};
            const Vec5 fr = reduced_rhs_equal_mass(r);
            const Vec5 fp = poly_rhs(to_poly(r));
            const double xi = xi_from_q(r.q);
            CHECK(rel_err(fp[0], fr[0]) < 1e-12);
            CHECK(rel_err(fp[1], fr[1]) < 1e-12);
            CHECK(rel_err(fp[2], fr[2]) < 1e-12);
            CHECK(rel_err(fp[3], -(1 + xi * xi) * fr[3]) < 1e-12);
            CHECK(rel_err(fp[4], fr[4]) < 1e-12);
        }
    }

    TEST_CASE("general-mass field reduces to the equal-mass field") {
        const ReducedState r{0.3, -0.8, 1.1, 1.2, 0.4};
        const Vec5 a = reduced_rhs(r, {1, 1}), b = reduced_rhs_equal_mass(r);
        for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
    }

    TEST_CASE("energy and Casimir are first integrals of the reduced fields") {
        std::mt19937_64 g(2);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        for (const Masses m : {Masses{1, 1}, Masses{1, 2}, Masses{0.4, 1.7}}) {
            std::function<double(const std::array<double, 5>&)> H = [&](const std::array<double, 5>& x) {
                return hamiltonian_reduced({x[0], x[1], x[2], x[3], x[4]}, m);
            };
            std::function<double(const std::array<double, 5>&)> C = [](const std::array<double, 5>& x) {
                return casimir(x[0], x[1], x[2]);
            };
            for (int k = 0; k < 50; ++k) {
                const std::array<double, 5> x{u(g), u(g), u(g), 0.4 + (u(g) + 1.5) / 3 * 2.3, u(g)};
                const Vec5 f = reduced_rhs({x[0], x[1], x[2], x[3], x[4]}, m);
                CHECK(std::abs(lie_derivative<5>(H, x, f)) < 1e-7);
                CHECK(std::abs(lie_derivative<5>(C, x, f)) < 1e-7);
            }
        }
        std::function<double(const std::array<double, 5>&)> Hp = [](const std::array<double, 5>& x) {
            return hamiltonian_poly({x[0], x[1], x[2], x[3], x[4]});
        };
        for (int k = 0; k < 50; ++k) {
            const std::array<double, 5> x{u(g), u(g), u(g), 3 * u(g), u(g)};
            CHECK(std::abs(lie_derivative<5>(Hp, x, poly_rhs({x[0], x[1], x[2], x[3], x[4]}))) < 1e-6);
        }
    }

    TEST_CASE("level-set identity of the polynomial system") {
        const PolyState s{0.7, -0.2, 0.9, 1.8, -0.6};
        const double h = hamiltonian_poly(s), C = casimir(s.m1, s.m2, s.m3);
        CHECK(level_set_lhs(s) == doctest::Approx(2 * h - C).epsilon(1e-13));
    }

    TEST_CASE("full field is tangent and conserves energy") {
        std::mt19937_64 g(3);
        const Masses m{1.3, 0.8};
        for (int k = 0; k < 30; ++k) {
            const FullState f = testutil::random_full_state(g);
            const Vec12 d = full_rhs(f, m);
            const Vec12 y = full_to_array(f);
            // |q_i|' = 0 and (q_i . p_i)' = 0
            CHECK(std::abs(dot(f.q1, {d[0], d[1], d[2]})) < 1e-13);
            CHECK(std::abs(dot({d[0], d[1], d[2]}, f.p1) + dot(f.q1, {d[6], d[7], d[8]})) < 1e-12);
            std::function<double(const std::array<double, 12>&)> H = [&](const std::array<double, 12>& x) {
                return hamiltonian_full(full_from_array(x), m);
            };
            CHECK(std::abs(lie_derivative<12>(H, y, d)) < 1e-7);
        }
    }

    TEST_CASE("reduction intertwines the full and reduced fields") {
        std::mt19937_64 g(4);
        for (const Masses m : {Masses{1, 1}, Masses{1, 2.5}}) {
            for (int k = 0; k < 20; ++k) {
                const FullState f = testutil::random_full_state(g);
                const Vec12 d = full_rhs(f, m);
                const Vec12 y = full_to_array(f);
                const double h = 1e-6;
                Vec12 yp = y, ym = y;
                for (int i = 0; i < 12; ++i) {
                    yp[i] += h * d[i];
                    ym[i] -= h * d[i];
                }
                // Re-project the displaced points onto the constraint manifold.
                auto fix = [](FullState s) {
                    for (Vec3* q : {&s.q1, &s.q2}) {
                        const double n = norm(*q);
                        for (double& c : *q) c /= n;
                    }
                    for (auto [q, p] : {std::pair{&s.q1, &s.p1}, std::pair{&s.q2, &s.p2}}) {
                        const double a = dot(*q, *p);
                        for (int i = 0; i < 3; ++i) (*p)[i] -= a * (*q)[i];
                    }
                    return s;
                };
                const ReducedState rp = reduce_full_state(fix(full_from_array(yp)), m);
                const ReducedState rm = reduce_full_state(fix(full_from_array(ym)), m);
                const ReducedState r0 = reduce_full_state(f, m);
                const Vec5 fr = reduced_rhs(r0, m);
                const double num[5] = {(rp.m1 - rm.m1) / (2 * h), (rp.m2 - rm.m2) / (2 * h), (rp.m3 - rm.m3) / (2 * h),
                                       (rp.q - rm.q) / (2 * h), (rp.p - rm.p) / (2 * h)};
                for (int i = 0; i < 5; ++i) CHECK(rel_err(num[i], fr[i]) < 1e-6);
            }
        }
    }

    TEST_CASE("regularised field is the polynomial field in (eta, zeta) with dt = eta^2 dtau") {
        std::mt19937_64 g(6);
        std::uniform_real_distribution<double> u(-2, 2);
        for (int k = 0; k < 200; ++k) {
            PolyState s{u(g), u(g), u(g), u(g), u(g)};
            if (std::abs(s.xi) < 0.1) s.xi = 0.5;
            const RegState r = to_regularised(s);
            const Vec5 fp = poly_rhs(s);
            const Vec5 fr = regularised_rhs(r);
            const double e2 = r.eta * r.eta;
            const double eta_dot = -fp[3] / (s.xi * s.xi);
            const double zeta_dot = fp[4] / s.xi - s.p * fp[3] / (s.xi * s.xi);
            const double want[5] = {e2 * fp[0], e2 * fp[1], e2 * fp[2], e2 * eta_dot, e2 * zeta_dot};
            for (int i = 0; i < 5; ++i) CHECK(rel_err(fr[i], want[i]) < 1e-11);
        }
        // The literal form differs in the m2 line only.
        const RegState r{0.4, 1.1, -0.7, 0.3, 0.9};
        const Vec5 a = regularised_rhs(r), b = regularised_rhs_literal(r);
        CHECK(a[0] == b[0]);
        CHECK(a[1] != doctest::Approx(b[1]));
        CHECK(a[2] == b[2]);
        CHECK(a[3] == b[3]);
        CHECK(a[4] == b[4]);
    }

    TEST_CASE("invariant-plane systems are the restriction to m = (-sign sqrt C, 0, 0)") {
        for (int sign : {1, -1}) {
            const double C = 9, m1 = -sign * 3.0;
            const double q = 1.1, p = -0.3;
            const Vec2 fq = invariant_plane_rhs_q(q, p, sign, C);
            const Vec5 fr = reduced_rhs_equal_mass({m1, 0, 0, q, p});
            CHECK(fq[0] == doctest::Approx(fr[3]));
            CHECK(fq[1] == doctest::Approx(fr[4]));
            CHECK(fq[0] == doctest::Approx(2 * p + sign * 3.0));
            const double xi = 0.8;
            const Vec2 fx = invariant_plane_rhs_xi(xi, p, sign, C);
            const Vec5 fp = poly_rhs({m1, 0, 0, xi, p});
            CHECK(fx[0] == doctest::Approx(fp[3]));
            CHECK(fx[1] == doctest::Approx(fp[4]));
            const Vec2 fe = invariant_plane_reg_rhs(0.4, 0.2, sign, C);
            const Vec5 fg = regularised_rhs({m1, 0, 0, 0.4, 0.2});
            CHECK(fe[0] == doctest::Approx(fg[3]));
            CHECK(fe[1] == doctest::Approx(fg[4]));
        }
        CHECK_THROWS_AS(invariant_plane_rhs_q(1, 0, 2, 9), Error);
        CHECK_THROWS_AS(invariant_plane_rhs_q(1, 0, 1, -1), Error);
    }

    TEST_CASE("blow-up chart fields agree with chain-rule transport") {
        std::mt19937_64 g(7);
        for (Chart c : {Chart::Chart1, Chart::Chart2}) {
            double worst = 0;
            for (int k = 0; k < 1000; ++k) {
                const BlowupChartState s = random_chart_state(g, c);
                for (bool divided : {false, true}) {
                    const Vec5 a = blowup_chart_rhs(s, divided), b = transported_chart_rhs(s, divided);
                    for (int i = 0; i < 5; ++i) worst = std::max(worst, rel_err(a[i], b[i]));
                }
            }
            CHECK(worst < 1e-9);
        }
        for (int k = 0; k < 200; ++k) {
            std::uniform_real_distribution<double> u(0, 1);
            const double r = 0.05 + u(g), phi = 2 * kPi * u(g);
            const Vec2 a = invariant_plane_blowup_rhs(r, phi, 1, 9), b = transported_invariant_plane_blowup_rhs(r, phi, 1, 9);
            CHECK(rel_err(a[0], b[0]) < 1e-9);
            CHECK(rel_err(a[1], b[1]) < 1e-9);
        }
    }

    TEST_CASE("uncorrected reference fields differ from the corrected ones exactly in the known places") {
        std::mt19937_64 g(8);
        int diff1[5] = {}, diff2[5] = {};
        for (int k = 0; k < 200; ++k) {
            const BlowupChartState s1 = random_chart_state(g, Chart::Chart1);
            const BlowupChartState s2 = random_chart_state(g, Chart::Chart2);
            const Vec5 a1 = blowup_chart_rhs(s1, false), b1 = blowup_chart1_rhs_literal(s1);
            const Vec5 a2 = blowup_chart_rhs(s2, false), b2 = blowup_chart2_rhs_literal(s2);
            for (int i = 0; i < 5; ++i) {
                diff1[i] += rel_err(a1[i], b1[i]) > 1e-9;
                diff2[i] += rel_err(a2[i], b2[i]) > 1e-9;
            }
        }
        // chart 1: m1 line, f3 and f5; chart 2: m1 line.
        CHECK(diff1[0] > 150);
        CHECK(diff1[1] == 0);
        CHECK(diff1[2] > 150);
        CHECK(diff1[3] == 0);
        CHECK(diff1[4] > 150);
        CHECK(diff2[0] > 150);
        for (int i = 1; i < 5; ++i) CHECK(diff2[i] == 0);
    }

    TEST_CASE("divided chart fields at radial 0 match the closed-form divisor fields on a 100x100 grid") {
        double worst1 = 0, worst2 = 0;
        const double m1 = 0.8, m2 = -1.3;
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const double a1 = kPi * (i + 0.5) / 100, a2 = 2 * kPi * j / 100;
                BlowupChartState s{Chart::Chart1, m1, m2, 0.0, a1, a2};
                const Vec5 f = blowup_chart_rhs(s, true);
                const auto d = divisor_field_chart1_literal(m1, m2, a1, a2);
                worst1 = std::max({worst1, std::abs(f[0] - d[0]), std::abs(f[1] - d[1]), std::abs(f[2]),
                                   std::abs(f[3] - d[2]), std::abs(f[4] - d[3])});
                s.chart = Chart::Chart2;
                const Vec5 h = blowup_chart_rhs(s, true);
                const auto e = divisor_field_chart2_literal(m1, m2, a1, a2);
                worst2 = std::max({worst2, std::abs(h[0] - e[0]), std::abs(h[1] - e[1]), std::abs(h[2]),
                                   std::abs(h[3] - e[2]), std::abs(h[4] - e[3])});
            }
        }
        CHECK(worst1 <= 1e-12);
        CHECK(worst2 <= 1e-12);
    }

    TEST_CASE("chart tangent pushforward inverts the transport") {
        std::mt19937_64 g(10);
        for (Chart c : {Chart::Chart1, Chart::Chart2}) {
            const BlowupChartState s = random_chart_state(g, c);
            const Vec5 f = blowup_chart_rhs(s, false);
            const Vec3 v = chart_pushforward(s);
            const Vec5 reg = regularised_rhs({s.m1, s.m2, v[0], v[1], v[2]});
            const Vec3 t = chart_tangent_pushforward(s, f);
            for (int i = 0; i < 3; ++i) CHECK(rel_err(t[i], reg[2 + i]) < 1e-10);
        }
    }
}
