#include "sphere2b/fields.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace sphere2b {

namespace {

double signed_root(int sign, double C) {
    if (sign != 1 && sign != -1) throw Error(ErrorKind::Domain, "sign must be +1 or -1");
    if (C < 0) throw Error(ErrorKind::Domain, "C must be non-negative");
    return sign * std::sqrt(C);
}

void require_q(double q) {
    if (!(q > 0 && q < std::numbers::pi)) throw Error(ErrorKind::Domain, "q must lie in (0, pi)");
}

// Gaussian elimination with partial pivoting.
Vec3 solve3(std::array<std::array<double, 3>, 3> A, Vec3 b) {
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (A[piv][c] == 0) throw Error(ErrorKind::CoordinateSingularity, "singular chart Jacobian");
        std::swap(A[piv], A[c]);
        std::swap(b[piv], b[c]);
        for (int r = c + 1; r < 3; ++r) {
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    Vec3 x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 3; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace

Vec12 full_to_array(const FullState& s) {
    Vec12 y{};
    for (int i = 0; i < 3; ++i) {
        y[i] = s.q1[i];
        y[3 + i] = s.q2[i];
        y[6 + i] = s.p1[i];
        y[9 + i] = s.p2[i];
    }
    return y;
}

FullState full_from_array(const Vec12& y) {
    FullState s;
    for (int i = 0; i < 3; ++i) {
        s.q1[i] = y[i];
        s.q2[i] = y[3 + i];
        s.p1[i] = y[6 + i];
        s.p2[i] = y[9 + i];
    }
    return s;
}

Vec12 full_rhs(const FullState& s, const Masses& m) {
    const double c = dot(s.q1, s.q2);
    const double s2 = 1 - c * c;
    if (s2 <= 0) throw Error(ErrorKind::DegenerateConfiguration, "bodies are collinear with the centre");
    const double k = m.mu1 * m.mu2 / (s2 * std::sqrt(s2));
    const double kin1 = dot(s.p1, s.p1) / m.mu1;
    const double kin2 = dot(s.p2, s.p2) / m.mu2;
    Vec12 d{};
    for (int i = 0; i < 3; ++i) {
        d[i] = s.p1[i] / m.mu1;
        d[3 + i] = s.p2[i] / m.mu2;
        d[6 + i] = k * (s.q2[i] - c * s.q1[i]) - kin1 * s.q1[i];
        d[9 + i] = k * (s.q1[i] - c * s.q2[i]) - kin2 * s.q2[i];
    }
    return d;
}

double hamiltonian_full(const FullState& s, const Masses& m) {
    const double c = dot(s.q1, s.q2);
    const double sn = std::sqrt(std::max(0.0, 1 - c * c));
    return dot(s.p1, s.p1) / (2 * m.mu1) + dot(s.p2, s.p2) / (2 * m.mu2) - m.mu1 * m.mu2 * c / sn;
}

Vec5 reduced_rhs(const ReducedState& s, const Masses& mm) {
    require_q(s.q);
    const double mu1 = mm.mu1, mu2 = mm.mu2;
    const double ct = std::cos(s.q) / std::sin(s.q);
    const double cs2 = 1.0 / (std::sin(s.q) * std::sin(s.q));
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, p = s.p;
    const double inv = 1.0 / (mu1 * mu2);
    return {
        inv * (-m2 * m3 * mu2 + mu2 * ct * (-m2 * m2 + m3 * m3 + m2 * m3 * ct) + m2 * m3 * mu1 * cs2),
        inv * (m3 * (2 * m1 - p) * mu2 + m1 * m2 * mu2 * ct - m1 * m3 * (mu1 + mu2) * cs2),
        (m2 * p - m1 * m3 * ct) / mu1,
        inv * (-m1 * mu2 + p * (mu1 + mu2)),
        inv * ((-mu2 * (m2 * m3 + mu1 * mu1 * mu2) + m3 * m3 * (mu1 + mu2) * ct) * cs2),
    };
}

Vec5 reduced_rhs_equal_mass(const ReducedState& s) {
    require_q(s.q);
    const double ct = std::cos(s.q) / std::sin(s.q);
    const double cs2 = 1.0 / (std::sin(s.q) * std::sin(s.q));
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, p = s.p;
    return {
        ct * (-m2 * m2 + m3 * m3 + 2 * m2 * m3 * ct),
        m1 * m2 * ct - m3 * (-2 * m1 + p + 2 * m1 * cs2),
        m2 * p - m1 * m3 * ct,
        2 * p - m1,
        -cs2 * (1 + m2 * m3 - 2 * m3 * m3 * ct),
    };
}

double hamiltonian_reduced(const ReducedState& s, const Masses& mm) {
    require_q(s.q);
    const double mu1 = mm.mu1, mu2 = mm.mu2;
    const double ct = std::cos(s.q) / std::sin(s.q);
    const double cs2 = 1.0 / (std::sin(s.q) * std::sin(s.q));
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, p = s.p;
    const double a = mu2 * ((m1 - p) * (m1 - p) + m2 * m2) +
                     m3 * (-2 * mu2 * m2 * ct + mu1 * m3 * cs2 + mu2 * m3 * ct * ct);
    return a / (2 * mu1 * mu2) + p * p / (2 * mu2) - mu1 * mu2 * ct;
}

Vec5 poly_rhs(const PolyState& s) {
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, x = s.xi, p = s.p;
    const double w = x * x + 1;
    return {
        x * (-m2 * m2 + m3 * m3 + 2 * m2 * m3 * x),
        m1 * m2 * x - m3 * p - 2 * m1 * m3 * x * x,
        m2 * p - m1 * m3 * x,
        -w * (2 * p - m1),
        -w * (1 + m2 * m3 - 2 * m3 * m3 * x),
    };
}

double hamiltonian_poly(const PolyState& s) {
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, x = s.xi, p = s.p;
    return 0.5 * (m1 * m1 + m2 * m2 - 2 * m1 * p + 2 * p * p + x * (-2 - 2 * m2 * m3 + m3 * m3 * x) +
                  m3 * m3 * (1 + x * x));
}

double hamiltonian_poly_scale(const PolyState& s) {
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, x = s.xi, p = s.p;
    return 0.5 * (m1 * m1 + m2 * m2 + 2 * std::abs(m1 * p) + 2 * p * p + 2 * std::abs(x) +
                  2 * std::abs(x * m2 * m3) + 2 * m3 * m3 * x * x + m3 * m3);
}

double casimir(double m1, double m2, double m3) { return m1 * m1 + m2 * m2 + m3 * m3; }

double level_set_lhs(const PolyState& s) {
    return 2 * s.p * s.p - 2 * s.m1 * s.p + 2 * s.m3 * s.m3 * s.xi * s.xi - 2 * s.xi * (1 + s.m2 * s.m3);
}

Vec2 invariant_plane_rhs_q(double q, double p, int sign, double C) {
    require_q(q);
    const double k = signed_root(sign, C);
    const double sn = std::sin(q);
    return {2 * p + k, -1.0 / (sn * sn)};
}

Vec2 invariant_plane_rhs_xi(double xi, double p, int sign, double C) {
    const double k = signed_root(sign, C);
    const double w = xi * xi + 1;
    return {-(2 * p + k) * w, -w};
}

Vec5 regularised_rhs(const RegState& s) {
    const double m1 = s.m1, m2 = s.m2, m3 = s.m3, e = s.eta, z = s.zeta;
    const double w = e * e + 1;
    return {
        (m3 * m3 - m2 * m2) * e + 2 * m2 * m3,
        m1 * m2 * e - m3 * z * e - 2 * m1 * m3,
        e * (m2 * z - m1 * m3),
        w * e * (2 * z - m1 * e),
        w * (2 * m3 * m3 - (1 + m2 * m3) * e + 2 * z * z - m1 * e * z),
    };
}

Vec5 regularised_rhs_literal(const RegState& s) {
    Vec5 d = regularised_rhs(s);
    d[1] = s.m1 * s.m2 * s.eta - s.m3 * s.zeta * s.eta - 2 * s.m2 * s.m3;
    return d;
}

Vec2 invariant_plane_reg_rhs(double eta, double zeta, int sign, double C) {
    const double k = signed_root(sign, C);
    const double w = eta * eta + 1;
    return {eta * (2 * zeta + k * eta) * w, w * (2 * zeta * zeta + k * eta * zeta - eta)};
}

namespace {

struct Trig {
    double s1, c1, s2, c2;
};

Trig trig(const BlowupChartState& s) {
    return {std::sin(s.angle1), std::cos(s.angle1), std::sin(s.angle2), std::cos(s.angle2)};
}

// Each component is r * X; these return X.
Vec5 chart1_reduced(const BlowupChartState& st) {
    const auto [s1, c1, s2, c2] = trig(st);
    if (std::abs(s1) < 1e-14)
        throw Error(ErrorKind::CoordinateSingularity, "chart 1 q2-component is singular at sin(q1) = 0");
    const double r = st.radial, m1 = st.m1, m2 = st.m2;
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2;
    const double c1s = c1 * c1, c2s = c2 * c2, c2c = c2s * c2;
    const double s1s = s1 * s1;
    const double D = 1 + s1s * c2s;
    Vec5 x{};
    x[0] = (r3 * c1s - m2 * m2 * r) * c2 * s1 + 2 * c1 * m2;
    x[1] = s2 * c1s * c1 * c2 * r3 - (r3 * c2 * s2 + 2 * m1) * c1 + s1 * c2 * m1 * m2 * r;
    x[2] = r * s1 / (-1 + (c1s - 1) * c2s) *
           (s1s * s1 * r4 * c2c * ((m2 * r * c1 + 1) * s2 + r * m1 * s1) - 2 * r4 * s1s * s2 * c2s +
            (m1 * r + s1 * s2) * c2 - 2 * s2);
    x[3] = -1 / D *
           ((m2 * r4 * s1 * s2 * c1s - m1 * r4 * c1s * c1 + (m1 * (r4 - 1) + r3 * s1 * s2) * c1 + m2 * s2 * s1) *
                r * s1s * c2c -
            2 * r4 * c1 * s1s * s2 * c2s + s1 * s2 * (m2 * r + c1) * c2 - 2 * s2 * c1);
    const double s1_6 = s1s * s1s * s1s;
    x[4] = c2 / (D * s1) *
           (2 - 2 * r4 * s1_6 * c2s * c2s +
            (m1 * r4 * c1s * c1s * s2 - m2 * r4 * s1 * c1s * c1 + (-2 * m1 * r4 * s2 - r3 * s1) * c1s +
             (2 * r4 + 1) * s1 * m2 * c1 + r3 * (m1 * r * s2 + 2 * s1)) *
                (c1 + 1) * r * (c1 - 1) * c2c +
            (-2 * c1s * c1s + (-2 * r4 + 4) * c1s + 2 * r4 - 2) * c2s +
            ((m1 * r * s2 + s1) * c1s - m2 * r * s1 * c1 - m1 * r * s2 - 2 * s1) * c2);
    return x;
}

Vec5 chart2_reduced(const BlowupChartState& st) {
    const auto [s1, c1, s2, c2] = trig(st);
    const double R = st.radial, m1 = st.m1, m2 = st.m2;
    const double R2 = R * R, R3 = R2 * R, R4 = R2 * R2, R5 = R4 * R;
    const double c1s = c1 * c1, c2s = c2 * c2, c2c = c2s * c2;
    const double s1s = s1 * s1, s1_4 = s1s * s1s;
    const double D = 1 + s1s * c2s;
    Vec5 x{};
    x[0] = s1 * (-R3 * s1s * c2c - R * (R2 * c1s + m2 * m2 - R2) * c2 + 2 * m2 * s2);
    x[1] = -(2 * s2 * m1 + R * (R2 * s1 * s2 * c1 - m1 * m2) * c2) * s1;
    x[2] = -R / D *
           (m1 * R5 * s1 * s1_4 * c2s * c2c +
            R4 * c1 * s1s * (-m2 * R * c1s * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2c +
            (2 * R4 * c1s * c1 - 2 * R4 * c1) * c2s + s1 * (m1 * R + c1) * c2 - 2 * c1);
    x[3] = -s1 / D *
           (2 - 2 * R4 * s1_4 * c2c * c2c - R4 * s1s * (m2 * R * s1s * s2 + s1) * c2s * c2c +
            (2 * c1s - 2) * c2s * c2s +
            (R4 * c1s - R4 - 1) * (-m2 * R * c1s * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2c +
            2 * R4 * s1s * c2s + (-m2 * R * s2 - s1) * c2);
    x[4] = c2s / D *
           (m2 * R5 * c1 * s1_4 * c2s * c2s - 2 * R4 * c1 * s2 * s1_4 * c2c -
            R * s1s * c2s *
                (-m2 * R4 * c1s * c1 + m1 * R4 * c1s * s1 * s2 + (m2 * R4 + R3 * s1 * s2 - m2) * c1 -
                 m1 * R4 * s1 * s2) +
            (2 * c1s * c1 * s2 - 2 * c1 * s2) * c2 + (m2 * R - s1 * s2) * c1 - s1 * s2 * m1 * R);
    return x;
}

Vec5 scale_unless_divided(Vec5 x, double r, bool divided) {
    if (!divided)
        for (double& v : x) v *= r;
    return x;
}

void require_chart(const BlowupChartState& s, Chart c) {
    if (s.chart != c) throw Error(ErrorKind::Domain, std::string("state is not in ") + chart_name(c));
    if (s.radial < 0) throw Error(ErrorKind::Domain, "radial coordinate must be non-negative");
}

}  // namespace

Vec5 blowup_chart1_rhs(const BlowupChartState& s, bool divided) {
    require_chart(s, Chart::Chart1);
    return scale_unless_divided(chart1_reduced(s), s.radial, divided);
}

Vec5 blowup_chart2_rhs(const BlowupChartState& s, bool divided) {
    require_chart(s, Chart::Chart2);
    return scale_unless_divided(chart2_reduced(s), s.radial, divided);
}

Vec5 blowup_chart_rhs(const BlowupChartState& s, bool divided) {
    switch (s.chart) {
        case Chart::Chart1: return blowup_chart1_rhs(s, divided);
        case Chart::Chart2: return blowup_chart2_rhs(s, divided);
        default: throw Error(ErrorKind::Domain, "invariant-plane states have a two-dimensional field");
    }
}

Vec5 blowup_chart1_rhs_literal(const BlowupChartState& st) {
    require_chart(st, Chart::Chart1);
    const auto [s1, c1, s2, c2] = trig(st);
    const double r = st.radial, m1 = st.m1, m2 = st.m2;
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r8 = r4 * r4;
    const double c1s = c1 * c1, c2s = c2 * c2, c2c = c2s * c2;
    const double s1s = s1 * s1;
    const double D = 1 + s1s * c2s;
    Vec5 d{};
    d[0] = ((r3 * c1s + m2 * m2 * r) * c2 * s1 + 2 * c1 * m2) * r;
    d[1] = r * (s2 * c1s * c1 * c2 * r3 - (r3 * c2 * s2 + 2 * m1) * c1 + s1 * c2 * m1 * m2 * r);
    d[2] = 1 / (-1 + (c1s - 1) * c2s) *
           (r2 * s1 *
            (s1s * s1 * r4 * c2c * ((m2 * r * c1 + 1) * s2 + r * m1 * s1) + 4 * r8 * s1s * s1s * s2 * c2s +
             (m1 * r + s1 * s2) * c2 - 2 * s2));
    d[3] = -r / D *
           ((m2 * r4 * s1 * s2 * c1s - m1 * r4 * c1s * c1 + (m1 * (r4 - 1) + r3 * s1 * s2) * c1 + m2 * s2 * s1) *
                r * s1s * c2c -
            2 * r4 * c1 * s1s * s2 * c2s + s1 * s2 * (m2 * r + c1) * c2 - 2 * s2 * c1);
    const double s1_6 = s1s * s1s * s1s;
    d[4] = c2 * r / D *
           (2 - 2 * r4 * s1_6 * c2s * c2s +
            (m1 * r4 * c1s * c1s * s2 - m2 * r4 * s1 * c1s * c1 + (-2 * m1 * r4 * s2 - r3 * s1) * c1s +
             (2 * r4 + 1) * s1 * m2 * c1 + r3 * (m1 * r * s2 + 2 * s1)) *
                (c1 + 1) * r * (c1 - 1) * c2c +
            (-2 * c1s * c1s + (-2 * r4 + 4) * c1s + 2 * r4 - 2) * c2s +
            ((m1 * r * s2 + s1) * c1s - m2 * r * s1 * c1 - m1 * r * s2 - 2 * s1) * c2);
    return d;
}

Vec5 blowup_chart2_rhs_literal(const BlowupChartState& st) {
    require_chart(st, Chart::Chart2);
    Vec5 d = blowup_chart2_rhs(st, false);
    const auto [s1, c1, s2, c2] = trig(st);
    const double R = st.radial, m2 = st.m2;
    const double R3 = R * R * R;
    d[0] = s1 * R * (R3 * s1 * s1 * c2 * c2 * c2 - R * (R * R * c1 * c1 + m2 * m2 - R * R) * c2 + 2 * m2 * s2);
    return d;
}

std::array<double, 4> divisor_field_chart1_literal(double m1, double m2, double q1, double q2) {
    const double s1 = std::sin(q1), c1 = std::cos(q1), s2 = std::sin(q2), c2 = std::cos(q2);
    if (std::abs(s1) < 1e-14)
        throw Error(ErrorKind::CoordinateSingularity, "chart 1 q2-component is singular at sin(q1) = 0");
    const double D = 1 + s1 * s1 * c2 * c2;
    return {
        2 * c1 * m2,
        -2 * c1 * m1,
        -s2 * c1 * (s1 * c2 - 2) / D,
        -c2 * (2 * s1 * s1 * s1 * s1 * c2 * c2 - 2 + (2 - c1 * c1) * s1 * c2) / (D * s1),
    };
}

std::array<double, 4> divisor_field_chart2_literal(double m1, double m2, double Q1, double Q2) {
    const double s1 = std::sin(Q1), c1 = std::cos(Q1), s2 = std::sin(Q2), c2 = std::cos(Q2);
    const double D = 1 + s1 * s1 * c2 * c2;
    return {
        2 * m2 * s2 * s1,
        -2 * s1 * s2 * m1,
        s1 * (2 * s1 * s1 * c2 * c2 * c2 * c2 + c2 * c2 * c2 * s1 + c2 * s1 - 2) / D,
        c2 * c2 * c1 * s2 * (2 * c2 * c1 * c1 - 2 * c2 - s1) / D,
    };
}

Vec2 invariant_plane_blowup_rhs(double r, double phi, int sign, double C) {
    const double k = signed_root(sign, C);
    const double s = std::sin(phi), c = std::cos(phi);
    const double w = 1 + r * r * r * r * s * s;
    // Same sign convention as invariant_plane_reg_rhs; the k terms vanish on r = 0.
    const double den = 1 + s * s;
    return {
        r * ((2 - s) * c + r * k * s) * w / den,
        -s * w * (2 * c * c + s * c * k * r - 2 * s) / den,
    };
}

std::array<std::array<double, 3>, 3> chart_jacobian(const BlowupChartState& st) {
    const auto [s1, c1, s2, c2] = trig(st);
    const double r = st.radial;
    switch (st.chart) {
        case Chart::Chart1:
            return {{{c1, -r * s1, 0.0},
                     {2 * r * s1 * c2, r * r * c1 * c2, -r * r * s1 * s2},
                     {s1 * s2, r * c1 * s2, r * s1 * c2}}};
        case Chart::Chart2:
            return {{{s1 * s2, r * c1 * s2, r * s1 * c2},
                     {2 * r * s1 * c2, r * r * c1 * c2, -r * r * s1 * s2},
                     {c1, -r * s1, 0.0}}};
        case Chart::InvariantPlane: {
            const double sp = std::sin(st.angle1), cp = std::cos(st.angle1);
            return {{{0.0, 0.0, 0.0}, {2 * r * sp, r * r * cp, 0.0}, {cp, -r * sp, 0.0}}};
        }
    }
    return {};
}

Vec3 chart_tangent_pushforward(const BlowupChartState& s, const Vec5& v) {
    const auto J = chart_jacobian(s);
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = J[i][0] * v[2] + J[i][1] * v[3] + J[i][2] * v[4];
    return out;
}

Vec5 transported_chart_rhs(const BlowupChartState& s, bool divided) {
    if (s.chart == Chart::InvariantPlane)
        throw Error(ErrorKind::Domain, "use transported_invariant_plane_blowup_rhs");
    if (!(s.radial > 0)) throw Error(ErrorKind::SingularInput, "transport requires radial > 0");
    const Vec3 v = chart_pushforward(s);
    const Vec5 f = regularised_rhs({s.m1, s.m2, v[0], v[1], v[2]});
    const Vec3 x = solve3(chart_jacobian(s), {f[2], f[3], f[4]});
    Vec5 out{f[0], f[1], x[0], x[1], x[2]};
    if (divided)
        for (double& u : out) u /= s.radial;
    return out;
}

Vec2 transported_invariant_plane_blowup_rhs(double r, double phi, int sign, double C) {
    if (!(r > 0)) throw Error(ErrorKind::SingularInput, "transport requires r > 0");
    const double sp = std::sin(phi), cp = std::cos(phi);
    const Vec2 f = invariant_plane_reg_rhs(r * r * sp, r * cp, sign, C);
    // [2 r sp, r^2 cp; cp, -r sp] (rdot, phidot) = f
    const double a = 2 * r * sp, b = r * r * cp, c = cp, d = -r * sp;
    const double det = a * d - b * c;
    const double rdot = (f[0] * d - b * f[1]) / det;
    const double phidot = (a * f[1] - c * f[0]) / det;
    return {rdot / r, phidot / r};
}

}  // namespace sphere2b
