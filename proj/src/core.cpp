#include "sphere2b/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sphere2b {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::SingularInput: return "singular-input";
        case ErrorKind::DegenerateConfiguration: return "degenerate-configuration";
        case ErrorKind::Inconsistency: return "inconsistency";
        case ErrorKind::CoordinateSingularity: return "coordinate-singularity";
        case ErrorKind::Range: return "range";
        case ErrorKind::InsufficientTail: return "insufficient-tail";
        case ErrorKind::WindowTooShort: return "window-too-short";
        case ErrorKind::AmbiguousTail: return "ambiguous-tail";
        case ErrorKind::NonConvergent: return "non-convergent";
        case ErrorKind::StepUnderflow: return "step-underflow";
        case ErrorKind::BudgetExhausted: return "budget-exhausted";
        case ErrorKind::InvalidState: return "invalid-state";
        case ErrorKind::ClassificationAmbiguous: return "classification-ambiguous";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

const char* chart_name(Chart c) {
    switch (c) {
        case Chart::Chart1: return "chart1";
        case Chart::Chart2: return "chart2";
        case Chart::InvariantPlane: return "invariant-plane";
    }
    return "unknown";
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double wrap_2pi(double a) {
    double r = std::fmod(a, 2 * kPi);
    if (r < 0) r += 2 * kPi;
    if (r >= 2 * kPi) r = 0;
    return r;
}

double xi_from_q(double q) {
    if (!(q > 0 && q < kPi)) throw Error(ErrorKind::Domain, "q must lie in (0, pi)");
    return std::cos(q) / std::sin(q);
}

double q_from_xi(double xi) {
    if (!std::isfinite(xi)) throw Error(ErrorKind::Domain, "xi must be finite");
    return std::atan2(1.0, xi);
}

PolyState to_poly(const ReducedState& s) { return {s.m1, s.m2, s.m3, xi_from_q(s.q), s.p}; }

ReducedState to_reduced(const PolyState& s) { return {s.m1, s.m2, s.m3, q_from_xi(s.xi), s.p}; }

RegState to_regularised(const PolyState& s) {
    if (s.xi == 0) throw Error(ErrorKind::SingularInput, "xi = 0 has no regularised image");
    return {s.m1, s.m2, s.m3, 1.0 / s.xi, s.p / s.xi};
}

PolyState to_poly(const RegState& s) {
    if (s.eta == 0) throw Error(ErrorKind::SingularInput, "eta = 0 has no polynomial image");
    return {s.m1, s.m2, s.m3, 1.0 / s.eta, s.zeta / s.eta};
}

Vec3 chart_pushforward(const BlowupChartState& s) {
    const double r = s.radial;
    switch (s.chart) {
        case Chart::Chart1: {
            const double s1 = std::sin(s.angle1), c1 = std::cos(s.angle1);
            return {r * c1, r * r * s1 * std::cos(s.angle2), r * s1 * std::sin(s.angle2)};
        }
        case Chart::Chart2: {
            const double s1 = std::sin(s.angle1), c1 = std::cos(s.angle1);
            return {r * s1 * std::sin(s.angle2), r * r * s1 * std::cos(s.angle2), r * c1};
        }
        case Chart::InvariantPlane:
            return {0.0, r * r * std::sin(s.angle1), r * std::cos(s.angle1)};
    }
    return {0, 0, 0};
}

double weighted_radius(const Vec3& v) {
    const double a = v[0] * v[0] + v[2] * v[2];
    const double r2 = 0.5 * (a + std::sqrt(a * a + 4 * v[1] * v[1]));
    return std::sqrt(r2);
}

BlowupChartState chart_pullback(Chart chart, double m1, double m2, const Vec3& v) {
    BlowupChartState s;
    s.chart = chart;
    Vec3 w = v;
    if (chart == Chart::InvariantPlane) {
        w[0] = 0;
    } else {
        s.m1 = m1;
        s.m2 = m2;
    }
    const double r = weighted_radius(w);
    s.radial = r;
    if (r == 0) {
        s.angle1 = chart == Chart::InvariantPlane ? 0.0 : kPi / 2;
        return s;
    }
    const double a = w[0] / r, b = w[1] / (r * r), c = w[2] / r;
    switch (chart) {
        case Chart::Chart1:
            s.angle1 = std::acos(std::clamp(a, -1.0, 1.0));
            s.angle2 = wrap_2pi(std::atan2(c, b));
            break;
        case Chart::Chart2:
            s.angle1 = std::acos(std::clamp(c, -1.0, 1.0));
            s.angle2 = wrap_2pi(std::atan2(a, b));
            break;
        case Chart::InvariantPlane:
            s.angle1 = wrap_2pi(std::atan2(b, c));
            break;
    }
    return s;
}

Vec3 angular_momentum(const FullState& f) {
    const Vec3 a = cross(f.q1, f.p1), b = cross(f.q2, f.p2);
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

void validate(const FullState& f) {
    if (std::abs(norm(f.q1) - 1) > kConstraintTol || std::abs(norm(f.q2) - 1) > kConstraintTol)
        throw Error(ErrorKind::InvalidState, "position vectors must have unit norm");
    if (std::abs(dot(f.p1, f.q1)) > kConstraintTol || std::abs(dot(f.p2, f.q2)) > kConstraintTol)
        throw Error(ErrorKind::InvalidState, "momenta must be tangent to the sphere");
    const double c = dot(f.q1, f.q2);
    if (std::abs(c) >= 1 - kConstraintTol)
        throw Error(ErrorKind::DegenerateConfiguration, "bodies coincide or are antipodal");
}

void validate(const ReducedState& s) {
    if (!(s.q > 0 && s.q < kPi)) throw Error(ErrorKind::Domain, "q must lie in (0, pi)");
    if (!std::isfinite(s.m1) || !std::isfinite(s.m2) || !std::isfinite(s.m3) || !std::isfinite(s.p))
        throw Error(ErrorKind::InvalidState, "state components must be finite");
}

std::array<Vec3, 3> body_frame(const FullState& f) {
    const double c = dot(f.q1, f.q2);
    if (std::abs(c) >= 1 - kConstraintTol)
        throw Error(ErrorKind::DegenerateConfiguration, "bodies coincide or are antipodal");
    const double s = std::sqrt(1 - c * c);
    Vec3 e3{-f.q1[0], -f.q1[1], -f.q1[2]};
    Vec3 e2{(f.q2[0] - c * f.q1[0]) / s, (f.q2[1] - c * f.q1[1]) / s, (f.q2[2] - c * f.q1[2]) / s};
    Vec3 e1 = cross(e2, e3);
    return {e1, e2, e3};
}

ReducedState reduce_full_state(const FullState& f, const Masses& masses) {
    validate(f);
    const auto e = body_frame(f);
    const Vec3 L = angular_momentum(f);
    const double c = dot(f.q1, f.q2);
    const double q = std::acos(c);
    const double s = std::sin(q);
    ReducedState r;
    r.m1 = dot(e[0], L);
    r.m2 = dot(e[1], L);
    r.m3 = dot(e[2], L);
    r.q = q;
    const double qdot = -(dot(f.p1, f.q2) / masses.mu1 + dot(f.q1, f.p2) / masses.mu2) / s;
    r.p = (masses.mu1 * masses.mu2 * qdot + masses.mu2 * r.m1) / (masses.mu1 + masses.mu2);
    return r;
}

FrameAngles frame_angles_from_m(const Vec3& m, double L) {
    if (!(L > 0)) throw Error(ErrorKind::Inconsistency, "L must be positive");
    if (std::abs(norm(m) - L) > kConstraintTol * std::max(1.0, L))
        throw Error(ErrorKind::Inconsistency, "|m| differs from L");
    FrameAngles a;
    a.theta = std::acos(std::clamp(m[2] / L, -1.0, 1.0));
    if (std::sin(a.theta) < 1e-12) {
        a.phi = 0;
    } else {
        a.phi = wrap_2pi(std::atan2(m[0], m[1]));
    }
    return a;
}

}  // namespace sphere2b
