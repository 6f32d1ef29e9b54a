#include "sphere2b/blowup.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "sphere2b/integrate.hpp"

namespace sphere2b {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonIter = 50;
constexpr double kHyperbolicTol = 1e-8;

using Fn2 = std::function<Vec2(const Vec2&)>;

double max_abs(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

struct NewtonResult {
    Vec2 u{};
    double residual = 0;
    bool converged = false;
};

// Damped Newton with a central-difference Jacobian; the step is halved until the residual drops.
NewtonResult damped_newton(const Fn2& g, Vec2 u) {
    NewtonResult res;
    Vec2 gu = g(u);
    double r = max_abs(gu);
    for (int it = 0; it < kNewtonIter; ++it) {
        if (r <= kNewtonTol * 1e-2) break;
        const double h = 1e-7;
        double J[2][2];
        for (int k = 0; k < 2; ++k) {
            Vec2 up = u, um = u;
            up[k] += h;
            um[k] -= h;
            const Vec2 gp = g(up), gm = g(um);
            J[0][k] = (gp[0] - gm[0]) / (2 * h);
            J[1][k] = (gp[1] - gm[1]) / (2 * h);
        }
        const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (!std::isfinite(det) || det == 0) break;
        const Vec2 step{(J[1][1] * gu[0] - J[0][1] * gu[1]) / det, (J[0][0] * gu[1] - J[1][0] * gu[0]) / det};
        double lambda = 1;
        bool improved = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const Vec2 v{u[0] - lambda * step[0], u[1] - lambda * step[1]};
            const Vec2 gv = g(v);
            const double rv = max_abs(gv);
            if (std::isfinite(rv) && rv < r) {
                u = v;
                gu = gv;
                r = rv;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    res.u = u;
    res.residual = r;
    res.converged = r <= kNewtonTol;
    return res;
}

double newton_1d(const std::function<double(double)>& g, double x, double& residual) {
    double gx = g(x);
    for (int it = 0; it < kNewtonIter && std::abs(gx) > kNewtonTol * 1e-2; ++it) {
        const double h = 1e-7;
        const double d = (g(x + h) - g(x - h)) / (2 * h);
        if (d == 0 || !std::isfinite(d)) break;
        double lambda = 1;
        bool improved = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const double y = x - lambda * gx / d;
            const double gy = g(y);
            if (std::abs(gy) < std::abs(gx)) {
                x = y;
                gx = gy;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    residual = std::abs(gx);
    return x;
}

BlowupChartState chart_state(Chart chart, double m1, double m2, double radial, double a1, double a2) {
    BlowupChartState s;
    s.chart = chart;
    s.m1 = m1;
    s.m2 = m2;
    s.radial = radial;
    s.angle1 = a1;
    s.angle2 = a2;
    return s;
}

// Chart-2 angles of a pole-frame point (x, y).
std::pair<double, double> pole_angles(LocalFrame frame, double x, double y) {
    const double s1 = std::min(1.0, std::hypot(x, y));
    const double q1 = frame == LocalFrame::PoleNorth ? std::asin(s1) : kPi - std::asin(s1);
    return {q1, std::atan2(x, y)};
}

// Divided field in the linearisation variables of the frame: (m1, m2, radial, u1, u2).
Vec5 frame_field(Chart chart, LocalFrame frame, const Vec5& v) {
    if (frame == LocalFrame::Angles) return blowup_chart_rhs(chart_state(chart, v[0], v[1], v[2], v[3], v[4]), true);
    const auto [q1, q2] = pole_angles(frame, v[3], v[4]);
    const Vec5 f = blowup_chart_rhs(chart_state(Chart::Chart2, v[0], v[1], v[2], q1, q2), true);
    const double s1 = std::sin(q1), c1 = std::cos(q1), s2 = std::sin(q2), c2 = std::cos(q2);
    return {f[0], f[1], f[2], c1 * s2 * f[3] + s1 * c2 * f[4], c1 * c2 * f[3] - s1 * s2 * f[4]};
}

Vec2 frame_angular(Chart chart, LocalFrame frame, double u1, double u2, const ChartContext& ctx) {
    const Vec5 f = frame_field(chart, frame, {ctx.m1, ctx.m2, 0.0, u1, u2});
    return {f[3], f[4]};
}

double angle_dist(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

bool same_point(const DivisorPoint& a, const DivisorPoint& b) {
    if (a.frame != b.frame) return false;
    return angle_dist(a.angle1, b.angle1) < 1e-8 && angle_dist(a.angle2, b.angle2) < 1e-8;
}

// Winding of a sampled planar field around a closed loop, in whole turns.
int loop_winding(const std::vector<Vec2>& v) {
    double total = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec2& a = v[k];
        const Vec2& b = v[(k + 1) % v.size()];
        total += std::remainder(std::atan2(b[1], b[0]) - std::atan2(a[1], a[0]), 2 * kPi);
    }
    return static_cast<int>(std::lround(total / (2 * kPi)));
}

std::vector<DivisorPoint> invariant_plane_equilibria(const ChartContext& ctx, int n) {
    auto g = [&](double phi) { return invariant_plane_blowup_rhs(0.0, phi, ctx.sign, ctx.C)[1]; };
    std::vector<DivisorPoint> out;
    const double h = 2 * kPi / n;
    double prev = g(0.0);
    for (int i = 0; i < n; ++i) {
        const double a = i * h, b = (i + 1) * h;
        const double next = g(b);
        if (prev == 0 || prev * next < 0) {
            double residual = 0;
            const double x = newton_1d(g, prev == 0 ? a : 0.5 * (a + b), residual);
            if (residual > kNewtonTol) {
                std::ostringstream os;
                os << "Newton did not converge from scan cell [" << a << ", " << b << "], residual " << residual;
                throw Error(ErrorKind::NonConvergent, os.str());
            }
            DivisorPoint p;
            p.chart = Chart::InvariantPlane;
            p.angle1 = wrap_2pi(x);
            if (std::abs(p.angle1 - 2 * kPi) < 1e-12) p.angle1 = 0;
            p.residual = residual;
            if (std::none_of(out.begin(), out.end(), [&](const DivisorPoint& q) { return same_point(p, q); }))
                out.push_back(p);
        }
        prev = next;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.angle1 < b.angle1; });
    return out;
}

}  // namespace

const char* equilibrium_class_name(EquilibriumClass c) {
    switch (c) {
        case EquilibriumClass::Saddle: return "saddle";
        case EquilibriumClass::AttractingNode: return "attracting_node";
        case EquilibriumClass::RepellingNode: return "repelling_node";
        case EquilibriumClass::CentreOnSphere: return "centre_on_sphere";
        case EquilibriumClass::Degenerate: return "degenerate";
    }
    return "unknown";
}

Vec2 divisor_angular_field(Chart chart, double a1, double a2, const ChartContext& ctx) {
    if (chart == Chart::InvariantPlane) return {invariant_plane_blowup_rhs(0.0, a1, ctx.sign, ctx.C)[1], 0.0};
    const Vec5 f = blowup_chart_rhs(chart_state(chart, ctx.m1, ctx.m2, 0.0, a1, a2), true);
    return {f[3], f[4]};
}

Vec3 divisor_direction(Chart chart, double a1, double a2) {
    const double s1 = std::sin(a1), c1 = std::cos(a1), s2 = std::sin(a2), c2 = std::cos(a2);
    switch (chart) {
        case Chart::Chart1: return {c1, s1 * c2, s1 * s2};
        case Chart::Chart2: return {s1 * s2, s1 * c2, c1};
        case Chart::InvariantPlane: return {0.0, s1, c1};
    }
    return {0, 0, 0};
}

Vec3 divisor_direction(const DivisorPoint& p) {
    switch (p.frame) {
        case LocalFrame::PoleNorth: return {0.0, 0.0, 1.0};
        case LocalFrame::PoleSouth: return {0.0, 0.0, -1.0};
        case LocalFrame::Angles: break;
    }
    return divisor_direction(p.chart, p.angle1, p.angle2);
}

Vec3 divisor_tangent(Chart chart, double a1, double a2, const ChartContext& ctx) {
    const Vec2 d = divisor_angular_field(chart, a1, a2, ctx);
    const double s1 = std::sin(a1), c1 = std::cos(a1), s2 = std::sin(a2), c2 = std::cos(a2);
    switch (chart) {
        case Chart::Chart1:
            return {-s1 * d[0], c1 * c2 * d[0] - s1 * s2 * d[1], c1 * s2 * d[0] + s1 * c2 * d[1]};
        case Chart::Chart2:
            return {c1 * s2 * d[0] + s1 * c2 * d[1], c1 * c2 * d[0] - s1 * s2 * d[1], -s1 * d[0]};
        case Chart::InvariantPlane: return {0.0, c1 * d[0], -s1 * d[0]};
    }
    return {0, 0, 0};
}

std::vector<DivisorPoint> find_divisor_equilibria(Chart chart, const ChartContext& ctx, int resolution) {
    if (resolution < 8) throw Error(ErrorKind::Domain, "scan resolution must be at least 8");
    if (chart == Chart::InvariantPlane) return invariant_plane_equilibria(ctx, resolution);

    // Vertices at angle1 = pi (i + 1/2) / n keep the scan off the polar lines of the chart.
    const int n = resolution;
    const double h1 = kPi / n, h2 = 2 * kPi / n;
    std::vector<Vec2> F(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            F[static_cast<std::size_t>(i) * n + j] = divisor_angular_field(chart, (i + 0.5) * h1, j * h2, ctx);
    auto at = [&](int i, int j) -> const Vec2& { return F[static_cast<std::size_t>(i) * n + ((j % n) + n) % n]; };
    auto changes = [](double a, double b, double c, double d) {
        const double lo = std::min({a, b, c, d}), hi = std::max({a, b, c, d});
        return lo <= 0 && hi >= 0;
    };

    auto g = [&](const Vec2& u) { return divisor_angular_field(chart, u[0], u[1], ctx); };
    std::vector<DivisorPoint> found;
    for (int i = 0; i + 1 < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 &a = at(i, j), &b = at(i + 1, j), &c = at(i, j + 1), &d = at(i + 1, j + 1);
            if (!changes(a[0], b[0], c[0], d[0]) || !changes(a[1], b[1], c[1], d[1])) continue;
            const Vec2 start{(i + 1.0) * h1, (j + 0.5) * h2};
            const NewtonResult nr = damped_newton(g, start);
            const double s1 = std::sin(nr.u[0]);
            // Cells that only straddle a sign flip of a large component (no nearby zero) are skipped,
            // as are runs into the polar lines, which are handled in the pole frames below.
            if (!nr.converged) {
                if (std::abs(nr.u[0] - start[0]) < 2 * h1 && angle_dist(nr.u[1], start[1]) < 2 * h2 &&
                    nr.residual < 1e-6) {
                    std::ostringstream os;
                    os << "Newton did not converge from scan cell (" << start[0] << ", " << start[1]
                       << "), residual " << nr.residual;
                    throw Error(ErrorKind::NonConvergent, os.str());
                }
                continue;
            }
            if (s1 < 1e-6) continue;
            DivisorPoint p;
            p.chart = chart;
            p.angle1 = nr.u[0];
            p.angle2 = wrap_2pi(nr.u[1]);
            if (std::abs(p.angle2 - 2 * kPi) < 1e-12) p.angle2 = 0;
            p.residual = nr.residual;
            if (std::none_of(found.begin(), found.end(), [&](const DivisorPoint& q) { return same_point(p, q); }))
                found.push_back(p);
        }
    }

    // The chart-2 polar lines are single points of the divisor; look for zeros there in (x, y).
    if (chart == Chart::Chart2) {
        for (LocalFrame fr : {LocalFrame::PoleNorth, LocalFrame::PoleSouth}) {
            auto gp = [&](const Vec2& u) { return frame_angular(chart, fr, u[0], u[1], ctx); };
            const NewtonResult nr = damped_newton(gp, {1e-3, 7e-4});
            if (!nr.converged || std::hypot(nr.u[0], nr.u[1]) > 1e-8) continue;
            DivisorPoint p;
            p.chart = chart;
            p.frame = fr;
            p.angle1 = fr == LocalFrame::PoleNorth ? 0.0 : kPi;
            p.angle2 = 0;
            p.residual = nr.residual;
            found.push_back(p);
        }
    }

    for (DivisorPoint& p : found) {
        const Vec5 f = p.frame == LocalFrame::Angles
                           ? blowup_chart_rhs(chart_state(chart, ctx.m1, ctx.m2, 0.0, p.angle1, p.angle2), true)
                           : frame_field(chart, p.frame, {ctx.m1, ctx.m2, 0.0, 0.0, 0.0});
        const double scale = 1 + std::hypot(ctx.m1, ctx.m2);
        p.full_equilibrium = std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])}) <= 1e-10 * scale;
    }
    std::stable_sort(found.begin(), found.end(), [](const DivisorPoint& a, const DivisorPoint& b) {
        if (a.full_equilibrium != b.full_equilibrium) return a.full_equilibrium;
        if (a.frame != b.frame) return a.frame < b.frame;
        if (std::abs(a.angle1 - b.angle1) > 1e-9) return a.angle1 < b.angle1;
        return a.angle2 < b.angle2;
    });
    return found;
}

EquilibriumReport classify_equilibrium(const DivisorPoint& point, const ChartContext& ctx) {
    EquilibriumReport rep;
    rep.point = point;

    // Variables and field of the linearisation, anchored at the equilibrium.
    std::vector<double> x0;
    std::function<std::vector<double>(const std::vector<double>&)> field;
    int angular_offset = 0;
    if (point.chart == Chart::InvariantPlane) {
        x0 = {0.0, point.angle1};
        field = [&](const std::vector<double>& v) {
            const Vec2 f = invariant_plane_blowup_rhs(v[0], v[1], ctx.sign, ctx.C);
            return std::vector<double>{f[0], f[1]};
        };
    } else {
        const double u1 = point.frame == LocalFrame::Angles ? point.angle1 : 0.0;
        const double u2 = point.frame == LocalFrame::Angles ? point.angle2 : 0.0;
        if (point.full_equilibrium) {
            x0 = {ctx.m1, ctx.m2, 0.0, u1, u2};
            angular_offset = 3;
            field = [&](const std::vector<double>& v) {
                const Vec5 f = frame_field(point.chart, point.frame, {v[0], v[1], v[2], v[3], v[4]});
                return std::vector<double>(f.begin(), f.end());
            };
        } else {
            // (m1, m2) keep rotating at a centre; linearise in (radial, angles) with them frozen.
            x0 = {0.0, u1, u2};
            angular_offset = 1;
            field = [&](const std::vector<double>& v) {
                const Vec5 f = frame_field(point.chart, point.frame, {ctx.m1, ctx.m2, v[0], v[1], v[2]});
                return std::vector<double>{f[2], f[3], f[4]};
            };
        }
    }
    const int n = static_cast<int>(x0.size());
    rep.dim = n;

    // Central differences at h, h/2, h/4 with two Richardson passes. The radial coordinate is
    // differenced one-sidedly since the chart is only defined for radial >= 0.
    const int radial_index = point.chart == Chart::InvariantPlane ? 0 : angular_offset - 1;
    auto column = [&](int k, double h) {
        const auto kk = static_cast<std::size_t>(k);
        std::vector<double> p = x0, m = x0;
        std::vector<double> d(static_cast<std::size_t>(n));
        if (k == radial_index) {
            std::vector<double> p2 = x0;
            p[kk] += h;
            p2[kk] += 2 * h;
            const auto f0 = field(x0), f1 = field(p), f2 = field(p2);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = (-3 * f0[i] + 4 * f1[i] - f2[i]) / (2 * h);
            return d;
        }
        p[kk] += h;
        m[kk] -= h;
        const auto fp = field(p), fm = field(m);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (fp[i] - fm[i]) / (2 * h);
        return d;
    };
    const double h = 1e-4;
    Eigen::MatrixXd J(n, n);
    for (int k = 0; k < n; ++k) {
        const auto d1 = column(k, h), d2 = column(k, h / 2), d4 = column(k, h / 4);
        // The one-sided formula has an O(h^3) second error term where the central one has O(h^4).
        const double w2 = k == radial_index ? 8.0 : 16.0;
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double r1 = (4 * d2[ii] - d1[ii]) / 3, r2 = (4 * d4[ii] - d2[ii]) / 3;
            if (std::abs(r2 - r1) > 1e-5 * (1 + std::abs(r2)))
                throw Error(ErrorKind::NonConvergent, "finite-difference Jacobian entries are not consistent");
            J(i, k) = (w2 * r2 - r1) / (w2 - 1);
        }
    }
    rep.jacobian.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) rep.jacobian[static_cast<std::size_t>(i) * n + k] = J(i, k);

    Eigen::EigenSolver<Eigen::MatrixXd> es(J, true);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NonConvergent, "eigenvalue iteration failed");
    for (int i = 0; i < n; ++i) rep.eigenvalues.push_back(es.eigenvalues()(i));
    const Eigen::MatrixXcd V = es.eigenvectors();
    rep.eigenvectors.assign(V.data(), V.data() + n * n);
    for (const auto& l : rep.eigenvalues)
        if (std::abs(l) < 1e-7) ++rep.zero_multiplicity;

    // The divisor is invariant and the angular rows do not see (m1, m2) or the radial coordinate at
    // radial 0, so the angular block carries the on-sphere spectrum.
    Eigen::MatrixXd B = J.block(angular_offset, angular_offset, 2, 2);
    if (point.chart == Chart::InvariantPlane) B = J;
    Eigen::EigenSolver<Eigen::MatrixXd> eb(B, false);
    rep.on_sphere = {eb.eigenvalues()(0), eb.eigenvalues()(1)};

    const auto& l0 = rep.on_sphere[0];
    const auto& l1 = rep.on_sphere[1];
    const bool real = std::abs(l0.imag()) < kHyperbolicTol && std::abs(l1.imag()) < kHyperbolicTol;
    if (!real) {
        if (std::abs(l0.real()) < kHyperbolicTol && std::abs(l1.real()) < kHyperbolicTol)
            rep.cls = EquilibriumClass::CentreOnSphere;
        else
            rep.cls = EquilibriumClass::Degenerate;
    } else {
        if (std::abs(l0.real()) < kHyperbolicTol || std::abs(l1.real()) < kHyperbolicTol) {
            std::ostringstream os;
            os << "eigenvalue with |Re| < " << kHyperbolicTol << " at a nominally hyperbolic point";
            throw Error(ErrorKind::ClassificationAmbiguous, os.str());
        }
        if (l0.real() * l1.real() < 0)
            rep.cls = EquilibriumClass::Saddle;
        else
            rep.cls = l0.real() < 0 ? EquilibriumClass::AttractingNode : EquilibriumClass::RepellingNode;
    }

    if (point.chart != Chart::InvariantPlane) {
        const Vec5 f = frame_field(point.chart, point.frame, {ctx.m1, ctx.m2, 0.0, x0[static_cast<std::size_t>(n - 2)],
                                                             x0[static_cast<std::size_t>(n - 1)]});
        rep.m_rotation = std::hypot(f[0], f[1]);
        if (!point.full_equilibrium) {
            const Vec3 dir = divisor_direction(point.chart, point.angle1, point.angle2);
            const Vec3 stated = divisor_direction(Chart::Chart1, 0.0, std::asin((std::sqrt(17.0) - 1) / 4));
            const double d = std::hypot(dir[0] - stated[0], dir[1] - stated[1], dir[2] - stated[2]);
            rep.location_mismatch = d > 1e-6;
        }
    }
    return rep;
}

PhasePortrait divisor_phase_portrait(Chart chart, int resolution, const ChartContext& ctx) {
    if (resolution < 32) throw Error(ErrorKind::Domain, "portrait resolution must be at least 32");
    PhasePortrait pp;
    pp.chart = chart;
    pp.resolution = resolution;
    const int n = resolution;
    if (chart == Chart::InvariantPlane) {
        // The divisor is a circle; the index sum of a field on a circle is zero.
        for (int j = 0; j < n; ++j) {
            const double phi = 2 * kPi * (j + 0.5) / n;
            pp.samples.push_back({phi, 0.0, divisor_angular_field(chart, phi, 0.0, ctx)[0], 0.0});
        }
        return pp;
    }

    const double h1 = kPi / n, h2 = 2 * kPi / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a1 = (i + 0.5) * h1, a2 = (j + 0.5) * h2;
            const Vec2 d = divisor_angular_field(chart, a1, a2, ctx);
            pp.samples.push_back({a1, a2, d[0], d[1]});
        }
    auto vec = [&](int i, int j) {
        const PortraitSample& s = pp.samples[static_cast<std::size_t>(i) * n + ((j % n) + n) % n];
        return Vec2{s.d1, s.d2};
    };
    // Cell windings, counter-clockwise in (angle1, angle2), over the band between the first and last
    // rows of vertices.
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int w = loop_winding({vec(i, j), vec(i + 1, j), vec(i + 1, j + 1), vec(i, j + 1)});
            if (w == 0) continue;
            pp.index_sum += w;
            DivisorPoint p;
            p.chart = chart;
            p.angle1 = (i + 1.0) * h1;
            p.angle2 = (j + 1.0) * h2;
            pp.indices.emplace_back(p, w);
        }

    // The two caps around the chart poles, seen from coordinates that are regular there.
    const int m = 256;
    const double rho = 3 * h1;
    for (int cap = 0; cap < 2; ++cap) {
        std::vector<Vec2> loop;
        for (int k = 0; k < m; ++k) {
            const double t = 2 * kPi * k / m;
            if (chart == Chart::Chart1) {
                // Chart-1 poles are chart-2 points (pi/2, pi/2) and (pi/2, 3 pi/2).
                const double q1 = kPi / 2 + rho * std::cos(t), q2 = (cap == 0 ? 0.5 : 1.5) * kPi + rho * std::sin(t);
                const Vec2 d = divisor_angular_field(Chart::Chart2, q1, q2, ctx);
                loop.push_back(d);
            } else {
                const LocalFrame fr = cap == 0 ? LocalFrame::PoleNorth : LocalFrame::PoleSouth;
                const double r = std::sin(rho);
                loop.push_back(frame_angular(chart, fr, r * std::cos(t), r * std::sin(t), ctx));
            }
        }
        const int w = loop_winding(loop);
        if (w == 0) continue;
        pp.index_sum += w;
        DivisorPoint p;
        p.chart = chart;
        if (chart == Chart::Chart1) {
            p.chart = Chart::Chart2;
            p.angle1 = kPi / 2;
            p.angle2 = (cap == 0 ? 0.5 : 1.5) * kPi;
        } else {
            p.frame = cap == 0 ? LocalFrame::PoleNorth : LocalFrame::PoleSouth;
            p.angle1 = cap == 0 ? 0.0 : kPi;
        }
        pp.indices.emplace_back(p, w);
    }
    return pp;
}

NearDivisorReport near_divisor_flow_check(Chart chart, const std::array<double, 5>& seed, double tau_end,
                                          const DivisorPoint& target, double r_cap) {
    if (chart == Chart::InvariantPlane) throw Error(ErrorKind::Domain, "flow check needs a general chart");
    if (!(seed[2] >= 0 && seed[2] <= 1e-3)) throw Error(ErrorKind::Domain, "seed radial coordinate must lie in [0, 1e-3]");
    NearDivisorReport rep;
    rep.r0 = seed[2];
    rep.tau_end = tau_end;

    auto rotation_defect = [&](const double* y) {
        const Vec5 f = blowup_chart_rhs(chart_state(chart, y[0], y[1], y[2], y[3], y[4]), true);
        const double a = divisor_direction(chart, y[3], y[4])[0];
        return std::hypot(f[0] - 2 * a * y[1], f[1] + 2 * a * y[0]);
    };
    {
        const double y[5] = {seed[0], seed[1], 0.0, seed[3], seed[4]};
        rep.rotation_defect_r0 = rotation_defect(y);
    }

    SystemSpec spec;
    spec.system = chart == Chart::Chart1 ? System::Chart1 : System::Chart2;
    spec.divided = true;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    const Trajectory tr = integrate(spec, {seed.begin(), seed.end()}, 0.0, tau_end, cfg,
                                    [&](double, const double* y) { return y[2] > r_cap; });
    rep.tau_reached = tr.times.back();
    rep.left_neighbourhood = tr.termination == Termination::StopCondition;

    const double n0 = seed[0] * seed[0] + seed[1] * seed[1];
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double* y = tr.state(i);
        rep.m_norm_drift = std::max(rep.m_norm_drift, std::abs(y[0] * y[0] + y[1] * y[1] - n0));
        if (y[2] > 0) rep.rotation_defect = std::max(rep.rotation_defect, rotation_defect(y) / y[2]);
    }
    const double* yf = tr.state(tr.size() - 1);
    rep.final_state.assign(yf, yf + 5);
    rep.final_radial = yf[2];
    const Vec3 d = divisor_direction(chart, yf[3], yf[4]);
    const Vec3 t = divisor_direction(target.chart, target.angle1, target.angle2);
    rep.final_distance = std::acos(std::clamp(d[0] * t[0] + d[1] * t[1] + d[2] * t[2], -1.0, 1.0));
    return rep;
}

}  // namespace sphere2b
