#include "sphere2b/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sphere2b/stats.hpp"

namespace sphere2b {

const char* system_name(System s) {
    switch (s) {
        case System::Full: return "full";
        case System::Reduced: return "reduced";
        case System::Poly: return "poly";
        case System::Regularised: return "regularised";
        case System::RegularisedTimed: return "regularised-timed";
        case System::InvariantPlaneQ: return "invariant-plane-q";
        case System::InvariantPlaneXi: return "invariant-plane";
        case System::InvariantPlaneReg: return "invariant-plane-reg";
        case System::InvariantPlaneBlowup: return "invariant-plane-blowup";
        case System::Chart1: return "chart1";
        case System::Chart2: return "chart2";
    }
    return "unknown";
}

std::optional<System> system_from_name(const std::string& n) {
    for (System s : {System::Full, System::Reduced, System::Poly, System::Regularised, System::RegularisedTimed,
                     System::InvariantPlaneQ, System::InvariantPlaneXi, System::InvariantPlaneReg,
                     System::InvariantPlaneBlowup, System::Chart1, System::Chart2})
        if (n == system_name(s)) return s;
    return std::nullopt;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::EndReached: return "end-reached";
        case Termination::Collision: return "collision";
        case Termination::Antipodal: return "antipodal";
        case Termination::StopCondition: return "stop-condition";
    }
    return "unknown";
}

std::size_t system_dim(System s) {
    switch (s) {
        case System::Full: return 12;
        case System::RegularisedTimed: return 6;
        case System::InvariantPlaneQ:
        case System::InvariantPlaneXi:
        case System::InvariantPlaneReg:
        case System::InvariantPlaneBlowup: return 2;
        default: return 5;
    }
}

std::vector<std::string> component_names(System s) {
    switch (s) {
        case System::Full:
            return {"q1x", "q1y", "q1z", "q2x", "q2y", "q2z", "p1x", "p1y", "p1z", "p2x", "p2y", "p2z"};
        case System::Reduced: return {"m1", "m2", "m3", "q", "p"};
        case System::Poly: return {"m1", "m2", "m3", "xi", "p"};
        case System::Regularised: return {"m1", "m2", "m3", "eta", "zeta"};
        case System::RegularisedTimed: return {"m1", "m2", "m3", "eta", "zeta", "t_phys"};
        case System::InvariantPlaneQ: return {"q", "p"};
        case System::InvariantPlaneXi: return {"xi", "p"};
        case System::InvariantPlaneReg: return {"eta", "zeta"};
        case System::InvariantPlaneBlowup: return {"r", "phi"};
        case System::Chart1: return {"m1", "m2", "r", "q1", "q2"};
        case System::Chart2: return {"m1", "m2", "R", "Q1", "Q2"};
    }
    return {};
}

RhsFn make_rhs(const SystemSpec& spec) {
    const SystemSpec sp = spec;
    switch (sp.system) {
        case System::Full:
            return [sp](double, const double* y, double* dy) {
                Vec12 a;
                std::copy(y, y + 12, a.begin());
                const Vec12 d = full_rhs(full_from_array(a), sp.masses);
                std::copy(d.begin(), d.end(), dy);
            };
        case System::Reduced:
            return [sp](double, const double* y, double* dy) {
                const Vec5 d = reduced_rhs({y[0], y[1], y[2], y[3], y[4]}, sp.masses);
                std::copy(d.begin(), d.end(), dy);
            };
        case System::Poly:
            return [](double, const double* y, double* dy) {
                const Vec5 d = poly_rhs({y[0], y[1], y[2], y[3], y[4]});
                std::copy(d.begin(), d.end(), dy);
            };
        case System::Regularised:
            return [](double, const double* y, double* dy) {
                const Vec5 d = regularised_rhs({y[0], y[1], y[2], y[3], y[4]});
                std::copy(d.begin(), d.end(), dy);
            };
        case System::RegularisedTimed:
            return [](double, const double* y, double* dy) {
                const Vec5 d = regularised_rhs({y[0], y[1], y[2], y[3], y[4]});
                std::copy(d.begin(), d.end(), dy);
                dy[5] = y[3] * y[3];
            };
        case System::InvariantPlaneQ:
            return [sp](double, const double* y, double* dy) {
                const Vec2 d = invariant_plane_rhs_q(y[0], y[1], sp.sign, sp.C);
                dy[0] = d[0];
                dy[1] = d[1];
            };
        case System::InvariantPlaneXi:
            return [sp](double, const double* y, double* dy) {
                const Vec2 d = invariant_plane_rhs_xi(y[0], y[1], sp.sign, sp.C);
                dy[0] = d[0];
                dy[1] = d[1];
            };
        case System::InvariantPlaneReg:
            return [sp](double, const double* y, double* dy) {
                const Vec2 d = invariant_plane_reg_rhs(y[0], y[1], sp.sign, sp.C);
                dy[0] = d[0];
                dy[1] = d[1];
            };
        case System::InvariantPlaneBlowup:
            return [sp](double, const double* y, double* dy) {
                const Vec2 d = invariant_plane_blowup_rhs(y[0], y[1], sp.sign, sp.C);
                dy[0] = d[0];
                dy[1] = d[1];
            };
        case System::Chart1:
        case System::Chart2:
            return [sp](double, const double* y, double* dy) {
                BlowupChartState s;
                s.chart = sp.system == System::Chart1 ? Chart::Chart1 : Chart::Chart2;
                s.m1 = y[0];
                s.m2 = y[1];
                s.radial = y[2];
                s.angle1 = y[3];
                s.angle2 = y[4];
                const Vec5 d = blowup_chart_rhs(s, sp.divided);
                std::copy(d.begin(), d.end(), dy);
            };
    }
    throw Error(ErrorKind::Domain, "unknown system");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> poly_invariants(double m1, double m2, double m3, double xi, double p) {
    return {hamiltonian_poly({m1, m2, m3, xi, p}), casimir(m1, m2, m3)};
}

}  // namespace

std::pair<double, double> invariants(const SystemSpec& spec, const double* y) {
    switch (spec.system) {
        case System::Full: {
            Vec12 a;
            std::copy(y, y + 12, a.begin());
            const FullState f = full_from_array(a);
            const Vec3 L = angular_momentum(f);
            return {hamiltonian_full(f, spec.masses), dot(L, L)};
        }
        case System::Reduced:
            if (!(y[3] > 0 && y[3] < M_PI)) return {kNaN, casimir(y[0], y[1], y[2])};
            return {hamiltonian_reduced({y[0], y[1], y[2], y[3], y[4]}, spec.masses), casimir(y[0], y[1], y[2])};
        case System::Poly: return poly_invariants(y[0], y[1], y[2], y[3], y[4]);
        case System::Regularised:
        case System::RegularisedTimed:
            if (y[3] == 0) return {kNaN, casimir(y[0], y[1], y[2])};
            return poly_invariants(y[0], y[1], y[2], 1 / y[3], y[4] / y[3]);
        case System::InvariantPlaneQ:
        case System::InvariantPlaneXi:
        case System::InvariantPlaneReg:
        case System::InvariantPlaneBlowup: {
            double xi = kNaN, p = kNaN;
            if (spec.system == System::InvariantPlaneQ) {
                if (!(y[0] > 0 && y[0] < M_PI)) return {kNaN, spec.C};
                xi = std::cos(y[0]) / std::sin(y[0]);
                p = y[1];
            } else if (spec.system == System::InvariantPlaneXi) {
                xi = y[0];
                p = y[1];
            } else {
                double eta = y[0], zeta = y[1];
                if (spec.system == System::InvariantPlaneBlowup) {
                    eta = y[0] * y[0] * std::sin(y[1]);
                    zeta = y[0] * std::cos(y[1]);
                }
                if (eta == 0) return {kNaN, spec.C};
                xi = 1 / eta;
                p = zeta / eta;
            }
            return poly_invariants(-spec.sign * std::sqrt(spec.C), 0, 0, xi, p);
        }
        case System::Chart1:
        case System::Chart2: {
            BlowupChartState s;
            s.chart = spec.system == System::Chart1 ? Chart::Chart1 : Chart::Chart2;
            s.m1 = y[0];
            s.m2 = y[1];
            s.radial = y[2];
            s.angle1 = y[3];
            s.angle2 = y[4];
            const Vec3 v = chart_pushforward(s);
            const double C = casimir(y[0], y[1], v[0]);
            if (v[1] == 0) return {kNaN, C};
            return {poly_invariants(y[0], y[1], v[0], 1 / v[1], v[2] / v[1]).first, C};
        }
    }
    return {kNaN, kNaN};
}

std::optional<PolyState> poly_view(const SystemSpec& spec, const double* y) {
    switch (spec.system) {
        case System::Poly: return PolyState{y[0], y[1], y[2], y[3], y[4]};
        case System::Reduced:
            if (!(y[3] > 0 && y[3] < M_PI)) return std::nullopt;
            return PolyState{y[0], y[1], y[2], std::cos(y[3]) / std::sin(y[3]), y[4]};
        case System::Regularised:
        case System::RegularisedTimed:
            if (y[3] == 0) return std::nullopt;
            return PolyState{y[0], y[1], y[2], 1 / y[3], y[4] / y[3]};
        case System::InvariantPlaneXi: return PolyState{-spec.sign * std::sqrt(spec.C), 0, 0, y[0], y[1]};
        case System::InvariantPlaneQ:
            if (!(y[0] > 0 && y[0] < M_PI)) return std::nullopt;
            return PolyState{-spec.sign * std::sqrt(spec.C), 0, 0, std::cos(y[0]) / std::sin(y[0]), y[1]};
        default: return std::nullopt;
    }
}

std::pair<double, double> max_relative_drift(const Trajectory& traj) {
    double dh = 0, dc = 0;
    const double cscale = std::abs(traj.C0) > 0 ? std::abs(traj.C0) : 1.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double hscale = std::abs(traj.H0);
        if (const auto ps = poly_view(traj.spec, traj.state(i))) hscale = std::max(hscale, hamiltonian_poly_scale(*ps));
        if (!(hscale > 0)) hscale = 1.0;
        if (i < traj.drift_H.size() && std::isfinite(traj.drift_H[i])) dh = std::max(dh, traj.drift_H[i] / hscale);
        if (i < traj.drift_C.size() && std::isfinite(traj.drift_C[i])) dc = std::max(dc, traj.drift_C[i] / cscale);
    }
    return {dh, dc};
}

double xi_of(const SystemSpec& spec, const double* y) {
    switch (spec.system) {
        case System::Poly: return y[3];
        case System::InvariantPlaneXi: return y[0];
        case System::Reduced: return std::cos(y[3]) / std::sin(y[3]);
        case System::InvariantPlaneQ: return std::cos(y[0]) / std::sin(y[0]);
        case System::Full: {
            const double c = y[0] * y[3] + y[1] * y[4] + y[2] * y[5];
            return c / std::sqrt(std::max(0.0, 1 - c * c));
        }
        default: return kNaN;
    }
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

void eval_dense(const DenseSegment& s, std::size_t dim, double t, double* out) {
    const double th = (t - s.t0) / s.h;
    const double th1 = 1 - th;
    for (std::size_t i = 0; i < dim; ++i) {
        const double* c = s.coef.data();
        out[i] = c[i] + th * (c[dim + i] + th1 * (c[2 * dim + i] + th * (c[3 * dim + i] + th1 * c[4 * dim + i])));
    }
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Stepper {
    const RhsFn& f;
    std::size_t n;
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;

    Stepper(const RhsFn& fn, std::size_t dim)
        : f(fn), n(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim),
          ynew(dim), err(dim) {}

    // k1 must hold f(t, y). Returns false if a stage evaluation failed.
    bool step(double t, const std::vector<double>& y, double h) {
        try {
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            f(t + c2 * h, ytmp.data(), k2.data());
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            f(t + c3 * h, ytmp.data(), k3.data());
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            f(t + c4 * h, ytmp.data(), k4.data());
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            f(t + c5 * h, ytmp.data(), k5.data());
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            f(t + h, ytmp.data(), k6.data());
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            f(t + h, ynew.data(), k7.data());
        } catch (const Error&) {
            return false;
        }
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        return all_finite(ynew) && all_finite(k7);
    }

    double error_norm(const std::vector<double>& y, const IntegratorConfig& cfg) const {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double e = err[i] / sc;
            s += e * e;
        }
        return std::sqrt(s / static_cast<double>(n));
    }

    DenseSegment dense(double t, const std::vector<double>& y, double h) const {
        DenseSegment s;
        s.t0 = t;
        s.h = h;
        s.coef.resize(5 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = ynew[i] - y[i];
            const double bspl = h * k1[i] - dy;
            s.coef[i] = y[i];
            s.coef[n + i] = dy;
            s.coef[2 * n + i] = bspl;
            s.coef[3 * n + i] = dy - h * k7[i] - bspl;
            s.coef[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        return s;
    }
};

double initial_step(const RhsFn& f, double t0, const std::vector<double>& y0, const std::vector<double>& f0,
                    const IntegratorConfig& cfg) {
    const std::size_t n = y0.size();
    double d0 = 0, d1n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1n += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1n = std::sqrt(d1n / n);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, cfg.max_step);
    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
    try {
        f(t0 + h0, y1.data(), f1.data());
    } catch (const Error&) {
        return h0 * 1e-3;
    }
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100 * h0, h1, cfg.max_step});
}

}  // namespace

std::vector<double> Trajectory::dense(double t) const {
    if (segments.empty()) throw Error(ErrorKind::Range, "trajectory has no dense output");
    if (t < times.front() || t > times.back()) throw Error(ErrorKind::Range, "time outside trajectory range");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const DenseSegment& s) { return v < s.t0; });
    const DenseSegment& s = it == segments.begin() ? segments.front() : *(it - 1);
    std::vector<double> out(dim);
    eval_dense(s, dim, t, out.data());
    return out;
}

double Trajectory::max_drift_H() const {
    double m = 0;
    for (double d : drift_H)
        if (std::isfinite(d)) m = std::max(m, d);
    return m;
}

double Trajectory::max_drift_C() const {
    double m = 0;
    for (double d : drift_C)
        if (std::isfinite(d)) m = std::max(m, d);
    return m;
}

namespace {

using Monitor = std::function<int(double t, const double* y)>;

// Event codes returned by the monitor: 0 nothing, 1 collision, 2 antipodal.
Trajectory run(const RhsFn& f, std::size_t n, const std::vector<double>& y0, double t0, double t1,
               const IntegratorConfig& cfg, const StopFn& stop, const Monitor& monitor,
               const std::function<double(const double*)>& event_fn) {
    if (y0.size() != n) throw Error(ErrorKind::InvalidState, "initial state has the wrong dimension");
    if (!all_finite(y0)) throw Error(ErrorKind::InvalidState, "initial state is not finite");
    if (!(t1 > t0)) throw Error(ErrorKind::Domain, "t_span must be increasing");
    if (!(cfg.rel_tol > 0 && cfg.abs_tol > 0)) throw Error(ErrorKind::Domain, "tolerances must be positive");

    Trajectory tr;
    tr.dim = n;
    tr.times.push_back(t0);
    tr.states.insert(tr.states.end(), y0.begin(), y0.end());

    Stepper st(f, n);
    std::vector<double> y = y0;
    double t = t0;
    try {
        f(t, y.data(), st.k1.data());
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidState, std::string("initial state rejected: ") + e.what());
    }
    double h = cfg.initial_step > 0 ? cfg.initial_step : initial_step(f, t, y, st.k1, cfg);
    double facold = 1e-4;
    bool last_rejected = false;
    constexpr double beta = 0.04, safe = 0.9, fac1 = 0.2, fac2 = 10.0;
    const double expo1 = 0.2 - beta * 0.75;

    while (true) {
        if (tr.accepted_steps >= cfg.max_steps) {
            std::ostringstream os;
            os << "step budget of " << cfg.max_steps << " exhausted at t=" << t;
            throw Error(ErrorKind::BudgetExhausted, os.str());
        }
        bool last = false;
        h = std::min(h, cfg.max_step);
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }
        if (h <= std::abs(t) * 1e-15 || h < 1e-300) {
            std::ostringstream os;
            os.precision(17);
            os << "step size underflow at t=" << t << " state=(";
            for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << y[i];
            os << ")";
            throw Error(ErrorKind::StepUnderflow, os.str());
        }
        const bool ok = st.step(t, y, h);
        const double err = ok ? st.error_norm(y, cfg) : std::numeric_limits<double>::infinity();
        if (!(err <= 1.0)) {
            ++tr.rejected_steps;
            const double fac11 = std::isfinite(err) ? std::pow(err, expo1) : 1.0 / fac1;
            h /= std::min(1.0 / fac1, fac11 / safe);
            if (!ok) h *= 0.25;
            last_rejected = true;
            continue;
        }
        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
        double hnew = h / fac;
        facold = std::max(err, 1e-4);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;

        DenseSegment seg = st.dense(t, y, h);
        const double tnew = last ? t1 : t + h;
        ++tr.accepted_steps;

        const int ev = monitor ? monitor(tnew, st.ynew.data()) : 0;
        if (ev != 0) {
            // bisection on the dense output for the crossing of the event function
            double lo = 0, hi = 1;
            std::vector<double> ys(n);
            for (int it = 0; it < 200 && (hi - lo) * h > 1e-12 * std::max(1.0, std::abs(t)) * 1e-6; ++it) {
                const double mid = 0.5 * (lo + hi);
                eval_dense(seg, n, t + mid * h, ys.data());
                if (event_fn(ys.data()) * (ev == 1 ? 1.0 : -1.0) >= 0)
                    hi = mid;
                else
                    lo = mid;
                if (hi - lo < 1e-17) break;
            }
            const double tc = t + hi * h;
            eval_dense(seg, n, tc, ys.data());
            if (cfg.record_dense) tr.segments.push_back(std::move(seg));
            tr.times.push_back(tc);
            tr.states.insert(tr.states.end(), ys.begin(), ys.end());
            tr.termination = ev == 1 ? Termination::Collision : Termination::Antipodal;
            break;
        }
        if (cfg.record_dense) tr.segments.push_back(std::move(seg));
        t = tnew;
        y = st.ynew;
        std::copy(st.k7.begin(), st.k7.end(), st.k1.begin());
        tr.times.push_back(t);
        tr.states.insert(tr.states.end(), y.begin(), y.end());
        if (last) {
            tr.termination = Termination::EndReached;
            break;
        }
        if (stop && stop(t, y.data())) {
            tr.termination = Termination::StopCondition;
            break;
        }
        h = hnew;
    }
    return tr;
}

}  // namespace

Trajectory integrate_rhs(const RhsFn& f, std::size_t dim, const std::vector<double>& y0, double t0, double t1,
                         const IntegratorConfig& cfg, const StopFn& stop) {
    return run(f, dim, y0, t0, t1, cfg, stop, {}, {});
}

Trajectory integrate(const SystemSpec& spec, const std::vector<double>& y0, double t0, double t1,
                     const IntegratorConfig& cfg, const StopFn& stop) {
    const std::size_t n = system_dim(spec.system);
    if (y0.size() != n) throw Error(ErrorKind::InvalidState, "initial state has the wrong dimension");
    if (spec.system == System::Reduced) validate(ReducedState{y0[0], y0[1], y0[2], y0[3], y0[4]});
    if (spec.system == System::Full) {
        Vec12 a;
        std::copy(y0.begin(), y0.end(), a.begin());
        validate(full_from_array(a));
    }
    if (!(cfg.xi_collision_threshold > 1)) throw Error(ErrorKind::Domain, "collision threshold must exceed 1");

    const bool has_xi = std::isfinite(xi_of(spec, y0.data()));
    const double xi_stop = std::min(cfg.xi_collision_threshold,
                                    cfg.q_floor > 0 ? std::cos(cfg.q_floor) / std::sin(cfg.q_floor)
                                                    : std::numeric_limits<double>::infinity());
    Monitor monitor;
    std::function<double(const double*)> event_fn;
    if (has_xi) {
        monitor = [spec, xi_stop](double, const double* y) {
            const double xi = xi_of(spec, y);
            if (xi >= xi_stop) return 1;
            if (xi <= -xi_stop) return 2;
            return 0;
        };
        event_fn = [spec, xi_stop](const double* y) {
            const double xi = xi_of(spec, y);
            return xi >= 0 ? xi - xi_stop : -xi - xi_stop;
        };
    }
    Trajectory tr = run(make_rhs(spec), n, y0, t0, t1, cfg, stop, monitor, event_fn);
    tr.spec = spec;
    const auto inv0 = invariants(spec, y0.data());
    tr.H0 = inv0.first;
    tr.C0 = inv0.second;
    tr.drift_H.resize(tr.size());
    tr.drift_C.resize(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto inv = invariants(spec, tr.state(i));
        tr.drift_H[i] = std::abs(inv.first - tr.H0);
        tr.drift_C[i] = std::abs(inv.second - tr.C0);
    }
    if (tr.termination == Termination::Collision) {
        try {
            tr.terminal_event = detect_collision(tr, cfg);
        } catch (const Error&) {
            tr.terminal_event.reset();
        }
    }
    return tr;
}

namespace {

double xi_dot_of(const SystemSpec& spec, const RhsFn& f, double t, const double* y) {
    std::vector<double> d(system_dim(spec.system));
    f(t, y, d.data());
    switch (spec.system) {
        case System::Poly: return d[3];
        case System::InvariantPlaneXi: return d[0];
        case System::Reduced: return -d[3] / (std::sin(y[3]) * std::sin(y[3]));
        case System::InvariantPlaneQ: return -d[0] / (std::sin(y[0]) * std::sin(y[0]));
        case System::Full: {
            const double c = y[0] * y[3] + y[1] * y[4] + y[2] * y[5];
            const double cd = d[0] * y[3] + d[1] * y[4] + d[2] * y[5] + y[0] * d[3] + y[1] * d[4] + y[2] * d[5];
            const double s2 = 1 - c * c;
            return cd / (s2 * std::sqrt(s2));
        }
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

std::optional<CollisionEvent> detect_collision(const Trajectory& traj, const IntegratorConfig& cfg) {
    if (traj.size() < 2) return std::nullopt;
    const SystemSpec& spec = traj.spec;
    const double xi_end = xi_of(spec, traj.state(traj.size() - 1));
    if (!std::isfinite(xi_end))
        throw Error(ErrorKind::Domain, "collision detection needs a trajectory carrying xi or q");
    const double xi_stop = std::min(cfg.xi_collision_threshold, std::cos(cfg.q_floor) / std::sin(cfg.q_floor));
    if (xi_end < xi_stop * (1 - 1e-9)) return std::nullopt;

    const RhsFn f = make_rhs(spec);
    std::vector<double> lx, ly, ts, xs, xds;
    for (std::size_t i = traj.size(); i-- > 0;) {
        const double* y = traj.state(i);
        const double xi = xi_of(spec, y);
        if (!(xi >= xi_end / 10)) break;
        const double xd = xi_dot_of(spec, f, traj.times[i], y);
        if (!(xd > 0)) break;
        lx.push_back(std::log(xi));
        ly.push_back(std::log(xd));
        ts.push_back(traj.times[i]);
        xs.push_back(xi);
        xds.push_back(xd);
    }
    if (lx.size() < 4) throw Error(ErrorKind::InsufficientTail, "fewer than four samples in the final decade of xi");
    const LinearFit fit = linear_fit(lx, ly);
    if (!(fit.slope > 1)) throw Error(ErrorKind::AmbiguousTail, "xi growth is not of pole type");
    if (fit.residual_rms > 0.05) throw Error(ErrorKind::AmbiguousTail, "pole-fit residual too large");
    CollisionEvent ev;
    ev.beta = 1.0 / (fit.slope - 1);
    ev.beta_stderr = fit.slope_stderr / ((fit.slope - 1) * (fit.slope - 1));
    ev.fit_residual = fit.residual_rms;
    std::vector<double> est;
    for (std::size_t i = 0; i < ts.size(); ++i) est.push_back(ts[i] + ev.beta * xs[i] / xds[i]);
    ev.t_star = mean(est);
    ev.t_star_stderr = est.size() > 1 ? stddev(est) / std::sqrt(static_cast<double>(est.size())) : 0.0;
    ev.terminal_state = traj.state_vec(traj.size() - 1);
    ev.extrapolation_order = 1;
    if (ev.t_star < traj.times.back()) ev.t_star = traj.times.back();
    return ev;
}

RegularisedContinuation continue_regularised(const Trajectory& traj, const IntegratorConfig& cfg, double eta_stop) {
    if (traj.size() == 0) throw Error(ErrorKind::InvalidState, "empty trajectory");
    const double* y = traj.state(traj.size() - 1);
    PolyState ps;
    switch (traj.spec.system) {
        case System::Poly: ps = {y[0], y[1], y[2], y[3], y[4]}; break;
        case System::Reduced: ps = to_poly(ReducedState{y[0], y[1], y[2], y[3], y[4]}); break;
        case System::InvariantPlaneXi: ps = {-traj.spec.sign * std::sqrt(traj.spec.C), 0, 0, y[0], y[1]}; break;
        default: throw Error(ErrorKind::InvalidState, "handoff needs a poly, reduced or invariant-plane trajectory");
    }
    if (!(ps.xi > 1)) throw Error(ErrorKind::InvalidState, "handoff state is not heading to collision");
    const RegState rs = to_regularised(ps);
    RegularisedContinuation out;
    out.handoff_residual = std::abs(rs.eta * ps.xi - 1);
    if (out.handoff_residual > 1e-9) throw Error(ErrorKind::InvalidState, "handoff state is inconsistent");
    if (eta_stop <= 0) eta_stop = rs.eta * 1e-6;
    SystemSpec spec;
    spec.system = System::RegularisedTimed;
    const std::vector<double> y0{rs.m1, rs.m2, rs.m3, rs.eta, rs.zeta, traj.times.back()};
    IntegratorConfig c = cfg;
    c.max_step = std::numeric_limits<double>::infinity();
    out.traj = integrate(spec, y0, 0.0, 1e15, c, [eta_stop](double, const double* s) {
        return std::abs(s[3]) <= eta_stop;
    });
    const double* ye = out.traj.state(out.traj.size() - 1);
    std::vector<double> d(6);
    make_rhs(spec)(0, ye, d.data());
    const double eta = ye[3];
    const double rate = std::abs(2 * d[3] / eta);  // |d ln(eta^2)/dtau|
    out.tail_estimate = rate > 0 ? eta * eta / rate : 0.0;
    out.t_star = ye[5] + out.tail_estimate;
    return out;
}

}  // namespace sphere2b
