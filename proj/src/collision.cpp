#include "sphere2b/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphere2b/stats.hpp"

namespace sphere2b {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::Precedes: return "precedes";
        case Relation::Dominates: return "dominates";
        case Relation::Comparable: return "comparable";
        case Relation::BoundedBy: return "bounded-by";
        case Relation::AtLeast: return "at-least";
    }
    return "unknown";
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys, double x_min,
                          double x_max) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::Domain, "series lengths differ");
    std::vector<double> lx, ly;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] >= x_min && xs[i] <= x_max)) continue;
        if (!(xs[i] > 0 && ys[i] > 0)) throw Error(ErrorKind::Domain, "power-law fit needs positive series");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
        lo = std::min(lo, xs[i]);
        hi = std::max(hi, xs[i]);
    }
    if (lx.size() < 3 || !(hi >= 10 * lo * (1 - 1e-12)))
        throw Error(ErrorKind::WindowTooShort, "fit window spans less than one decade");
    const LinearFit f = linear_fit(lx, ly);
    PowerLawFit out;
    out.exponent = f.slope;
    out.stderr_ = f.slope_stderr;
    out.intercept = f.intercept;
    out.residual_rms = f.residual_rms;
    out.x_min = lo;
    out.x_max = hi;
    out.samples = lx.size();
    return out;
}

TailSeries tail_series(const Trajectory& traj, double xi_min) {
    TailSeries ts;
    std::size_t first = traj.size();
    while (first > 0) {
        const auto ps = poly_view(traj.spec, traj.state(first - 1));
        if (!ps) {
            if (first == traj.size()) throw Error(ErrorKind::Domain, "trajectory has no polynomial-coordinate view");
            break;
        }
        if (!(ps->xi >= xi_min)) break;
        --first;
    }
    for (std::size_t i = first; i < traj.size(); ++i) {
        const PolyState s = *poly_view(traj.spec, traj.state(i));
        const Vec5 d = poly_rhs(s);
        ts.t.push_back(traj.times[i]);
        ts.m1.push_back(s.m1);
        ts.m2.push_back(s.m2);
        ts.m3.push_back(s.m3);
        ts.xi.push_back(s.xi);
        ts.p.push_back(s.p);
        ts.m1_dot.push_back(d[0]);
        ts.m2_dot.push_back(d[1]);
        ts.m3_dot.push_back(d[2]);
        ts.xi_dot.push_back(d[3]);
        ts.p_dot.push_back(d[4]);
    }
    return ts;
}

double i_ddot(const PolyState& s) {
    const double w = std::sqrt(1 + s.xi * s.xi);
    const double cq = s.xi / w, sq = 1 / w;
    const double qd = 2 * s.p - s.m1;
    return 2 * cq * qd * qd - 4 / sq * (1 + s.m2 * s.m3 - 2 * s.m3 * s.m3 * s.xi) -
           2 * cq * (-s.m2 * s.m2 + s.m3 * s.m3 + 2 * s.m2 * s.m3 * s.xi);
}

IDiagnostics i_diagnostics(const Trajectory& traj, double xi_min) {
    IDiagnostics d;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto ps = poly_view(traj.spec, traj.state(i));
        if (!ps || !(ps->xi >= xi_min)) continue;
        const double w = std::sqrt(1 + ps->xi * ps->xi);
        const double cq = ps->xi / w, sq = 1 / w;
        d.t.push_back(traj.times[i]);
        d.xi.push_back(ps->xi);
        d.I.push_back(2 * (1 - cq));
        d.I_dot.push_back(2 * sq * (2 * ps->p - ps->m1));
        const double idd = i_ddot(*ps);
        d.I_ddot.push_back(idd);
        d.ratio.push_back(idd / ps->xi);
    }
    return d;
}

AsymptoticVerdict bounded_verdict(const std::string& name, const std::vector<double>& xi,
                                  const std::vector<double>& ratio, double xi_min, double xi_max) {
    AsymptoticVerdict v;
    v.name = name;
    v.relation = Relation::BoundedBy;
    std::vector<double> x, y;
    double lo = std::numeric_limits<double>::infinity(), hi = 0, mx = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (!(xi[i] >= xi_min && xi[i] <= xi_max)) continue;
        lo = std::min(lo, xi[i]);
        hi = std::max(hi, xi[i]);
        const double a = std::abs(ratio[i]);
        if (!std::isfinite(a)) {
            mx = std::numeric_limits<double>::infinity();
            continue;
        }
        mx = std::max(mx, a);
        if (a > 0) {
            x.push_back(xi[i]);
            y.push_back(a);
        }
    }
    if (!(hi >= 100 * lo * (1 - 1e-12)))
        throw Error(ErrorKind::InsufficientTail, name + ": tail spans less than two decades of xi");
    v.window_min = lo;
    v.window_max = hi;
    v.max_ratio = mx;
    if (mx == 0) {
        v.trivial = true;
        v.pass = true;
        return v;
    }
    if (x.size() >= 3) {
        const PowerLawFit f = fit_power_law(x, y, lo, hi);
        v.fitted_exponent = f.exponent;
        v.stderr_ = f.stderr_;
    }
    v.pass = std::isfinite(mx) && v.fitted_exponent <= 0.05;
    return v;
}

std::vector<AsymptoticVerdict> verify_bounds(const Trajectory& traj, const BoundsOptions& opts) {
    const TailSeries ts = tail_series(traj, opts.xi_min);
    if (ts.size() == 0 || ts.xi.back() < 1e4)
        throw Error(ErrorKind::InsufficientTail, "bounds need a tail reaching xi >= 1e4");
    const std::size_t n = ts.size();
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ts.xi[i], r = std::sqrt(x);
        a[i] = ts.m3[i] * x;
        b[i] = (2 * ts.m3[i] * x - ts.m2[i]) * r;
        c[i] = (ts.p[i] + r - ts.m1[i] / 2) * r;
    }
    std::vector<AsymptoticVerdict> out;
    out.push_back(bounded_verdict("m3*xi", ts.xi, a, opts.xi_min, opts.xi_max));
    out.push_back(bounded_verdict("(2*m3*xi-m2)*sqrt(xi)", ts.xi, b, opts.xi_min, opts.xi_max));
    out.push_back(bounded_verdict("(p+sqrt(xi)-m1/2)*sqrt(xi)", ts.xi, c, opts.xi_min, opts.xi_max));
    if (opts.negative_control) {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = ts.m3[i] * ts.xi[i] * ts.xi[i];
        out.push_back(bounded_verdict("m3*xi^2", ts.xi, d, opts.xi_min, opts.xi_max));
    }
    return out;
}

namespace {

double m_speed(const SystemSpec& spec, const double* y) {
    const auto ps = poly_view(spec, y);
    if (!ps) throw Error(ErrorKind::Domain, "state has no polynomial-coordinate view");
    const Vec5 d = poly_rhs(*ps);
    return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

// 5-point Gauss-Legendre on [a, b] of |mdot| along the dense output of segment k.
double segment_length(const Trajectory& traj, std::size_t k, double a, double b) {
    static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const DenseSegment& s = traj.segments[k];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<double> y(traj.dim);
    double acc = 0;
    for (int j = 0; j < 5; ++j) {
        const double t = mid + half * x[j];
        const double th = (t - s.t0) / s.h, th1 = 1 - th;
        const std::size_t n = traj.dim;
        for (std::size_t i = 0; i < n; ++i) {
            const double* c = s.coef.data();
            y[i] = c[i] + th * (c[n + i] + th1 * (c[2 * n + i] + th * (c[3 * n + i] + th1 * c[4 * n + i])));
        }
        acc += w[j] * m_speed(traj.spec, y.data());
    }
    return acc * half;
}

}  // namespace

double casimir_sphere_arclength(const Trajectory& traj, double xi_max) {
    if (traj.size() < 2) throw Error(ErrorKind::Range, "trajectory too short");
    if (traj.segments.size() + 1 < traj.size()) throw Error(ErrorKind::Range, "arclength needs dense output");
    const std::size_t n = traj.size();
    if (!(xi_of(traj.spec, traj.state(n - 1)) >= xi_max * (1 - 1e-12)))
        throw Error(ErrorKind::Range, "xi_max beyond the trajectory");
    // last sample below xi_max; the final approach crosses xi_max in the segment that follows it
    std::size_t j = n - 1;
    while (j > 0 && xi_of(traj.spec, traj.state(j)) >= xi_max) --j;
    if (xi_of(traj.spec, traj.state(j)) >= xi_max) return 0.0;
    double lo = traj.times[j], hi = traj.times[j + 1];
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto y = traj.dense(mid);
        if (xi_of(traj.spec, y.data()) >= xi_max)
            hi = mid;
        else
            lo = mid;
    }
    double L = 0;
    for (std::size_t k = 0; k < j; ++k) L += segment_length(traj, k, traj.times[k], traj.times[k + 1]);
    L += segment_length(traj, j, traj.times[j], hi);
    return L;
}

ArclengthTail arclength_tail(const Trajectory& traj, double xi_min) {
    const TailSeries ts = tail_series(traj, xi_min);
    if (ts.size() == 0 || ts.xi.back() < 100 * xi_min)
        throw Error(ErrorKind::InsufficientTail, "arclength tail needs two decades of xi");
    ArclengthTail out;
    const double xi_end = ts.xi.back();
    for (double x = xi_min; x <= xi_end * (1 + 1e-12); x *= 10) out.xi.push_back(x);
    if (out.xi.back() < xi_end) out.xi.push_back(xi_end);
    for (double x : out.xi) out.length.push_back(casimir_sphere_arclength(traj, std::min(x, xi_end)));
    std::vector<double> x, g;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double sp = std::sqrt(ts.m1_dot[i] * ts.m1_dot[i] + ts.m2_dot[i] * ts.m2_dot[i] +
                                    ts.m3_dot[i] * ts.m3_dot[i]);
        const double v = ts.xi[i] * ts.xi[i] * sp / std::abs(ts.xi_dot[i]);
        out.c = std::max(out.c, v);
        if (v > 0) {
            x.push_back(ts.xi[i]);
            g.push_back(v);
        }
    }
    if (x.size() >= 3) out.c_slope = fit_power_law(x, g, xi_min, xi_end).exponent;
    const std::size_t k = out.length.size();
    const double prev_xi = xi_end / 10;
    const double L_prev = casimir_sphere_arclength(traj, prev_xi);
    out.last_decrement = out.length[k - 1] - L_prev;
    out.bound = out.c / prev_xi;
    out.remaining = out.c / xi_end;
    bool shrinking = true;
    for (std::size_t i = 2; i + 1 < k; ++i)
        if (out.length[i] - out.length[i - 1] > out.length[i - 1] - out.length[i - 2] + 1e-15) shrinking = false;
    out.pass = std::isfinite(out.c) && out.c_slope <= 0.05 && out.last_decrement <= out.bound && shrinking;
    return out;
}

OmegaLimit estimate_omega_limit(const Trajectory& traj, double xi_min) {
    const TailSeries ts = tail_series(traj, xi_min);
    if (ts.size() < 8 || ts.xi.back() < 1e4)
        throw Error(ErrorKind::InsufficientTail, "omega-limit estimate needs a tail reaching xi >= 1e4");
    std::vector<double> s(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) s[i] = 1 / std::sqrt(ts.xi[i]);
    OmegaLimit out;
    const double floor = std::max(traj.max_drift_C(), 1e-14 * std::max(1.0, std::abs(traj.C0)));
    const std::vector<double>* comp[3] = {&ts.m1, &ts.m2, &ts.m3};
    for (int c = 0; c < 3; ++c) {
        const auto& v = *comp[c];
        if (std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); })) {
            out.m[c] = v.front();
            out.error[c] = 0;
            continue;
        }
        const double c3 = polyfit(s, v, 3)[0];
        const double c2 = polyfit(s, v, 2)[0];
        out.m[c] = c3;
        out.error[c] = std::abs(c3 - c2) + floor;
    }
    const double scale = std::max(1.0, std::sqrt(std::abs(traj.C0)));
    for (int c = 0; c < 3; ++c)
        if (!(out.error[c] <= 0.1 * scale)) throw Error(ErrorKind::NonConvergent, "omega-limit extrapolation diverged");
    out.casimir_defect = std::abs(out.m[0] * out.m[0] + out.m[1] * out.m[1] - traj.C0);
    out.casimir_error = 2 * std::abs(out.m[0]) * out.error[0] + 2 * std::abs(out.m[1]) * out.error[1] +
                        out.error[0] * out.error[0] + out.error[1] * out.error[1] +
                        std::pow(std::abs(out.m[2]) + out.error[2], 2);
    return out;
}

double winding_count(const Trajectory& traj, double xi_min, double xi_max) {
    if (!(traj.C0 > 1e-14)) throw Error(ErrorKind::Domain, "winding needs C > 0");
    const TailSeries ts = tail_series(traj, xi_min);
    double total = 0, prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts.xi[i] > xi_max) break;
        const double phi = std::atan2(ts.m1[i], ts.m2[i]);
        if (std::isfinite(prev)) {
            double d = phi - prev;
            d = std::remainder(d, 2 * kPi);
            total += std::abs(d);
        }
        prev = phi;
    }
    return total;
}

AsymptoticVerdict equator_verdict(const Trajectory& traj, double xi_min) {
    if (!(traj.C0 > 1e-14)) throw Error(ErrorKind::Domain, "equator approach needs C > 0");
    const TailSeries ts = tail_series(traj, xi_min);
    const double L = std::sqrt(traj.C0);
    std::vector<double> r(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        r[i] = (kPi / 2 - std::acos(std::clamp(ts.m3[i] / L, -1.0, 1.0))) * ts.xi[i];
    return bounded_verdict("(pi/2-theta)*xi", ts.xi, r, xi_min, std::numeric_limits<double>::infinity());
}

namespace {

struct ShotOutcome {
    int sign = 0;
    bool collided = false;
};

// Sign of 2 m3 xi - m2 at the first turn of xi, or at the collision threshold.
ShotOutcome shoot_once(const PolyState& base, double m3, const IntegratorConfig& cfg, double t_max, double xi_turn) {
    SystemSpec spec;
    spec.system = System::Poly;
    IntegratorConfig c = cfg;
    c.record_dense = false;
    double prev = -std::numeric_limits<double>::infinity();
    const auto stop = [&prev, xi_turn](double, const double* y) {
        const bool turned = y[3] > xi_turn && y[3] < prev;
        prev = y[3];
        return turned;
    };
    const Trajectory tr = integrate(spec, {base.m1, base.m2, m3, base.xi, base.p}, 0, t_max, c, stop);
    if (tr.termination != Termination::Collision && tr.termination != Termination::StopCondition)
        throw Error(ErrorKind::NonConvergent,
                    "shooting trial at m3=" + std::to_string(m3) + " never approached collision");
    const double* y = tr.state(tr.size() - 1);
    return {2 * y[2] * y[3] - y[1] > 0 ? 1 : -1, tr.termination == Termination::Collision};
}

}  // namespace

ShootingResult shoot_collision_seed(const PolyState& base, double lo, double hi, const IntegratorConfig& cfg,
                                    double t_max, double xi_turn, int max_iter) {
    ShootingResult r;
    r.lo = lo;
    r.hi = hi;
    const ShotOutcome a = shoot_once(base, lo, cfg, t_max, xi_turn);
    const ShotOutcome b = shoot_once(base, hi, cfg, t_max, xi_turn);
    if (a.sign == b.sign) throw Error(ErrorKind::NonConvergent, "shooting bracket has no sign change");
    ShotOutcome at_lo = a, at_hi = b;
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        const double mid = 0.5 * (r.lo + r.hi);
        if (mid <= r.lo || mid >= r.hi) break;
        const ShotOutcome m = shoot_once(base, mid, cfg, t_max, xi_turn);
        if (m.sign == a.sign) {
            r.lo = mid;
            at_lo = m;
        } else {
            r.hi = mid;
            at_hi = m;
        }
    }
    r.value = at_lo.collided || !at_hi.collided ? r.lo : r.hi;
    r.hit = at_lo.collided || at_hi.collided;
    return r;
}

namespace {

CheckRecord from_verdict(const AsymptoticVerdict& v) {
    CheckRecord c;
    c.name = v.name;
    c.window_min = v.window_min;
    c.window_max = v.window_max;
    c.value = v.max_ratio;
    c.slope = v.fitted_exponent;
    c.stderr_ = v.stderr_;
    c.limit = 0.05;
    c.trivial = v.trivial;
    c.pass = v.pass;
    return c;
}

std::vector<double> running_median(const std::vector<double>& v, std::size_t w) {
    std::vector<double> out;
    for (std::size_t i = 0; i + w <= v.size(); ++i) {
        std::vector<double> win(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i + w));
        std::nth_element(win.begin(), win.begin() + static_cast<long>(w / 2), win.end());
        out.push_back(win[w / 2]);
    }
    return out;
}

}  // namespace

CollisionVerification verify_collision(const SystemSpec& spec, const std::vector<double>& y0,
                                       const VerifyOptions& opts) {
    CollisionVerification out;
    const Trajectory tr = integrate(spec, y0, 0, opts.t_max, opts.cfg);
    const double xi_end = xi_of(spec, tr.state(tr.size() - 1));
    out.xi_end = xi_end;
    if (tr.termination != Termination::Collision || !(xi_end >= 1e4))
        throw Error(ErrorKind::InsufficientTail, "seed did not reach the collision threshold");
    auto add = [&out](CheckRecord r) { out.records.push_back(std::move(r)); };

    out.event = detect_collision(tr, opts.cfg);
    {
        CheckRecord r;
        r.name = "pole_fit_t_star";
        r.value = out.event ? out.event->t_star : std::numeric_limits<double>::quiet_NaN();
        r.slope = out.event ? out.event->beta : 0;
        r.stderr_ = out.event ? out.event->t_star_stderr : 0;
        r.window_min = xi_end / 10;
        r.window_max = xi_end;
        r.pass = out.event.has_value() && std::isfinite(r.value);
        add(r);
    }
    if (out.event) {
        IntegratorConfig c = opts.cfg;
        c.xi_collision_threshold = opts.cfg.xi_collision_threshold / 10;
        c.record_dense = false;
        const Trajectory tr2 = integrate(spec, y0, 0, opts.t_max, c);
        CheckRecord r;
        r.name = "pole_fit_threshold_stability";
        r.window_min = c.xi_collision_threshold;
        r.window_max = opts.cfg.xi_collision_threshold;
        r.limit = 0.01;
        if (tr2.terminal_event) {
            r.value = std::abs(tr2.terminal_event->t_star - out.event->t_star) / std::abs(out.event->t_star);
            r.pass = r.value <= r.limit;
        } else {
            r.value = std::numeric_limits<double>::quiet_NaN();
        }
        add(r);

        CheckRecord q;
        q.name = "regularised_t_star";
        q.limit = 0.01;
        try {
            const RegularisedContinuation rc = continue_regularised(tr, opts.cfg);
            q.value = std::abs(rc.t_star - out.event->t_star) / std::abs(out.event->t_star);
            q.pass = q.value <= q.limit && rc.handoff_residual <= 1e-9;
        } catch (const Error&) {
            q.value = std::numeric_limits<double>::quiet_NaN();
        }
        add(q);
    }

    const TailSeries ts = tail_series(tr, 1e2);
    {
        std::vector<double> ap(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) ap[i] = std::abs(ts.p[i]);
        CheckRecord r;
        r.name = "p_exponent";
        r.window_min = 1e2;
        r.window_max = 1e4;
        r.limit = 0.05;
        const PowerLawFit f = fit_power_law(ts.xi, ap, 1e2, 1e4);
        r.value = f.exponent;
        r.stderr_ = f.stderr_;
        r.pass = std::abs(f.exponent - 0.5) <= 0.05;
        add(r);
    }

    BoundsOptions bo;
    bo.negative_control = opts.negative_control;
    for (const auto& v : verify_bounds(tr, bo)) add(from_verdict(v));

    {
        const IDiagnostics d = i_diagnostics(tr, 1e2);
        CheckRecord r;
        r.name = "I_ddot_over_4xi";
        r.window_min = 1e2;
        r.window_max = xi_end;
        r.limit = 0.05;
        double worst = 0;
        bool idot_ok = true;
        for (std::size_t i = 0; i < d.ratio.size(); ++i) {
            worst = std::max(worst, std::abs(d.ratio[i] / 4 - 1));
            if (d.I_dot[i] > 0) idot_ok = false;
        }
        r.value = worst;
        r.pass = worst <= 0.05;
        add(r);
        CheckRecord s;
        s.name = "I_dot_nonpositive";
        s.window_min = 1e2;
        s.window_max = xi_end;
        s.value = d.I_dot.empty() ? 0 : *std::max_element(d.I_dot.begin(), d.I_dot.end());
        s.pass = idot_ok;
        add(s);
    }
    {
        CheckRecord r;
        r.name = "p_negative_decreasing";
        r.window_min = 1e2;
        r.window_max = xi_end;
        bool ok = std::all_of(ts.p.begin(), ts.p.end(), [](double v) { return v < 0; });
        const auto med = running_median(ts.p, 10);
        for (std::size_t i = 1; i < med.size(); ++i)
            if (med[i] > med[i - 1]) ok = false;
        bool qdot_ok = true;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double qd = 2 * ts.p[i] - ts.m1[i];
            worst = std::max(worst, qd);
            if (qd > 0) qdot_ok = false;
        }
        r.value = ts.p.empty() ? 0 : ts.p.back();
        r.pass = ok;
        add(r);
        CheckRecord q;
        q.name = "q_dot_nonpositive";
        q.window_min = 1e2;
        q.window_max = xi_end;
        q.value = worst;
        q.pass = qdot_ok;
        add(q);
    }
    {
        CheckRecord r;
        r.name = "m3_decay";
        r.window_min = 1e2;
        r.window_max = xi_end;
        r.limit = 10;
        const double L = std::sqrt(std::max(tr.C0, 1e-300));
        double worst = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(ts.m3[i]) * ts.xi[i] / L);
        r.value = worst;
        r.pass = worst <= r.limit;
        add(r);
    }
    {
        CheckRecord r;
        r.name = "level_set_identity";
        r.window_min = 0;
        r.window_max = xi_end;
        r.limit = 1e-8;
        const double target = 2 * tr.H0 - tr.C0;
        double worst = 0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const PolyState s = *poly_view(spec, tr.state(i));
            const double scale = std::max({std::abs(target), 2 * s.p * s.p + 2 * std::abs(s.m1 * s.p) +
                                                                  2 * s.m3 * s.m3 * s.xi * s.xi +
                                                                  2 * std::abs(s.xi) * (1 + std::abs(s.m2 * s.m3))});
            worst = std::max(worst, std::abs(level_set_lhs(s) - target) / std::max(scale, 1e-300));
        }
        r.value = worst;
        r.pass = worst <= r.limit;
        add(r);
    }
    {
        const ArclengthTail a = arclength_tail(tr, 1e2);
        CheckRecord r;
        r.name = "arclength_tail";
        r.window_min = xi_end / 10;
        r.window_max = xi_end;
        r.value = a.last_decrement;
        r.slope = a.c_slope;
        r.limit = a.bound;
        r.pass = a.pass;
        add(r);
    }
    {
        const OmegaLimit w = estimate_omega_limit(tr, 1e2);
        CheckRecord r;
        r.name = "omega_limit_m3";
        r.window_min = 1e2;
        r.window_max = xi_end;
        r.value = std::abs(w.m[2]);
        r.limit = w.error[2];
        r.pass = std::abs(w.m[2]) <= w.error[2];
        add(r);
        CheckRecord c;
        c.name = "omega_limit_casimir";
        c.window_min = 1e2;
        c.window_max = xi_end;
        c.value = w.casimir_defect;
        c.limit = 2 * w.casimir_error;
        c.pass = w.casimir_defect <= 2 * w.casimir_error;
        add(c);
    }
    if (tr.C0 > 1e-14 && xi_end >= 1e4) {
        CheckRecord r;
        r.name = "winding_decreasing";
        r.window_min = 1e2;
        r.window_max = 1e4;
        const double v1 = winding_count(tr, 1e2, 1e3), v2 = winding_count(tr, 1e3, 1e4);
        r.value = v2;
        r.limit = v1;
        r.pass = v2 <= v1;
        add(r);
        add(from_verdict(equator_verdict(tr, 1e2)));
    }
    out.pass = std::all_of(out.records.begin(), out.records.end(), [](const CheckRecord& r) { return r.pass; });
    return out;
}

const std::vector<CollisionSeed>& default_collision_seeds() {
    static const std::vector<CollisionSeed> seeds = {
        {"S1", {2, 1, 0.39367902870872928, 1, 0}, 0.35, 0.4},
        {"S2", {1, 0.5, 0.28015329141343992, 0.5, 0}, 0.25, 0.3},
        {"S3", {-1, 1.5, 0.7922037284470167, 1, 0.2}, 0.75, 0.8},
        {"S4", {0.5, -1, 0.47249369992143309, 2, -0.5}, 0.45, 0.5},
        {"S5", {-2, -1, 0.40835333138463992, 0.5, 0.5}, 0.4, 0.45},
    };
    return seeds;
}

}  // namespace sphere2b
