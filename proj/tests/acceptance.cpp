// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sphere2b/blowup.hpp"
#include "sphere2b/collision.hpp"
#include "sphere2b/fields.hpp"
#include "sphere2b/integrate.hpp"
#include "sphere2b/io.hpp"
#include "sphere2b/topology.hpp"

using namespace sphere2b;

namespace {

constexpr double kPi = std::numbers::pi;
const double kS = (std::sqrt(5.0) - 1) / 2;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Largest distance from each expected eigenvalue to a distinct computed one.
double spectrum_error(const std::vector<std::complex<double>>& got, const std::vector<std::complex<double>>& want) {
    if (got.size() != want.size()) return INFINITY;
    std::vector<bool> used(got.size(), false);
    double worst = 0;
    for (const auto& w : want) {
        std::size_t best = got.size();
        for (std::size_t i = 0; i < got.size(); ++i)
            if (!used[i] && (best == got.size() || std::abs(got[i] - w) < std::abs(got[best] - w))) best = i;
        used[best] = true;
        worst = std::max(worst, std::abs(got[best] - w));
    }
    return worst;
}

std::vector<EquilibriumReport> census(Chart c) {
    std::vector<EquilibriumReport> out;
    for (const DivisorPoint& p : find_divisor_equilibria(c, {})) out.push_back(classify_equilibrium(p, {}));
    return out;
}

Outcome spectra() {
    Outcome o;
    const double rs = std::sqrt(kS), big = std::sqrt(2 * std::sqrt(5.0) - 2);
    const double w = std::sqrt((std::sqrt(17.0) - 1) / 2);
    using C = std::complex<double>;
    double worst = 0;
    int seen = 0;
    for (const auto& r : census(Chart::Chart1)) {
        std::vector<C> want;
        const double a2 = r.point.angle2;
        if (!r.point.full_equilibrium)
            want = {0, C(0, w), C(0, -w)};
        else if (std::abs(a2 - std::acos(kS)) < 1e-6)
            want = {0, 0, rs, -rs, big};
        else if (std::abs(a2 - (2 * kPi - std::acos(kS))) < 1e-6)
            want = {0, 0, -rs, rs, -big};
        else if (std::abs(a2 - kPi / 2) < 1e-6)
            want = {0, 0, 2, -2, -2};
        else if (std::abs(a2 - 3 * kPi / 2) < 1e-6)
            want = {0, 0, -2, 2, 2};
        else {
            o.require(false, "unexpected equilibrium at angle2=" + fmt(a2));
            continue;
        }
        ++seen;
        worst = std::max(worst, spectrum_error(r.eigenvalues, want));
    }
    o.require(seen == 6, "chart 1 points " + std::to_string(seen) + " != 6");
    for (const DivisorPoint& p : find_divisor_equilibria(Chart::InvariantPlane, {})) {
        const EquilibriumReport r = classify_equilibrium(p, {});
        const double phi = std::atan(rs);
        std::vector<C> want;
        if (std::abs(p.angle1 - phi) < 1e-6)
            want = {rs, 2 * rs};
        else if (std::abs(p.angle1 - (kPi - phi)) < 1e-6)
            want = {-rs, -2 * rs};
        else
            want = {2, -2};
        worst = std::max(worst, spectrum_error(r.eigenvalues, want));
    }
    o.require(worst <= 1e-8, "max eigenvalue error " + fmt(worst));
    o.detail = o.detail.empty() ? "max eigenvalue error " + fmt(worst) + " <= 1e-8" : o.detail;
    return o;
}

Outcome census_check() {
    Outcome o;
    const auto c1 = census(Chart::Chart1);
    const auto c2 = census(Chart::Chart2);
    std::vector<Vec3> d1, d2;
    for (const auto& r : c1)
        if (r.point.full_equilibrium) d1.push_back(divisor_direction(r.point));
    for (const auto& r : c2)
        if (r.point.full_equilibrium) d2.push_back(divisor_direction(r.point));
    o.require(d1.size() == 4, "chart 1 has " + std::to_string(d1.size()) + " equilibria");
    o.require(d2.size() == 4, "chart 2 has " + std::to_string(d2.size()) + " equilibria");
    double worst = 0;
    for (const Vec3& a : d2) {
        double best = INFINITY;
        for (const Vec3& b : d1) best = std::min(best, std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])}));
        worst = std::max(worst, best);
    }
    o.require(worst <= 1e-9, "chart agreement " + fmt(worst));
    const auto ip = find_divisor_equilibria(Chart::InvariantPlane, {});
    o.require(ip.size() == 4, "invariant plane has " + std::to_string(ip.size()) + " equilibria");
    const double phi = std::atan(std::sqrt(kS));
    const std::vector<double> expect{0, phi, kPi - phi, kPi};
    double res = 0, loc = 0;
    for (const DivisorPoint& p : ip) {
        res = std::max(res, p.residual);
        double best = INFINITY;
        for (double e : expect) best = std::min(best, std::abs(std::remainder(p.angle1 - e, 2 * kPi)));
        loc = std::max(loc, best);
    }
    o.require(res <= 1e-12, "plane residual " + fmt(res));
    o.require(loc <= 1e-9, "plane location error " + fmt(loc));
    if (o.pass)
        o.detail = "4/4/4 equilibria, chart agreement " + fmt(worst) + ", plane residual " + fmt(res);
    return o;
}

Outcome conservation() {
    Outcome o;
    std::mt19937_64 g(2024);
    std::normal_distribution<double> n(0, 1);
    std::uniform_real_distribution<double> u(0, 1);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    double wh = 0, wc = 0;
    for (int k = 0; k < 20; ++k) {
        // uniform in the ball of radius 5 in R^5
        std::vector<double> y(5);
        double r2 = 0;
        for (double& v : y) {
            v = n(g);
            r2 += v * v;
        }
        const double scale = 5 * std::pow(u(g), 0.2) / std::sqrt(r2);
        for (double& v : y) v *= scale;
        const Trajectory t = integrate({System::Poly}, y, 0, 1, cfg);
        const auto [dh, dc] = max_relative_drift(t);
        wh = std::max(wh, dh);
        wc = std::max(wc, dc);
    }
    o.require(wh <= 1e-8, "H drift " + fmt(wh));
    o.require(wc <= 1e-8, "C drift " + fmt(wc));
    if (o.pass) o.detail = "max relative drift H " + fmt(wh) + ", C " + fmt(wc) + " <= 1e-8";
    return o;
}

Outcome reduction() {
    Outcome o;
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> um(0.5, 2.0);
    std::normal_distribution<double> n(0, 1);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const Masses m = k % 2 ? Masses{1, 1} : Masses{um(g), um(g)};
        FullState f;
        auto unit = [&] {
            Vec3 v{n(g), n(g), n(g)};
            const double r = norm(v);
            return Vec3{v[0] / r, v[1] / r, v[2] / r};
        };
        do {
            f.q1 = unit();
            f.q2 = unit();
        } while (std::abs(dot(f.q1, f.q2)) > std::cos(0.3));
        for (auto [q, p] : {std::pair{&f.q1, &f.p1}, std::pair{&f.q2, &f.p2}}) {
            Vec3 v{0.5 * n(g), 0.5 * n(g), 0.5 * n(g)};
            const double d = dot(v, *q);
            *p = {v[0] - d * (*q)[0], v[1] - d * (*q)[1], v[2] - d * (*q)[2]};
        }
        const auto yf = full_to_array(f);
        const ReducedState r0 = reduce_full_state(f, m);
        const Trajectory a = integrate({System::Full, m}, {yf.begin(), yf.end()}, 0, 0.1, cfg);
        const Trajectory b = integrate({System::Reduced, m}, {r0.m1, r0.m2, r0.m3, r0.q, r0.p}, 0, 0.1, cfg);
        Vec12 ye{};
        for (int i = 0; i < 12; ++i) ye[i] = a.state(a.size() - 1)[i];
        const ReducedState ra = reduce_full_state(full_from_array(ye), m);
        const double* rb = b.state(b.size() - 1);
        const ReducedState rbs{rb[0], rb[1], rb[2], rb[3], rb[4]};
        worst = std::max({worst, std::abs(ra.q - rbs.q),
                          std::abs(hamiltonian_reduced(ra, m) - hamiltonian_reduced(rbs, m)),
                          std::abs(casimir(ra.m1, ra.m2, ra.m3) - casimir(rbs.m1, rbs.m2, rbs.m3))});
    }
    o.require(worst <= 1e-6, "max (q, H, C) difference " + fmt(worst));
    if (o.pass) o.detail = "max (q, H, C) difference " + fmt(worst) + " <= 1e-6";
    return o;
}

Outcome collision_asymptotics() {
    Outcome o;
    // (a) t* and its threshold stability, (b) |p| exponent, (c) bounds, (d) I'' / 4 xi,
    // (e) arclength tail, (f) omega limit.
    const std::set<std::string> needed{"pole_fit_t_star",       "pole_fit_threshold_stability", "p_exponent",
                                       "m3*xi",                 "(2*m3*xi-m2)*sqrt(xi)",        "I_ddot_over_4xi",
                                       "arclength_tail",        "omega_limit_m3",               "omega_limit_casimir"};
    int seeds = 0;
    for (const CollisionSeed& s : default_collision_seeds()) {
        const CollisionVerification v = verify_collision(
            {System::Poly}, {s.state.m1, s.state.m2, s.state.m3, s.state.xi, s.state.p}, {});
        ++seeds;
        o.require(v.xi_end >= 1e6, std::string(s.name) + " reached xi " + fmt(v.xi_end));
        o.require(v.event && std::isfinite(v.event->t_star), std::string(s.name) + " has no finite t*");
        std::set<std::string> found;
        for (const CheckRecord& r : v.records) {
            if (!r.pass) o.require(false, std::string(s.name) + " " + r.name);
            if (needed.count(r.name)) found.insert(r.name);
            if (r.name == "p_exponent") o.require(std::abs(r.value - 0.5) <= 0.05, std::string(s.name) + " p exponent " + fmt(r.value));
            if (r.name == "pole_fit_threshold_stability") o.require(r.value <= 0.01, std::string(s.name) + " t* spread " + fmt(r.value));
        }
        o.require(found.size() == needed.size(), std::string(s.name) + " is missing checks");
    }
    o.require(seeds == 5, "expected 5 seeds");
    if (o.pass) o.detail = "5 seeds, all checks (a)-(f) pass";
    return o;
}

Outcome antipodal_scan() {
    Outcome o;
    std::mt19937_64 g(99);
    std::uniform_real_distribution<double> u(-1, 1);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.record_dense = false;
    std::vector<std::vector<double>> seeds;
    for (int k = 0; k < 200; ++k) {
        // A quarter of the seeds start close to the antipodal configuration and move towards it.
        const bool near = k % 4 == 0;
        seeds.push_back({3 * u(g), 3 * u(g), 3 * u(g), near ? -50 - 50 * std::abs(u(g)) : 5 * u(g),
                         near ? -2 - std::abs(u(g)) : 2 * u(g)});
    }
    std::vector<double> lowest(seeds.size(), INFINITY);
    std::vector<Termination> ends(seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k; (k = next++) < seeds.size();) {
            const Trajectory t = integrate({System::Poly}, seeds[k], 0, 20, cfg);
            for (std::size_t i = 0; i < t.size(); ++i) lowest[k] = std::min(lowest[k], t.state(i)[3]);
            ends[k] = t.termination;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::max(1u, std::thread::hardware_concurrency()); ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    int collisions = 0;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        if (ends[k] == Termination::Antipodal) o.require(false, "antipodal event at seed " + std::to_string(k));
        collisions += ends[k] == Termination::Collision;
    }
    const double low = *std::min_element(lowest.begin(), lowest.end());
    o.require(low > -1e6, "xi reached " + fmt(low));
    if (o.pass) o.detail = "200 seeds, min xi " + fmt(low) + " > -1e6, " + std::to_string(collisions) + " collisions";
    return o;
}

Outcome topology() {
    Outcome o;
    const auto cells = scan_topology(linspace(-5, 25, 100), linspace(0.05, 12, 100), 4);
    int odd = 0;
    for (const ScanCell& c : cells) odd += c.holes % 2 != 0;
    o.require(cells.size() == 10000, "grid size");
    o.require(odd == 0, std::to_string(odd) + " odd counts");
    std::set<int> counts;
    std::string pairs;
    for (auto [C, h, want] : {std::tuple{6.02, 2.7, 4}, std::tuple{6.07, 2.25, 2}, std::tuple{1.0, 20.0, 0}}) {
        const TopologyResult r = classify_isoenergy({h, C});
        const int sampled = count_holes_by_sampling({h, C}, 1200);
        counts.insert(r.boundary_components);
        o.require(r.boundary_components == want, "(" + fmt(C) + "," + fmt(h) + ") holes " + std::to_string(r.boundary_components));
        o.require(sampled == r.boundary_components, "sampler disagrees at (" + fmt(C) + "," + fmt(h) + ")");
        pairs += (pairs.empty() ? "" : " ") + std::to_string(r.boundary_components);
    }
    o.require(counts.size() == 3, "pair counts not distinct");
    o.require(classify_isoenergy({1.0, 0.0}).label == TopologyLabel::Circle, "C=0 is not Circle");
    if (o.pass) o.detail = "10000 cells even, pairs -> {" + pairs + "} confirmed by sampling, C=0 Circle";
    return o;
}

Outcome formulas() {
    Outcome o;
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (Chart c : {Chart::Chart1, Chart::Chart2}) {
        for (int k = 0; k < 1000; ++k) {
            const BlowupChartState s{c, -2 + 4 * u(g), -2 + 4 * u(g), 0.05 + 1.5 * u(g), 0.1 + (kPi - 0.2) * u(g), 2 * kPi * u(g)};
            const Vec5 a = blowup_chart_rhs(s, false), b = transported_chart_rhs(s, false);
            for (int i = 2; i < 5; ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
        }
    }
    o.require(worst <= 1e-9, "transport mismatch " + fmt(worst));
    double grid = 0;
    const double m1 = 0.8, m2 = -1.3;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            const double a1 = kPi * (i + 0.5) / 100, a2 = 2 * kPi * j / 100;
            const Vec5 f = blowup_chart_rhs({Chart::Chart1, m1, m2, 0.0, a1, a2}, true);
            const auto d = divisor_field_chart1_literal(m1, m2, a1, a2);
            grid = std::max({grid, std::abs(f[0] - d[0]), std::abs(f[1] - d[1]), std::abs(f[3] - d[2]), std::abs(f[4] - d[3])});
        }
    o.require(grid <= 1e-12, "divisor field mismatch " + fmt(grid));
    if (o.pass) o.detail = "transport " + fmt(worst) + " <= 1e-9, divisor grid " + fmt(grid) + " <= 1e-12";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "closed-form equilibrium spectra", 1, spectra},
        {2, "equilibrium census", 5, census_check},
        {3, "conservation", 10, conservation},
        {4, "reduction consistency", 30, reduction},
        {5, "collision asymptotics", 120, collision_asymptotics},
        {6, "no antipodal singularities", 120, antipodal_scan},
        {7, "topology classification", 30, topology},
        {8, "formula cross-checks", 10, formulas},
    };
    int failed = 0;
    for (const Criterion& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit_s) o.require(false, "runtime over " + fmt(c.limit_s) + " s");
        failed += !o.pass;
        std::printf("criterion %d %-34s %s  %s  [%.2f s, limit %g s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, c.limit_s);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
