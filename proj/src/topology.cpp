#include "sphere2b/topology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace sphere2b {

namespace {
constexpr double kPi = std::numbers::pi;

void require_level(const LevelSet& level) {
    if (!std::isfinite(level.h) || !std::isfinite(level.C)) throw Error(ErrorKind::Domain, "level set must be finite");
    if (level.C < 0) throw Error(ErrorKind::Domain, "C must be non-negative");
}
}  // namespace

double HolePolynomial::eval_u(double x) const {
    return (((u[4] * x + u[3]) * x + u[2]) * x + u[1]) * x + u[0];
}

std::array<double, 9> HolePolynomial::m3_coefficients() const {
    std::array<double, 9> c{};
    for (int k = 0; k < 5; ++k) c[2 * k] = u[k];
    return c;
}

HolePolynomial hole_polynomial(const LevelSet& level) {
    const double a = 2 * level.h - level.C / 2;
    HolePolynomial p;
    p.u = {1.0, 4 * (a - level.C), 4 * a * a + 2, -4 * a, 1.0};
    return p;
}

HolePolynomial literal_hole_polynomial(const LevelSet& level) {
    const double a = level.h - level.C / 2;
    HolePolynomial p;
    p.u = {1.0, 4 * (level.h - 1.5 * level.C), 2 * (2 * a * a + 1), -4 * a, 1.0};
    return p;
}

double projection_lhs(const LevelSet& level, double m2, double m3) {
    const double u = m3 * m3;
    return 2 * level.h - level.C / 2 - u / 2 + 1 / (2 * u) + m2 / m3;
}

const char* topology_label_name(TopologyLabel l) {
    switch (l) {
        case TopologyLabel::S1xS2: return "S1xS2";
        case TopologyLabel::ConnSum3_S1xS2: return "ConnSum3_S1xS2";
        case TopologyLabel::Circle: return "Circle";
        case TopologyLabel::NearDegenerate: return "near-degenerate";
    }
    return "unknown";
}

const char* fiber_type_name(FiberType f) {
    switch (f) {
        case FiberType::Empty: return "empty";
        case FiberType::Point: return "point";
        case FiberType::Parabola: return "parabola";
        case FiberType::Circle: return "circle";
    }
    return "unknown";
}

namespace {

// Bisection to 1e-12 relative when q changes sign around r; otherwise r unchanged.
double polish_root(const HolePolynomial& q, double r) {
    double d = 1e-6 * (1 + std::abs(r));
    double lo = std::max(r - d, 0.0), hi = r + d;
    double flo = q.eval_u(lo), fhi = q.eval_u(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) return r;
    while (hi - lo > 1e-12 * (1 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        const double fm = q.eval_u(mid);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TopologyResult count_boundary_components(const LevelSet& level) {
    require_level(level);
    if (!(level.C > 0)) throw Error(ErrorKind::DegenerateConfiguration, "boundary count needs C > 0");
    const HolePolynomial q = hole_polynomial(level);
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    for (int i = 1; i < 4; ++i) comp(i, i - 1) = 1;
    for (int i = 0; i < 4; ++i) comp(i, 3) = -q.u[static_cast<std::size_t>(i)];
    const Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    const Eigen::Vector4cd ev = es.eigenvalues();

    TopologyResult res;
    double margin = std::numeric_limits<double>::infinity();
    std::vector<double> reals;
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> z = ev(i);
        if (!(z.real() > 0)) continue;
        if (std::abs(z.imag()) <= 1e-6 * (1 + std::abs(z))) {
            reals.push_back(polish_root(q, z.real()));
        } else if (z.imag() > 0) {
            margin = std::min(margin, std::abs(z.imag()));
        }
    }
    std::sort(reals.begin(), reals.end());
    for (std::size_t i = 1; i < reals.size(); ++i) margin = std::min(margin, reals[i] - reals[i - 1]);
    const double a = 2 * level.h - level.C / 2;
    for (double u : reals) {
        res.u_roots.push_back(u);
        margin = std::min(margin, std::abs(level.C - u));
        double w = level.C - u;
        if (w < 0) {
            if (w < -1e-12 * (1 + level.C)) continue;
            w = 0;
        }
        const double r3 = std::sqrt(u), r2 = std::sqrt(w);
        for (double s3 : {1.0, -1.0}) {
            for (double s2 : {1.0, -1.0}) {
                if (r2 == 0 && s2 < 0) continue;
                const double m3 = s3 * r3, m2 = s2 * r2;
                const double resid = projection_lhs(level, m2, m3);
                const double scale = 1 + std::abs(a) + u / 2 + 1 / (2 * u) + std::abs(m2 / m3);
                if (std::abs(resid) <= kRootValidationTol * scale) {
                    res.roots.push_back({m2, m3, resid});
                } else {
                    margin = std::min(margin, std::abs(resid) / scale);
                }
            }
        }
    }
    res.validated_solutions = static_cast<int>(res.roots.size());
    res.boundary_components = res.validated_solutions / 2;
    res.margin = margin;
    res.near_degenerate = margin < kNearDegenerateMargin;
    if (res.validated_solutions % 2 != 0) res.near_degenerate = true;
    return res;
}

TopologyResult classify_isoenergy(const LevelSet& level) {
    require_level(level);
    if (level.C == 0) {
        TopologyResult r;
        r.label = TopologyLabel::Circle;
        r.margin = std::numeric_limits<double>::infinity();
        return r;
    }
    TopologyResult r = count_boundary_components(level);
    if (r.near_degenerate) {
        r.label = TopologyLabel::NearDegenerate;
    } else if (r.boundary_components == 4) {
        r.label = TopologyLabel::ConnSum3_S1xS2;
    } else if (r.boundary_components == 0 || r.boundary_components == 2) {
        r.label = TopologyLabel::S1xS2;
    } else {
        throw Error(ErrorKind::Inconsistency, "hole count outside {0, 2, 4}");
    }
    return r;
}

double RegionMask::m2(int i) const { return -extent + 2 * extent * i / (n - 1); }
double RegionMask::m3(int j) const { return -extent + 2 * extent * j / (n - 1); }

RegionMask sample_projection_region(const LevelSet& level, int resolution) {
    require_level(level);
    if (!(level.C > 0)) throw Error(ErrorKind::DegenerateConfiguration, "region sampling needs C > 0");
    if (resolution < 16) throw Error(ErrorKind::Domain, "resolution must be at least 16");
    RegionMask m;
    m.n = resolution;
    m.extent = std::sqrt(level.C);
    m.admissible.assign(static_cast<std::size_t>(resolution) * resolution, 0);
    for (int i = 0; i < resolution; ++i) {
        const double m2 = m.m2(i);
        for (int j = 0; j < resolution; ++j) {
            double m3 = m.m3(j);
            if (2 * j == resolution - 1) m3 = 0;
            if (m2 * m2 + m3 * m3 > level.C * (1 + 1e-12)) continue;
            const bool ok = m3 == 0 || projection_lhs(level, m2, m3) >= 0;
            m.admissible[static_cast<std::size_t>(i) * resolution + j] = ok ? 1 : 0;
        }
    }
    return m;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

int count_holes_by_sampling(const LevelSet& level, int n_theta) {
    require_level(level);
    if (!(level.C > 0)) throw Error(ErrorKind::DegenerateConfiguration, "region sampling needs C > 0");
    if (n_theta < 16) throw Error(ErrorKind::Domain, "resolution must be at least 16");
    const int nt = n_theta, np = 2 * n_theta;
    const double L = std::sqrt(level.C);
    std::vector<std::uint8_t> bad(static_cast<std::size_t>(nt) * np, 0);
    std::vector<double> sinphi(static_cast<std::size_t>(np));
    for (int j = 0; j < np; ++j) sinphi[static_cast<std::size_t>(j)] = std::sin(2 * kPi * j / np);
    for (int i = 0; i < nt; ++i) {
        const double th = (i + 0.5) * kPi / nt;
        const double m3 = L * std::cos(th), st = L * std::sin(th);
        if (m3 == 0) continue;
        for (int j = 0; j < np; ++j)
            bad[static_cast<std::size_t>(i) * np + j] = projection_lhs(level, st * sinphi[static_cast<std::size_t>(j)], m3) < 0;
    }
    UnionFind uf(bad.size());
    auto idx = [np](int i, int j) { return i * np + j; };
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < np; ++j) {
            if (!bad[static_cast<std::size_t>(idx(i, j))]) continue;
            const int jn = (j + 1) % np;
            if (bad[static_cast<std::size_t>(idx(i, jn))]) uf.unite(idx(i, j), idx(i, jn));
            if (i + 1 < nt && bad[static_cast<std::size_t>(idx(i + 1, j))]) uf.unite(idx(i, j), idx(i + 1, j));
        }
    }
    for (int row : {0, nt - 1}) {
        int first = -1;
        for (int j = 0; j < np; ++j) {
            if (!bad[static_cast<std::size_t>(idx(row, j))]) continue;
            if (first < 0)
                first = idx(row, j);
            else
                uf.unite(first, idx(row, j));
        }
    }
    int count = 0;
    for (std::size_t k = 0; k < bad.size(); ++k)
        if (bad[k] && uf.find(static_cast<int>(k)) == static_cast<int>(k)) ++count;
    return count;
}

FiberType fiber_type(const Vec3& P, const LevelSet& level, double tol) {
    require_level(level);
    const double c = dot(P, P);
    if (std::abs(c - level.C) > kConstraintTol * std::max(1.0, level.C))
        throw Error(ErrorKind::Domain, "point is off the Casimir sphere");
    const double m1 = P[0], m2 = P[1], m3 = P[2];
    if (m3 == 0) return FiberType::Parabola;
    const double k = 1 + m2 * m3;
    const double rhs = 2 * level.h - level.C + m1 * m1 / 2 + k * k / (2 * m3 * m3);
    const double scale = std::abs(2 * level.h) + level.C + m1 * m1 / 2 + k * k / (2 * m3 * m3);
    if (rhs > tol * scale) return FiberType::Circle;
    if (rhs < -tol * scale) return FiberType::Empty;
    return FiberType::Point;
}

std::array<double, 3> compact_surface_residual(const std::array<double, 6>& pt, const LevelSet& level) {
    const double m1 = pt[0], m2 = pt[1], m3 = pt[2], x = pt[3], y = pt[4], z = pt[5];
    const double w = 1 - z;
    return {m1 * m1 + m2 * m2 + m3 * m3 - level.C, x * x + y * y + z * z - 1,
            (level.C - 2 * level.h) * w * w + 2 * y * y - 2 * m1 * y * w + 2 * m3 * m3 * x * x -
                2 * x * w * (1 + m2 * m3)};
}

Vec3 inverse_stereographic(double xi, double p) {
    const double r2 = xi * xi + p * p;
    return {2 * xi / (1 + r2), 2 * p / (1 + r2), (r2 - 1) / (r2 + 1)};
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw Error(ErrorKind::Domain, "grid needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

std::vector<ScanCell> scan_topology(const std::vector<double>& hs, const std::vector<double>& Cs, int jobs) {
    std::vector<ScanCell> out(hs.size() * Cs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&]() {
        for (std::size_t k = next++; k < out.size(); k = next++) try {
            ScanCell& c = out[k];
            c.h = hs[k / Cs.size()];
            c.C = Cs[k % Cs.size()];
            const TopologyResult r = classify_isoenergy({c.h, c.C});
            c.holes = r.boundary_components;
            c.label = r.label;
            c.margin = r.margin;
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failure) failure = std::current_exception();
        }
    };
    const int n = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace sphere2b
