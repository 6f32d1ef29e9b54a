#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sphere2b/core.hpp"

namespace sphere2b {

// Quartic in u = m3^2; coefficient k multiplies u^k.
struct HolePolynomial {
    std::array<double, 5> u{};

    double eval_u(double x) const;
    double eval_m3(double m3) const { return eval_u(m3 * m3); }
    // Degree-8 coefficients in m3 (odd entries zero).
    std::array<double, 9> m3_coefficients() const;
};

// u^4 - 4a u^3 + (4a^2 + 2) u^2 + 4(a - C) u + 1 with a = 2h - C/2.
HolePolynomial hole_polynomial(const LevelSet& level);
// The same quartic with a = h - C/2 and linear coefficient 4(h - 3C/2); kept for comparison.
HolePolynomial literal_hole_polynomial(const LevelSet& level);

// 2h - C/2 - m3^2/2 + 1/(2 m3^2) + m2/m3; the projection of the level set onto the Casimir sphere
// is where this is >= 0 (and the whole equator m3 = 0).
double projection_lhs(const LevelSet& level, double m2, double m3);

enum class TopologyLabel { S1xS2, ConnSum3_S1xS2, Circle, NearDegenerate };
const char* topology_label_name(TopologyLabel l);

struct BoundaryPoint {
    double m2 = 0, m3 = 0;
    double residual = 0;
};

struct TopologyResult {
    int boundary_components = 0;  // holes in the projection
    int validated_solutions = 0;  // (m2, m3) rim points, two per hole
    TopologyLabel label = TopologyLabel::S1xS2;
    std::vector<BoundaryPoint> roots;
    std::vector<double> u_roots;  // positive real quartic roots
    double margin = 0;            // distance to a change of count
    bool near_degenerate = false;
};

constexpr double kRootValidationTol = 1e-9;
constexpr double kNearDegenerateMargin = 1e-7;

TopologyResult count_boundary_components(const LevelSet& level);
TopologyResult classify_isoenergy(const LevelSet& level);

// Row-major n x n mask over m2 (rows) and m3 (columns), both on [-sqrt(C), sqrt(C)].
struct RegionMask {
    int n = 0;
    double extent = 0;
    std::vector<std::uint8_t> admissible;
    double m2(int i) const;
    double m3(int j) const;
    bool at(int i, int j) const { return admissible[static_cast<std::size_t>(i) * n + j] != 0; }
};

RegionMask sample_projection_region(const LevelSet& level, int resolution);

// Connected components of the forbidden set on the Casimir sphere, sampled on an
// n_theta x 2 n_theta (theta, phi) grid with periodic phi and the poles identified.
int count_holes_by_sampling(const LevelSet& level, int n_theta = 1200);

enum class FiberType { Empty, Point, Parabola, Circle };
const char* fiber_type_name(FiberType f);

FiberType fiber_type(const Vec3& P, const LevelSet& level, double tol = 1e-9);

// Casimir sphere, unit sphere and the closed level-set polynomial in (m, x, y, z).
std::array<double, 3> compact_surface_residual(const std::array<double, 6>& point, const LevelSet& level);
// (x, y, z) on the unit sphere with xi = x/(1-z), p = y/(1-z).
Vec3 inverse_stereographic(double xi, double p);

struct ScanCell {
    double h = 0, C = 0;
    int holes = 0;
    TopologyLabel label = TopologyLabel::S1xS2;
    double margin = 0;
};

std::vector<double> linspace(double a, double b, int n);
// Classification over the product grid; cells are independent and split across `jobs` threads.
std::vector<ScanCell> scan_topology(const std::vector<double>& hs, const std::vector<double>& Cs, int jobs = 1);

}  // namespace sphere2b
