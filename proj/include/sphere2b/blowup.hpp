#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "sphere2b/core.hpp"
#include "sphere2b/fields.hpp"

namespace sphere2b {

enum class EquilibriumClass { Saddle, AttractingNode, RepellingNode, CentreOnSphere, Degenerate };
const char* equilibrium_class_name(EquilibriumClass c);

// Coordinates in which an equilibrium is linearised. Angles are the chart angles; the chart-2
// poles sin(Q1) = 0 are a single point each and use (x, y) = (sin Q1 sin Q2, sin Q1 cos Q2).
enum class LocalFrame { Angles, PoleNorth, PoleSouth };

struct DivisorPoint {
    Chart chart = Chart::Chart1;
    double angle1 = 0, angle2 = 0;  // angle2 unused for the invariant plane
    LocalFrame frame = LocalFrame::Angles;
    double residual = 0;            // max-norm of the angular field after polishing
    bool full_equilibrium = true;   // false for centres: (m1, m2) still rotate there
};

struct EquilibriumReport {
    DivisorPoint point;
    int dim = 0;
    std::vector<double> jacobian;  // row-major dim x dim
    std::vector<std::complex<double>> eigenvalues;
    std::vector<std::complex<double>> eigenvectors;  // column-major dim x dim
    // Eigenvalues of the on-sphere (angular) block, from which the class is read.
    std::array<std::complex<double>, 2> on_sphere{};
    EquilibriumClass cls = EquilibriumClass::Degenerate;
    int zero_multiplicity = 0;
    double m_rotation = 0;  // |(m1', m2')| at the point
    // Centres only: the point differs from (q1, q2) = (0, arcsin((sqrt17 - 1)/4)).
    bool location_mismatch = false;
};

struct ChartContext {
    double m1 = 1.0, m2 = 0.5;  // equilibrium plane point; results do not depend on it
    int sign = 1;               // invariant plane
    double C = 9.0;
};

// Angular components of the divided field at radial 0 (m1, m2 from ctx).
Vec2 divisor_angular_field(Chart chart, double a1, double a2, const ChartContext& ctx = {});

// Unit-sphere direction (m3/r, eta/r^2, zeta/r) of a divisor point and the velocity of that direction
// under the divided field. Both charts give the same tangent field.
Vec3 divisor_direction(Chart chart, double a1, double a2);
Vec3 divisor_tangent(Chart chart, double a1, double a2, const ChartContext& ctx = {});
// Direction of an equilibrium, including the chart-2 pole frames.
Vec3 divisor_direction(const DivisorPoint& p);

// Zeros of the angular divisor field: the equilibria of the whole divided field followed by the
// on-sphere-only zeros (centres). Scan of `resolution` cells per angle plus damped Newton.
std::vector<DivisorPoint> find_divisor_equilibria(Chart chart, const ChartContext& ctx = {},
                                                  int resolution = 2000);

EquilibriumReport classify_equilibrium(const DivisorPoint& point, const ChartContext& ctx = {});

struct PortraitSample {
    double a1 = 0, a2 = 0;
    double d1 = 0, d2 = 0;
};

struct PhasePortrait {
    Chart chart = Chart::Chart1;
    int resolution = 0;
    std::vector<PortraitSample> samples;
    int index_sum = 0;  // Poincare index sum over the divisor sphere
    std::vector<std::pair<DivisorPoint, int>> indices;
};

// resolution x resolution grid of the angular field (angle1 avoiding the chart poles).
PhasePortrait divisor_phase_portrait(Chart chart, int resolution, const ChartContext& ctx = {});

struct NearDivisorReport {
    double r0 = 0, tau_end = 0;
    double rotation_defect_r0 = 0;      // max deviation of (m1', m2') from 2cos(q1)(m2, -m1) at r = 0
    double rotation_defect = 0;         // the same at the seed radius, relative to r
    double m_norm_drift = 0;            // max |m1^2 + m2^2 - initial|
    double final_distance = 0;          // angular distance to the target equilibrium
    double final_radial = 0;
    double tau_reached = 0;
    bool left_neighbourhood = false;    // stopped because the radial coordinate exceeded r_cap
    std::vector<double> final_state;
};

// Integrates the divided chart field from (m1, m2, r0, a1, a2) for tau in [0, tau_end], stopping early
// once the radial coordinate exceeds r_cap (the radial direction is unstable at the attracting node).
NearDivisorReport near_divisor_flow_check(Chart chart, const std::array<double, 5>& seed, double tau_end,
                                          const DivisorPoint& target, double r_cap = 1e-2);

}  // namespace sphere2b
