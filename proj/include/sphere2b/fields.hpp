#pragma once

#include <array>

#include "sphere2b/core.hpp"

namespace sphere2b {

using Vec2 = std::array<double, 2>;
using Vec5 = std::array<double, 5>;
using Vec12 = std::array<double, 12>;

// Layout (q1, q2, p1, p2), three entries each.
Vec12 full_rhs(const FullState& s, const Masses& masses);
double hamiltonian_full(const FullState& s, const Masses& masses);
FullState full_from_array(const Vec12& y);
Vec12 full_to_array(const FullState& s);

// (m1, m2, m3, q, p)
Vec5 reduced_rhs(const ReducedState& s, const Masses& masses);
Vec5 reduced_rhs_equal_mass(const ReducedState& s);
double hamiltonian_reduced(const ReducedState& s, const Masses& masses);

// (m1, m2, m3, xi, p)
Vec5 poly_rhs(const PolyState& s);
double hamiltonian_poly(const PolyState& s);
// Sum of the magnitudes of the terms of hamiltonian_poly; the natural scale for its rounding error.
double hamiltonian_poly_scale(const PolyState& s);
double casimir(double m1, double m2, double m3);
// 2p^2 - 2 m1 p + 2 m3^2 xi^2 - 2 xi (1 + m2 m3), equal to 2h - C on the level set.
double level_set_lhs(const PolyState& s);

// sign = +1 or -1 selects qdot = 2p + sign*sqrt(C), i.e. m1 = -sign*sqrt(C).
Vec2 invariant_plane_rhs_q(double q, double p, int sign, double C);
Vec2 invariant_plane_rhs_xi(double xi, double p, int sign, double C);

// (m1, m2, m3, eta, zeta), derivative in fictitious time.
Vec5 regularised_rhs(const RegState& s);
// Variant with -2 m2 m3 in the second line; kept for comparison only.
Vec5 regularised_rhs_literal(const RegState& s);

Vec2 invariant_plane_reg_rhs(double eta, double zeta, int sign, double C);

// (m1, m2, radial, angle1, angle2). divided = true returns the field divided by the radial
// coordinate, which stays smooth at radial = 0.
Vec5 blowup_chart1_rhs(const BlowupChartState& s, bool divided);
Vec5 blowup_chart2_rhs(const BlowupChartState& s, bool divided);
Vec5 blowup_chart_rhs(const BlowupChartState& s, bool divided);

// Raw lifted fields in the uncorrected reference form; kept for comparison only.
Vec5 blowup_chart1_rhs_literal(const BlowupChartState& s);
Vec5 blowup_chart2_rhs_literal(const BlowupChartState& s);

// Divisor fields as displayed for radial = 0: (m1', m2', angle1', angle2').
std::array<double, 4> divisor_field_chart1_literal(double m1, double m2, double q1, double q2);
std::array<double, 4> divisor_field_chart2_literal(double m1, double m2, double Q1, double Q2);

// (r, phi), already divided by r.
Vec2 invariant_plane_blowup_rhs(double r, double phi, int sign, double C);

// Oracle: regularised_rhs pushed through the inverse chart Jacobian. Requires radial > 0.
Vec5 transported_chart_rhs(const BlowupChartState& s, bool divided);
Vec2 transported_invariant_plane_blowup_rhs(double r, double phi, int sign, double C);

// Chart Jacobian d(m3, eta, zeta)/d(radial, angle1, angle2).
std::array<std::array<double, 3>, 3> chart_jacobian(const BlowupChartState& s);

// Tangent vector (dm3, deta, dzeta) of a chart-space velocity (dm1, dm2, dradial, da1, da2).
Vec3 chart_tangent_pushforward(const BlowupChartState& s, const Vec5& v);

}  // namespace sphere2b
