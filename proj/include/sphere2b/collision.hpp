#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sphere2b/integrate.hpp"

namespace sphere2b {

enum class Relation { Precedes, Dominates, Comparable, BoundedBy, AtLeast };
const char* relation_name(Relation r);

struct PowerLawFit {
    double exponent = 0;
    double stderr_ = 0;
    double intercept = 0;
    double residual_rms = 0;
    double x_min = 0;
    double x_max = 0;
    std::size_t samples = 0;
};

// Least-squares slope of log y against log x over the samples with x in [x_min, x_max].
// The samples used must span at least one decade in x.
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys, double x_min,
                          double x_max);

struct AsymptoticVerdict {
    std::string name;
    Relation relation = Relation::BoundedBy;
    double fitted_exponent = 0;
    double stderr_ = 0;
    double window_min = 0;
    double window_max = 0;
    double max_ratio = 0;
    bool trivial = false;  // numerator identically zero
    bool pass = false;
};

// Tail samples in polynomial coordinates, with derivatives from the polynomial field.
struct TailSeries {
    std::vector<double> t, xi, m1, m2, m3, p;
    std::vector<double> xi_dot, p_dot, m1_dot, m2_dot, m3_dot;
    std::size_t size() const { return t.size(); }
};

// Samples with xi >= xi_min; the system must map to the polynomial one (see poly_view).
TailSeries tail_series(const Trajectory& traj, double xi_min);

struct IDiagnostics {
    std::vector<double> t, xi, I, I_dot, I_ddot;
    std::vector<double> ratio;  // I_ddot / xi
};

IDiagnostics i_diagnostics(const Trajectory& traj, double xi_min = 0);
// The closed-form second derivative of I = 4 sin^2(q/2) along the equal-mass field.
double i_ddot(const PolyState& s);

// f bounded by g is tested on the ratio f/g: finite maximum and log-log slope against xi <= 0.05.
AsymptoticVerdict bounded_verdict(const std::string& name, const std::vector<double>& xi,
                                  const std::vector<double>& ratio, double xi_min, double xi_max);

struct BoundsOptions {
    double xi_min = 1e2;
    double xi_max = std::numeric_limits<double>::infinity();
    // Adds the deliberately false bound m3 = O(1/xi^2).
    bool negative_control = false;
};

// Checks, in order: m3 xi, (2 m3 xi - m2) sqrt(xi), (p + sqrt(xi) - m1/2) sqrt(xi) bounded.
std::vector<AsymptoticVerdict> verify_bounds(const Trajectory& traj, const BoundsOptions& opts = {});

// Length of the projection of m(t) on the Casimir sphere up to the time xi first reaches xi_max
// in the final approach. Gauss-Legendre quadrature on each dense-output segment.
double casimir_sphere_arclength(const Trajectory& traj, double xi_max);

struct ArclengthTail {
    std::vector<double> xi;      // decade marks
    std::vector<double> length;  // L at each mark
    double c = 0;                // sup of xi^2 dL/dxi over the tail
    double c_slope = 0;          // log-log slope of xi^2 dL/dxi against xi
    double last_decrement = 0;   // L(xi_max) - L(xi_max / 10)
    double bound = 0;            // c / (xi_max / 10)
    double remaining = 0;        // c / xi_max, bound on L(infinity) - L(xi_max)
    bool pass = false;
};
ArclengthTail arclength_tail(const Trajectory& traj, double xi_min = 1e2);

struct OmegaLimit {
    std::array<double, 3> m{};
    std::array<double, 3> error{};
    double casimir_defect = 0;  // |m1*^2 + m2*^2 + m3*^2 - C0|
    double casimir_error = 0;   // propagated error bar of the Casimir
    int order = 3;
};

// Polynomial extrapolation of m in s = xi^(-1/2) to s = 0; the error bar of each component is the
// difference between the order-3 and order-2 fits plus a floor from the Casimir drift.
OmegaLimit estimate_omega_limit(const Trajectory& traj, double xi_min = 1e2);

// Total variation of phi = atan2(m1, m2) over samples with xi in [xi_min, xi_max].
double winding_count(const Trajectory& traj, double xi_min, double xi_max);
// (pi/2 - theta) xi bounded, with theta = arccos(m3 / sqrt(C)).
AsymptoticVerdict equator_verdict(const Trajectory& traj, double xi_min = 1e2);

struct ShootingResult {
    double value = 0;      // refined parameter
    double lo = 0, hi = 0; // final bracket
    bool hit = false;      // the returned value reached the collision threshold
    int iterations = 0;
};

// Bisection on m3 in [lo, hi] from the base state (m1, m2, ., xi, p) for a collision orbit.
// Each trial is classified by the sign of 2 m3 xi - m2 at its first turn of xi above xi_turn.
ShootingResult shoot_collision_seed(const PolyState& base, double lo, double hi, const IntegratorConfig& cfg,
                                    double t_max = 50, double xi_turn = 5, int max_iter = 80);

struct CollisionSeed {
    const char* name;
    PolyState state;  // m3 refined by shoot_collision_seed
    double lo, hi;    // bracket on m3 the refinement started from
};

// Five polynomial-system seeds on the collision manifold, refined at verification_config().
const std::vector<CollisionSeed>& default_collision_seeds();

struct CheckRecord {
    std::string name;
    double window_min = 0, window_max = 0;
    double value = 0;       // measured quantity (max ratio, exponent, relative spread...)
    double slope = 0;
    double stderr_ = 0;
    double limit = 0;       // acceptance bound
    bool trivial = false;
    bool pass = false;
};

// Tight defaults: the approach to collision is unstable in one direction, so integration error off
// the collision manifold grows like xi^(3/2) and shows up in the (2 m3 xi - m2) bound.
inline IntegratorConfig verification_config() {
    IntegratorConfig c;
    c.rel_tol = 1e-13;
    c.abs_tol = 1e-16;
    return c;
}

struct VerifyOptions {
    IntegratorConfig cfg = verification_config();
    double t_max = 50;
    bool negative_control = false;
};

struct CollisionVerification {
    std::vector<CheckRecord> records;
    std::optional<CollisionEvent> event;
    double xi_end = 0;
    bool pass = false;
};

// Integrates a seed and runs the whole battery of tail checks. Throws InsufficientTail when the run
// never reaches xi = 1e4.
CollisionVerification verify_collision(const SystemSpec& spec, const std::vector<double>& y0,
                                       const VerifyOptions& opts);

}  // namespace sphere2b
