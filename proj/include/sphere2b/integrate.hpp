#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sphere2b/core.hpp"
#include "sphere2b/fields.hpp"

namespace sphere2b {

enum class System {
    Full,
    Reduced,
    Poly,
    Regularised,
    // regularised state plus physical time t, with t' = eta^2
    RegularisedTimed,
    InvariantPlaneQ,
    InvariantPlaneXi,
    InvariantPlaneReg,
    InvariantPlaneBlowup,
    Chart1,
    Chart2,
};

const char* system_name(System s);
std::optional<System> system_from_name(const std::string& name);

struct SystemSpec {
    System system = System::Poly;
    Masses masses{};
    // invariant-plane systems only
    int sign = 1;
    double C = 0;
    // blow-up charts: integrate the field divided by the radial coordinate
    bool divided = true;
};

std::size_t system_dim(System s);
std::vector<std::string> component_names(System s);

// Writes the derivative of y into dy.
using RhsFn = std::function<void(double t, const double* y, double* dy)>;
RhsFn make_rhs(const SystemSpec& spec);

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0;  // 0 picks one automatically
    double xi_collision_threshold = 1e6;
    double q_floor = 1e-6;
    std::size_t max_steps = 10'000'000;
    bool record_dense = true;
};

struct CollisionEvent {
    double t_star = 0;
    double t_star_stderr = 0;
    double beta = 0;
    double beta_stderr = 0;
    double fit_residual = 0;
    std::vector<double> terminal_state;
    int extrapolation_order = 1;
};

enum class Termination { EndReached, Collision, Antipodal, StopCondition };
const char* termination_name(Termination t);

// Cubic-plus Dormand-Prince continuous extension on [t0, t0 + h].
struct DenseSegment {
    double t0 = 0;
    double h = 0;
    std::vector<double> coef;  // 5 * dim
};

struct Trajectory {
    SystemSpec spec{};
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> states;  // row-major, dim entries per sample
    std::vector<double> drift_H;
    std::vector<double> drift_C;
    double H0 = std::numeric_limits<double>::quiet_NaN();
    double C0 = std::numeric_limits<double>::quiet_NaN();
    std::vector<DenseSegment> segments;
    Termination termination = Termination::EndReached;
    std::optional<CollisionEvent> terminal_event;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::size_t size() const { return times.size(); }
    const double* state(std::size_t i) const { return states.data() + i * dim; }
    std::vector<double> state_vec(std::size_t i) const {
        return {state(i), state(i) + dim};
    }
    std::vector<double> dense(double t) const;
    double max_drift_H() const;
    double max_drift_C() const;
};

// Energy and Casimir in the native coordinates of the system; NaN where undefined.
std::pair<double, double> invariants(const SystemSpec& spec, const double* y);

// The sample expressed as a polynomial-system state, for systems that map to one (equal masses
// for the reduced system); none otherwise or at the singular set.
std::optional<PolyState> poly_view(const SystemSpec& spec, const double* y);

// Largest drift of H and C over the run, each divided by max(|H0|, scale at the sample) where the
// scale is the magnitude of the energy terms (poly-type systems) and |C0| for the Casimir.
std::pair<double, double> max_relative_drift(const Trajectory& traj);

// Collision coordinate xi = cot q for systems that carry one; NaN otherwise.
double xi_of(const SystemSpec& spec, const double* y);

// Optional user predicate checked after each accepted step; returning true stops the run.
using StopFn = std::function<bool(double t, const double* y)>;

Trajectory integrate(const SystemSpec& spec, const std::vector<double>& y0, double t0, double t1,
                     const IntegratorConfig& cfg, const StopFn& stop = {});

// Bare driver used by integrate(); no invariants, no collision logic.
Trajectory integrate_rhs(const RhsFn& f, std::size_t dim, const std::vector<double>& y0, double t0,
                         double t1, const IntegratorConfig& cfg, const StopFn& stop = {});

// Pole fit of the xi(t) tail; none when the threshold was not reached.
std::optional<CollisionEvent> detect_collision(const Trajectory& traj, const IntegratorConfig& cfg);

struct RegularisedContinuation {
    Trajectory traj;          // System::RegularisedTimed, time variable tau
    double handoff_residual;  // |eta * xi - 1| at the handoff point
    double t_star;            // reconstructed collision time
    double tail_estimate;     // bound on the neglected integral of eta^2 beyond the last sample
};

// eta_stop: stop once eta falls below this value (default: 1e-6 times the handoff eta).
RegularisedContinuation continue_regularised(const Trajectory& traj, const IntegratorConfig& cfg,
                                             double eta_stop = 0);

}  // namespace sphere2b
