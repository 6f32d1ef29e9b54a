#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace sphere2b {

using Vec3 = std::array<double, 3>;

enum class ErrorKind {
    Domain,
    SingularInput,
    DegenerateConfiguration,
    Inconsistency,
    CoordinateSingularity,
    Range,
    InsufficientTail,
    WindowTooShort,
    AmbiguousTail,
    NonConvergent,
    StepUnderflow,
    BudgetExhausted,
    InvalidState,
    ClassificationAmbiguous,
    Io,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct Masses {
    double mu1 = 1.0;
    double mu2 = 1.0;
};

struct ReducedState {
    double m1 = 0, m2 = 0, m3 = 0;
    double q = 0;
    double p = 0;
};

struct PolyState {
    double m1 = 0, m2 = 0, m3 = 0;
    double xi = 0;
    double p = 0;
};

struct RegState {
    double m1 = 0, m2 = 0, m3 = 0;
    double eta = 0;
    double zeta = 0;
};

enum class Chart { Chart1, Chart2, InvariantPlane };

const char* chart_name(Chart c);

// m1, m2 and angle2 are ignored for InvariantPlane.
struct BlowupChartState {
    Chart chart = Chart::Chart1;
    double m1 = 0, m2 = 0;
    double radial = 0;
    double angle1 = 0;
    double angle2 = 0;
};

struct FullState {
    Vec3 q1{}, q2{};
    Vec3 p1{}, p2{};
};

struct LevelSet {
    double h = 0;
    double C = 0;
};

struct FrameAngles {
    double theta = 0;
    double phi = 0;
};

inline constexpr double kConstraintTol = 1e-9;

double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

// [0, 2pi)
double wrap_2pi(double a);

double xi_from_q(double q);
double q_from_xi(double xi);

PolyState to_poly(const ReducedState& s);
ReducedState to_reduced(const PolyState& s);
RegState to_regularised(const PolyState& s);
PolyState to_poly(const RegState& s);

// (m3, eta, zeta); m3 = 0 for InvariantPlane.
Vec3 chart_pushforward(const BlowupChartState& s);

// Inverse of chart_pushforward. For InvariantPlane the m3 entry is ignored.
BlowupChartState chart_pullback(Chart chart, double m1, double m2, const Vec3& m3_eta_zeta);

// Weighted radius shared by both charts: (m3/r)^2 + (eta/r^2)^2 + (zeta/r)^2 = 1.
double weighted_radius(const Vec3& m3_eta_zeta);

// Columns e1, e2, e3 of the body frame g.
std::array<Vec3, 3> body_frame(const FullState& f);

ReducedState reduce_full_state(const FullState& f, const Masses& masses);

FrameAngles frame_angles_from_m(const Vec3& m, double L);

Vec3 angular_momentum(const FullState& f);

void validate(const FullState& f);
void validate(const ReducedState& s);

}  // namespace sphere2b
