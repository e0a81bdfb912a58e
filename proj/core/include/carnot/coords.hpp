#pragma once

#include "carnot/carnot_structure.hpp"

namespace carnot {

// Affine change x -> a x + b with exact rational entries.
struct AffineQ {
    QMat a;
    PointQ b;

    bool operator==(const AffineQ&) const = default;
};

PointQ affine_apply(const AffineQ& t, const PointQ& x);
AffineQ affine_inverse(const AffineQ& t);

// Centred polynomial coordinate change: forward and inverse fix 0 and are
// mutually inverse jets; exact polynomials when marked kExactTrunc.
struct CoordinateChange {
    WPolyMap forward;
    WPolyMap inverse;

    bool operator==(const CoordinateChange&) const = default;
};

// T(x) = E(a)^{-1} (x - a): moves a to 0 and aligns the frame with the
// coordinate directions there.
AffineQ linearly_adapt(const HFrame& f, const PointQ& a);

// Frame expressed in the image coordinates; the basepoint moves along.
HFrame pushforward_frame(const HFrame& f, const AffineQ& t);

// Polynomial change applied to a frame based at 0; ntrunc bounds the result
// (-1 takes the finest truncation shared by the inputs).
HFrame pushforward_frame(const HFrame& f, const CoordinateChange& chg, int ntrunc = -1);

struct PrivilegedReport {
    bool ok = false;
    bool linearly_adapted = false;
    std::vector<std::string> violations;
};

// Examines the frame recentred at its basepoint: linear adaptation at 0 and
// no component of weighted degree below -w_j in X_j.
PrivilegedReport is_privileged(const HFrame& f, int ntrunc = -1);

// Degree -w_j parts of the recentred fields; requires privileged
// coordinates.  Complete polynomials when the working order reaches r.
std::vector<WPolyVectorField> model_vector_fields(const HFrame& f, int ntrunc = -1);

enum class ExpMode {
    CanonicalFirstKind,     // adapt linearly, then invert the time-1 flow chart
    HomogeneousConversion,  // invert the flow chart of the model fields
};

// Exponential coordinates at a, as a centred change on x - a.
// HomogeneousConversion requires privileged coordinates and yields a
// w-homogeneous change.
CoordinateChange exp_coordinates(const HFrame& f, const PointQ& a, ExpMode mode,
                                 int ntrunc = -1);

// Chart x -> hat(T(x)) with T affine, T(basepoint) = 0, and hat triangular:
// hat_k = x_k plus terms with <alpha> <= w_k and |alpha| >= 2.  hat is a
// complete polynomial.
struct EpsCarnotMap {
    WeightSequence ws;
    PointQ basepoint;
    AffineQ t;
    WPolyMap hat;

    bool operator==(const EpsCarnotMap&) const = default;
};

EpsCarnotMap eps_carnot(const HFrame& f, const PointQ& a, int ntrunc = -1);

PointQ eps_apply(const EpsCarnotMap& e, const PointQ& x);
PointQ eps_apply_inverse(const EpsCarnotMap& e, const PointQ& y);

// Exact polynomial inverse of the triangular factor.
WPolyMap eps_hat_inverse(const EpsCarnotMap& e);

// The chart as a centred coordinate change on x - basepoint.
CoordinateChange eps_as_change(const EpsCarnotMap& e);

struct CarnotReport {
    bool ok = false;
    std::vector<std::string> violations;
};

// Carnot coordinates at the basepoint: privileged, and the model fields are
// the left-invariant frame of the tangent algebra (or of alg when given).
CarnotReport is_carnot(const HFrame& f, int ntrunc = -1);
CarnotReport is_carnot(const HFrame& f, const GradedNilpotentAlgebra& alg, int ntrunc = -1);

// Two-point chart jets around x0: xi(u, v) is the chart at x0 + u evaluated
// at x0 + v, and xi_inv(u, y) recovers v from the chart value y.  The u
// block carries the weights u_w (>= 1 each); the joint truncation couples u
// and v orders.
struct EpsField {
    WeightSequence ws;
    PointQ centre;
    std::vector<int> u_w;
    WPolyMap xi;
    WPolyMap xi_inv;
};

EpsField eps_field(const HFrame& f, const PointQ& x0, const std::vector<int>& u_w,
                   int ntrunc);

// R(u, v) = xi(u, v) - (-u) . v over the jointly graded doubled space, with
// the tangent group law at the basepoint.  Requires Carnot coordinates;
// vanishes identically on group frames.
struct OsculationData {
    WPolyMap residual;
    std::optional<long long> order;
    bool order_positive = false;
};

OsculationData osculation_residual(const HFrame& f, int ntrunc = -1);

} // namespace carnot
