#pragma once

#include <string>
#include <variant>
#include <vector>

#include "carnot/carnot_map.hpp"
#include "carnot/coords.hpp"

namespace carnot {

// Pair element (x, y, t) with t != 0: the arrow from y to x at parameter t.
struct GroupoidPair {
    PointQ x;
    PointQ y;
    Rat t;

    bool operator==(const GroupoidPair&) const = default;
};

// t = 0 fibre element: a tangent group vector xi based at x, expressed in
// the eps chart at x.
struct TangentElem {
    PointQ x;
    PointQ xi;

    bool operator==(const TangentElem&) const = default;
};

using GroupoidElem = std::variant<GroupoidPair, TangentElem>;

// Glued chart around the t = 0 fibre over points near the centre: the pair
// (x, y, t) corresponds to (x, xi, t) with y = eps_x^{-1}(delta_t xi).
// Internally every point passes through the privileged chart at the centre
// (base); the two-point eps data ef belongs to the frame pushed forward to
// those coordinates, where all its components start at their slot weight.
struct GroupoidChart {
    HFrame frame;
    PointQ centre;
    int ntrunc = 0;
    EpsCarnotMap base;
    EpsField ef;
};

GroupoidChart make_groupoid_chart(const HFrame& f, const PointQ& x0, int ntrunc = -1);

struct ChartCoords {
    PointQ x;
    PointQ xi;
    Rat t;

    bool operator==(const ChartCoords&) const = default;
};

ChartCoords elem_to_chart(const GroupoidChart& ch, const GroupoidElem& e);
GroupoidElem elem_from_chart(const GroupoidChart& ch, const ChartCoords& c);

// Base (range side) and partner (source side) points; both equal x at t = 0.
PointQ elem_base(const GroupoidElem& e);
PointQ elem_partner(const GroupoidElem& e);

// Chart operation as a jet over (u, value blocks, t) with t a trailing
// weight-0 variable: full = at_zero + t * theta, where at_zero is the t = 0
// slice with the t variable removed (the osculating operation at base u)
// and theta is the polynomial transition correction.
struct ChartOp {
    WPolyMap full;
    WPolyMap at_zero;
    WPolyMap theta;
};

// zeta(u, xi, eta, t): chart value of the product of (u, xi, t) with the
// element based at its partner carrying value eta.
ChartOp chart_mult(const GroupoidChart& ch);

// xi'(u, xi, t): chart value of the inverse element, which is based at the
// partner point.
ChartOp chart_invert(const GroupoidChart& ch);

// u'(u, xi, t) = partner base offset xi_inv(u, delta_t xi), polynomial in t.
WPolyMap chart_partner(const GroupoidChart& ch);

// Transition between two charts of the same filtered patch.  point carries
// from-chart coordinates of a base point to to-chart coordinates; the fiber
// op sends (u, xi, t) to the to-chart fiber value, and its t = 0 slice is
// the graded differential of the point map at u.  Charts of one frame share
// the fiber trivialization, so there the slice is the identity.
struct ChartTransition {
    WPolyMap point;
    ChartOp op;
};

ChartTransition chart_transition(const GroupoidChart& from, const GroupoidChart& to);

// Point-level transition.  Pairs go through the element layer; the t = 0
// stratum applies the order-zero slice at the base, which converts between
// the fiber trivializations of the two frames.
ChartCoords transition_coords(const GroupoidChart& from, const GroupoidChart& to,
                              const ChartCoords& c);

// Point-level operations.  Pairs compose exactly; tangent elements use the
// osculating law at their base.
GroupoidElem elem_invert(const GroupoidChart& ch, const GroupoidElem& e);
GroupoidElem elem_mult(const GroupoidChart& ch, const GroupoidElem& a,
                       const GroupoidElem& b);

struct GroupoidAxioms {
    bool identity_left = false;
    bool identity_right = false;
    bool inverse_ok = false;
    bool assoc_ok = false;
    std::vector<std::string> notes;

    bool all() const {
        return identity_left && identity_right && inverse_ok && assoc_ok;
    }
};

// Symbolic checks on the chart jets: unit elements act trivially, an
// element composed with its inverse gives the unit, and composition is
// associative across base tracking.
GroupoidAxioms check_groupoid_axioms(const GroupoidChart& ch);

// Image of an element under an exact map: pairs map pointwise at the same
// t; tangent elements map by the graded differential at their base.  The
// frames provide the filtrations; basepoints are taken from the element.
GroupoidElem morphism_apply(const HFrame& src, const HFrame& tgt, const WPolyMap& phi,
                            const GroupoidElem& e, int ntrunc = -1);

// Difference quotients delta_{1/t_l}(eps_x(y_l)) with Neville extrapolation
// to t = 0 in exact arithmetic.  settled means the last two diagonal
// entries agree exactly, which holds whenever the data is polynomial in t
// of degree below the node count.
struct ConvergenceProbe {
    std::vector<PointQ> quotients;
    PointQ extrapolated;
    Rat gap_sq;
    bool settled = false;
};

ConvergenceProbe convergence_probe(const GroupoidChart& ch, const PointQ& x,
                                   const std::vector<PointQ>& ys,
                                   const std::vector<Rat>& ts);

}  // namespace carnot
