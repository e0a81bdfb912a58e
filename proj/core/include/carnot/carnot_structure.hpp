#pragma once

#include "carnot/nilgroup.hpp"

namespace carnot {

// Square matrix of polynomials over a common variable space.
using PolyMat = std::vector<std::vector<WPoly>>;

PolyMat pmat_identity(const std::vector<int>& w, int ntrunc, int n);
PolyMat pmat_from_qmat(const QMat& a, const std::vector<int>& w, int ntrunc);
PolyMat pmat_mul(const PolyMat& a, const PolyMat& b);
std::vector<WPoly> pmat_apply(const PolyMat& a, const std::vector<WPoly>& v);
QMat pmat_eval(const PolyMat& a, const PointQ& x);

// Inverse jet of a polynomial matrix whose value at 0 is invertible, via the
// Neumann series of E(0)^{-1} E(x) - I.  Entries keep the truncation of e.
PolyMat pmat_inverse(const PolyMat& e);

// Frame respecting a filtration: fields[j] is declared to lie in the layer
// of weight ws.w[j].  Invariant: the coefficient matrix is invertible at the
// basepoint.  Field coefficients should be exact polynomials (kExactTrunc)
// when the frame is meant to be recentred at more than one point.
struct HFrame {
    WeightSequence ws;
    std::vector<WPolyVectorField> fields;
    PointQ basepoint;

    bool operator==(const HFrame&) const = default;
};

// Validates dimensions, a common variable space with weights ws.w, and
// invertibility of the coefficient matrix at the basepoint.
HFrame make_hframe(const WeightSequence& ws, std::vector<WPolyVectorField> fields,
                   PointQ basepoint);

// Column j holds the coefficients of fields[j]: entry (l, j) multiplies
// d/dx_l in X_j.
PolyMat frame_matrix(const HFrame& f);
QMat frame_matrix_at(const HFrame& f, const PointQ& x);

// Expresses the frame in coordinates centred at a: coefficients are shifted
// by a and the basepoint moves to basepoint - a.  Sound on exact fields only.
HFrame recentre(const HFrame& f, const PointQ& a);

struct FiltrationReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::string> notes;
};

// Coefficients of [X_i, X_j] = sum_k L^k_ij X_k expressed in coordinates
// centred at the frame basepoint.  Keys (i, j, k) with i < j; zero
// coefficients are omitted.  A key with w_k > w_i + w_j witnesses a
// filtration violation and is also reported.
struct BracketData {
    WeightSequence ws;
    PointQ basepoint;
    std::map<std::tuple<int, int, int>, WPoly> L;
    FiltrationReport report;
};

// Resolves a requested truncation order: -1 picks the field truncation, or a
// degree-based default for exact frames.
int frame_working_trunc(const HFrame& f, int requested);

// ntrunc bounds the order the diagnostics examine; -1 picks the field
// truncation, or a degree-based default for exact frames.
BracketData bracket_coefficients(const HFrame& f, int ntrunc = -1);

// Graded tangent algebra at a: structure constants are the values L^k_ij(a)
// on the grading support w_i + w_j = w_k.  Throws PreconditionError when the
// bracket values at a leave their filtration layer.
GradedNilpotentAlgebra tangent_algebra_at(const HFrame& f, const PointQ& a);

// Full report: bracket coefficients against the filtration plus an
// informational note on whether brackets of the weight-one fields span every
// layer at the basepoint.
FiltrationReport validate_filtration(const HFrame& f, int ntrunc = -1);

} // namespace carnot
