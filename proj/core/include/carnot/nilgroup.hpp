#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "carnot/wpoly.hpp"

namespace carnot {

// One raw structure constant [e_i, e_j] = c * e_k + ...; indices 0-based.
struct StructureConstant {
    int i = 0, j = 0, k = 0;
    Rat c;

    bool operator==(const StructureConstant&) const = default;
};

// Graded nilpotent Lie algebra in a graded basis.  Storage is canonical:
// keys (i, j, k) with i < j and w_i + w_j = w_k; the i > j half follows by
// antisymmetry and everything else vanishes.
struct GradedNilpotentAlgebra {
    WeightSequence ws;
    std::map<std::tuple<int, int, int>, Rat> constants;

    // Coefficient of e_k in [e_i, e_j] with the antisymmetric completion.
    Rat bracket_coeff(int i, int j, int k) const;

    // [x, y] for rational vectors.
    PointQ bracket_vec(const PointQ& x, const PointQ& y) const;
};

struct AlgebraValidation {
    bool ok = true;
    std::vector<std::string> violations;
};

// Checks antisymmetry consistency, grading support and the Jacobi identity
// of a raw constant list.
AlgebraValidation validate_algebra(const WeightSequence& ws,
                                   const std::vector<StructureConstant>& raw);

// Canonicalizes a raw list into an algebra; throws InputError when
// validate_algebra reports violations.
GradedNilpotentAlgebra make_algebra(const WeightSequence& ws,
                                    const std::vector<StructureConstant>& raw);

// Matrix of ad_x in the graded basis: entry (k, j) = sum_i c_{ijk} x_i.
// Strictly lower triangular in weight, hence nilpotent.
QMat adjoint_matrix(const GradedNilpotentAlgebra& alg, const PointQ& x);

// Group product in canonical coordinates of the first kind, evaluated
// directly through the finite bracket series with nilpotent adjoints.
PointQ dynkin_product(const GradedNilpotentAlgebra& alg, const PointQ& x, const PointQ& y);

// Inverse in canonical coordinates.
PointQ group_inverse(const PointQ& x);

// Carnot group: the algebra together with its cached polynomial group law
// over the doubled variable space (x-block, y-block).
struct NilpotentGroup {
    GradedNilpotentAlgebra alg;
    int ntrunc = 0;
    WPolyMap law;
};

// Builds the group with an eagerly computed symbolic law.  ntrunc defaults
// to 2r, which holds the law exactly.
NilpotentGroup make_group(const GradedNilpotentAlgebra& alg, int ntrunc = -1);

// Product through the cached law; exact.
PointQ group_mul(const NilpotentGroup& g, const PointQ& x, const PointQ& y);

// Left-invariant frame X_j = d/ds|_0 x . (s e_j), obtained by differentiating
// the cached law in the second block.
std::vector<WPolyVectorField> left_invariant_frame(const NilpotentGroup& g);

// The polynomial map y -> a . y.
WPolyMap left_translation_jet(const NilpotentGroup& g, const PointQ& a);

} // namespace carnot
