#pragma once

#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

// Dense rational matrix, row major.
using QMat = std::vector<std::vector<Rat>>;

QMat qmat_zero(int rows, int cols);
QMat qmat_identity(int n);
QMat qmat_mul(const QMat& a, const QMat& b);
PointQ qmat_apply(const QMat& a, const PointQ& x);
QMat qmat_add(const QMat& a, const QMat& b);
QMat qmat_scale(const Rat& c, const QMat& a);

// Gauss-Jordan with exact pivoting; throws PreconditionError on a singular
// input.
QMat qmat_inverse(const QMat& a);

bool qmat_is_invertible(const QMat& a);

// Rank over the rationals by Gaussian elimination; rows need not be square.
int qmat_rank(QMat rows);

Rat qmat_det(const QMat& a);

} // namespace carnot
