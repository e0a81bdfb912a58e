#pragma once

#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

// Exponent vector of a monomial; one entry per variable.
using MultiIndex = std::vector<int>;

// Weight sequence of a graded coordinate system: non-decreasing, starts at 1,
// ends at the step r.
struct WeightSequence {
    int n = 0;
    int r = 0;
    std::vector<int> w;

    bool operator==(const WeightSequence&) const = default;
};

// Validates and builds a WeightSequence; throws InputError when the sequence
// is empty, not non-decreasing, does not start at 1, or has a gap (every
// value from 1 to r must occur).
WeightSequence make_weight_sequence(const std::vector<int>& w);

// Rank of the layer of weight v: number of entries <= v.
int layer_rank(const WeightSequence& ws, int v);

// <alpha> = sum_i w_i * alpha_i.  Entries of alpha must be >= 0.
long long weighted_degree(const MultiIndex& alpha, const std::vector<int>& w);

// delta_t(x): multiplies coordinate i by t^{w_i}.
PointQ dilate(const Rat& t, const PointQ& x, const WeightSequence& ws);
PointD dilate(double t, const PointD& x, const WeightSequence& ws);

// Homogeneous pseudo-norm sum_i |x_i|^{1/w_i}.
double pseudo_norm(const PointD& x, const WeightSequence& ws);
double pseudo_norm(const PointQ& x, const WeightSequence& ws);

} // namespace carnot
