#pragma once

#include "carnot/carnot_structure.hpp"

namespace carnot {

// Ready-made algebras, frames and maps shared by the test suites and the
// CLI examples.  Every object is exact: coefficients carry kExactTrunc.

GradedNilpotentAlgebra heisenberg_algebra();
GradedNilpotentAlgebra engel_algebra();

// Coordinate frame on the plane, weights (1, 1).
HFrame abelian2_frame();

// Left-invariant frames of the group fixtures, based at 0.
HFrame heisenberg3_frame();
HFrame engel4_frame();

// Polarized frames: d/dx1, d/dx2 + x1 d/dx3, d/dx3 and its Engel analogue.
// Same tangent algebras as the group fixtures, different coordinates.
HFrame heisenberg3_polarized_frame();
HFrame engel4_polarized_frame();

// Heisenberg frame with a position-dependent bracket [X1, X2] =
// (1 + x1/2) X3: privileged at 0 but not left invariant anywhere.
HFrame heisenberg3_perturbed_frame();

// Valid H-frame whose first field carries a constant d/dx3 coefficient of
// weighted degree -2 < -1, so the given coordinates are not privileged.
HFrame nonprivileged3_frame();

// Filtration lift to M x R for a parabolic scaling: a weight-2 slot is
// inserted after the last slot of weight <= 2, the original fields extend
// by zero there, and the coordinate field of the new slot joins the frame.
// The new weight-1 layer is no longer bracket generating.
HFrame heat_lift_frame(const HFrame& f);

// Replaces X_2 by X_2 + x1 X_1: a different frame of the same filtration.
// Requires at least two weight-1 slots.
HFrame frame_shear_first_layer(const HFrame& f);

// Maps over the Heisenberg coordinates, weights (1, 1, 2).
// Shear (x1, x2 + c x1^2, x3 + c x1^3 / 6): a Carnot diffeomorphism with
// exact inverse heisenberg_shear(-c); not a group homomorphism.
WPolyMap heisenberg_shear(const Rat& c);
// Graded automorphism (s x1, s x2, s^2 x3).
WPolyMap heisenberg_dilation(const Rat& s);
// Graded automorphism (x2, x1, -x3); an involution.
WPolyMap heisenberg_swap();
// Carnot submersion (x1, x2) onto the abelian plane.
WPolyMap heisenberg_projection();
// (0, 0, x1): sends the weight-1 direction into the weight-2 slot, so the
// frame decomposition hits a forbidden block.  Negative control.
WPolyMap weight_raising_map();

} // namespace carnot
