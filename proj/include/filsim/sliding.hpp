#pragma once

#include "filsim/system.hpp"

namespace filsim {

/// Convex combination (1-s) f^L(x) + s f^R(x).
Vec convex_field(const PiecewiseSystem& sys, const Vec& x, double s);

struct SlidingValue {
    Vec field;  // velocity of the sliding motion at x
    double s;   // convex parameter selecting that velocity
};

/// Filippov sliding vector field on the discontinuity surface: the convex
/// combination tangent to {H = 0}. Throws DegeneracyError when the one-sided
/// first Lie derivatives coincide (second-order machinery applies instead).
SlidingValue sliding_field(const PiecewiseSystem& sys, const Vec& x);

/// Second-order sliding vector field on the tangency set T of a second-order
/// system: the convex combination tangent to {H = 0, V = 0}. Requires x on T;
/// throws DegeneracyError when the one-sided second Lie derivatives coincide.
SlidingValue second_order_sliding_field(const PiecewiseSystem& sys, const Vec& x,
                                        double tol = 1e-9);

/// Tangential sliding field on T built from the norm-weighted blend
///   f = (1-l)/2 f^R + (1+l)/2 f^L,
///   l = (|L2_R| - |L2_L|) / (|L2_R| + |L2_L|),
/// which agrees with the second-order sliding field on visible-visible and
/// invisible-invisible regions (and not elsewhere).
Vec tangential_field_carvalho(const PiecewiseSystem& sys, const Vec& x,
                              double tol = 1e-9);

/// Leading return-time coefficient 2 (1/L2_L - 1/L2_R) at an
/// invisible-invisible point; positive there by the sign structure.
double beta(const PiecewiseSystem& sys, const Vec& x, double tol = 1e-9);

}  // namespace filsim
