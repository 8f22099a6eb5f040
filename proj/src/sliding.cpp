#include "filsim/sliding.hpp"

#include <cmath>

#include "filsim/errors.hpp"
#include "filsim/surface.hpp"

namespace filsim {

Vec convex_field(const PiecewiseSystem& sys, const Vec& x, double s) {
    return (1.0 - s) * sys.left.real(x) + s * sys.right.real(x);
}

SlidingValue sliding_field(const PiecewiseSystem& sys, const Vec& x) {
    const double l1L = lie_derivatives(sys, Side::Left, x, 1)[1];
    const double l1R = lie_derivatives(sys, Side::Right, x, 1)[1];
    const double denom = l1L - l1R;
    if (std::abs(denom) <= 1e-12 * (1.0 + std::abs(l1L) + std::abs(l1R)))
        throw DegeneracyError(
            "sliding_field: equal one-sided first Lie derivatives (tangency; "
            "use the second-order machinery)");
    SlidingValue out;
    out.s = l1L / denom;
    out.field = (sys.right.real(x) * l1L - sys.left.real(x) * l1R) / denom;
    return out;
}

SlidingValue second_order_sliding_field(const PiecewiseSystem& sys, const Vec& x,
                                        double tol) {
    if (!sys.second_order || !sys.smooth_surface)
        throw PreconditionError(
            "second_order_sliding_field requires a second-order system with a "
            "smooth surface");
    const double ts = tol * (1.0 + x.norm());
    if (std::abs(sys.surface.real(x)) > ts || std::abs(transversal_velocity(sys, x)) > ts)
        throw PreconditionError(
            "second_order_sliding_field: point is not on the tangency set");
    const double l2L = lie_derivatives(sys, Side::Left, x, 2)[2];
    const double l2R = lie_derivatives(sys, Side::Right, x, 2)[2];
    const double denom = l2L - l2R;
    if (std::abs(denom) <= 1e-12 * (1.0 + std::abs(l2L) + std::abs(l2R)))
        throw DegeneracyError(
            "second_order_sliding_field: equal one-sided second Lie derivatives");
    SlidingValue out;
    out.s = l2L / denom;
    out.field = (sys.right.real(x) * l2L - sys.left.real(x) * l2R) / denom;
    return out;
}

Vec tangential_field_carvalho(const PiecewiseSystem& sys, const Vec& x, double tol) {
    if (!sys.second_order || !sys.smooth_surface)
        throw PreconditionError(
            "tangential_field_carvalho requires a second-order system with a "
            "smooth surface");
    const double ts = tol * (1.0 + x.norm());
    if (std::abs(sys.surface.real(x)) > ts || std::abs(transversal_velocity(sys, x)) > ts)
        throw PreconditionError(
            "tangential_field_carvalho: point is not on the tangency set");
    const double nL = std::abs(lie_derivatives(sys, Side::Left, x, 2)[2]);
    const double nR = std::abs(lie_derivatives(sys, Side::Right, x, 2)[2]);
    if (nL + nR <= 1e-12)
        throw DegeneracyError(
            "tangential_field_carvalho: both one-sided accelerations vanish");
    const double blend = (nR - nL) / (nR + nL);
    return 0.5 * (1.0 - blend) * sys.right.real(x) +
           0.5 * (1.0 + blend) * sys.left.real(x);
}

double beta(const PiecewiseSystem& sys, const Vec& x, double tol) {
    const SurfaceClassification c = classify_point(sys, x, tol);
    if (c.region != RegionKind::InvInv)
        throw PreconditionError(
            "beta is defined on invisible-invisible tangency points only");
    return 2.0 * (1.0 / c.lie_left[2] - 1.0 / c.lie_right[2]);
}

}  // namespace filsim
