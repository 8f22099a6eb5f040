#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "filsim/surface.hpp"
#include "filsim/system.hpp"

namespace filsim {

/// Which restricted dynamics the equilibrium belongs to: the sliding field on
/// the discontinuity surface (First) or the tangential field on the tangency
/// set of a second-order system (Second).
enum class EqOrder { First, Second };

/// Whether the convex parameter of the restricted field lies in [0, 1] at the
/// point (the combination is realized by the flow) or outside it (the root
/// exists only for the formal extension of the field).
enum class Admissibility { Admissible, Virtual };

enum class Verdict { AsymptoticallyStable, Unstable, Inconclusive };

const char* to_string(EqOrder o);
const char* to_string(Admissibility a);
const char* to_string(Verdict v);

/// A root of the restricted surface dynamics, with the data needed to judge
/// its stability.
struct PseudoEquilibrium {
    Vec point;
    EqOrder order = EqOrder::First;
    Admissibility admissibility = Admissibility::Virtual;
    /// Surface classification at the point.
    SurfaceKind kind = SurfaceKind::Crossing;
    RegionKind region = RegionKind::NotApplicable;
    /// Convex parameter of the restricted field: L1_L/(L1_L - L1_R) for first
    /// order, L2_L/(L2_L - L2_R) for second order.
    double s = std::numeric_limits<double>::quiet_NaN();
    /// Attraction coefficient; NaN unless the point is invisible-invisible.
    double lambda = std::numeric_limits<double>::quiet_NaN();
    /// Jacobian of the restricted field in an orthonormal chart of the
    /// surface ((n-1) x (n-1)) or of the tangency set ((n-2) x (n-2)).
    Eigen::MatrixXd jacobian;
    /// Eigenvalues of `jacobian`, sorted by descending real part.
    Eigen::VectorXcd eigenvalues;
    Verdict verdict = Verdict::Inconclusive;
};

/// Orthonormal basis of the chart at a point x of the relevant manifold: the
/// orthogonal complement of grad H (first order) or of span{grad H, grad V}
/// (second order). Columns span the tangent space; n-1 or n-2 of them.
Eigen::MatrixXd chart_basis(const PiecewiseSystem& sys, const Vec& x, EqOrder order);

/// Jacobian of the restricted field at x in the chart spanned by the columns
/// of `basis`: central finite differences with step 1e-6 (1 + |x|), each
/// displaced point reprojected onto the manifold before evaluating. The
/// eigenvalues are invariant under rotation of the basis within the chart.
Eigen::MatrixXd restricted_jacobian(const PiecewiseSystem& sys, const Vec& x,
                                    EqOrder order, const Eigen::MatrixXd& basis);

/// Newton-search the restricted field from each seed, in chart coordinates
/// rebuilt at every iterate. Converged roots (residual below 1e-10) are
/// deduplicated by distance 1e-6 and classified. Seeds whose iteration
/// diverges, fails to converge, or lands on a degenerate point are skipped;
/// if `notes` is non-null, a one-line reason per skipped seed is appended.
std::vector<PseudoEquilibrium> find_pseudo_equilibria(
    const PiecewiseSystem& sys, const std::vector<Vec>& seeds, EqOrder order,
    std::vector<std::string>* notes = nullptr);

/// Stability verdict for a located pseudo-equilibrium, with eigenvalue real
/// parts compared against a tolerance of 1e-8.
///
/// First order: a point of an attracting sliding region whose restricted
/// eigenvalues all have negative real part is asymptotically stable; a point
/// of a repelling region, or any eigenvalue with positive real part, makes it
/// unstable; anything else is inconclusive.
///
/// Second order: an attracting invisible-invisible point (Lambda < 0) whose
/// restricted eigenvalues all have negative real part is asymptotically
/// stable; a visible-visible point, a repelling invisible-invisible point
/// (Lambda > 0), or any eigenvalue with positive real part is unstable;
/// marginal spectra and marginal Lambda are reported inconclusive rather than
/// decided.
Verdict classify_stability(const PiecewiseSystem& sys, const PseudoEquilibrium& pe);

}  // namespace filsim
