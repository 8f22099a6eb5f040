#pragma once

#include <limits>
#include <vector>

#include "filsim/system.hpp"

namespace filsim {

enum class SurfaceKind { Crossing, AttractingSliding, RepellingSliding, Tangency };

/// Fold visibility of one side's orbit at a tangency point of that side.
enum class Fold { NotApplicable, Visible, Invisible, Degenerate };

/// Classification of a tangency-surface point of a second-order system by the
/// signs of the one-sided second Lie derivatives.
enum class RegionKind { NotApplicable, VisVis, VisInv, InvInv, Boundary };

enum class LambdaSign { NotApplicable, Attracting, Repelling, Marginal };

const char* to_string(SurfaceKind k);
const char* to_string(Fold f);
const char* to_string(RegionKind r);
const char* to_string(LambdaSign s);

struct SurfaceClassification {
    Vec point;
    std::vector<double> lie_left;   // [h, L^1, L^2, L^3] along the left field
    std::vector<double> lie_right;  // same along the right field
    SurfaceKind kind = SurfaceKind::Crossing;
    Fold fold_left = Fold::NotApplicable;
    Fold fold_right = Fold::NotApplicable;
    RegionKind region = RegionKind::NotApplicable;
    /// L^3_L/(L^2_L)^2 - L^3_R/(L^2_R)^2; NaN unless region is InvInv with
    /// both second derivatives clear of the tolerance.
    double lambda = std::numeric_limits<double>::quiet_NaN();
    LambdaSign lambda_sign = LambdaSign::NotApplicable;
};

/// Classify a surface point by the signs of its one-sided Lie derivatives.
/// tol is scaled internally by (1 + |x|); values within the scaled tolerance
/// of zero are treated as zero (giving Tangency / Degenerate / Boundary
/// verdicts rather than a forced sign class). Throws PreconditionError when
/// x is not on the surface to within the scaled tolerance.
SurfaceClassification classify_point(const PiecewiseSystem& sys, const Vec& x,
                                     double tol = 1e-9);

/// The attraction coefficient Lambda, computed unguarded: +-inf or NaN when a
/// second Lie derivative vanishes (callers filter by region first).
double attraction_coefficient(const PiecewiseSystem& sys, const Vec& x);

/// Newton-project x onto the surface {H = 0} along the surface gradient.
Vec project_to_surface(const PiecewiseSystem& sys, const Vec& x,
                       double tol = 1e-13, int max_iter = 50);

/// Gauss-Newton-project x onto the tangency set {H = 0, V = 0} (least-norm
/// steps). Requires a second-order system with a smooth surface.
Vec project_to_tangency(const PiecewiseSystem& sys, const Vec& x,
                        double tol = 1e-12, int max_iter = 50);

/// Second singular value of the n-by-2 matrix [grad H, grad V]; the tangency
/// set is a well-defined codimension-two manifold where this is bounded away
/// from zero.
double tangency_rank_sigma(const PiecewiseSystem& sys, const Vec& x);

enum class BoundaryKind { CubicTangencyL, CubicTangencyR, AttractionChange };

const char* to_string(BoundaryKind k);

struct BoundaryPoint {
    Vec point;
    BoundaryKind kind;
    double param;  // value of the chart coordinate at the boundary
};

/// A one-parameter chart of the tangency set T, parameterized by one state
/// coordinate (chosen automatically as the dominant component of T's tangent
/// direction at the seed unless specified). Charted points solve
/// {H = 0, V = 0} in each coordinate slice by Newton continuation.
struct TangencyChart {
    int chart_coord = -1;
    double lo = 0.0, hi = 0.0;
    std::vector<double> params;  // grid values of the chart coordinate
    std::vector<Vec> points;     // corresponding points on T
    std::vector<BoundaryPoint> boundaries;
    double min_rank_sigma = 0.0;  // smallest rank singular value seen
};

/// Chart T through `seed` over chart-coordinate interval [lo, hi] and locate
/// region boundaries on it: zeros of L^2_L (CubicTangencyL), zeros of L^2_R
/// (CubicTangencyR), and zeros of Lambda inside invisible-invisible segments
/// (AttractionChange). Throws PreconditionError if the seed is not near T or
/// the chart Newton fails, DegeneracyError if the rank condition fails.
TangencyChart chart_tangency(const PiecewiseSystem& sys, const Vec& seed,
                             double lo, double hi, int chart_coord = -1,
                             int grid = 200);

/// Just the boundary points of chart_tangency.
std::vector<BoundaryPoint> find_region_boundaries(const PiecewiseSystem& sys,
                                                  const Vec& seed, double lo,
                                                  double hi, int chart_coord = -1,
                                                  int grid = 200);

}  // namespace filsim
