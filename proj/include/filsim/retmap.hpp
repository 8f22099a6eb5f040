#pragma once

#include <vector>

#include "filsim/system.hpp"

namespace filsim {

/// One half of the return map around an invisible-invisible tangency region:
/// the next intersection of the chosen side's flow with the surface.
struct HalfReturn {
    Vec point;
    double time = 0.0;
};

/// A full return-map evaluation P = P_L o P_R with its timing split.
struct ReturnMapSample {
    Vec x;                  ///< start on the surface with V(x) = nu > 0
    double nu = 0.0;
    Vec p_r;                ///< P_R(x)
    double tau_r = 0.0;     ///< time of the right half-arc
    Vec p;                  ///< P(x) = P_L(P_R(x))
    double tau_l = 0.0;     ///< time of the left half-arc
    double tau = 0.0;       ///< tau_r + tau_l
    double v_return = 0.0;  ///< V(P(x))
};

/// Least-squares extrapolation of the return map's leading asymptotics at a
/// tangency-set base point:
///   tau(nu)        = beta nu + O(nu^2),   beta = 2 (1/L2_L - 1/L2_R)
///   V(P(x)) - nu   = c nu^2  + O(nu^3),   c    = (2/3) Lambda
struct AsymptoticFit {
    Vec base;
    std::vector<ReturnMapSample> samples;  ///< surviving grid points, nu descending
    double beta_hat = 0.0;                 ///< fitted intercept of tau/nu
    double c_hat = 0.0;                    ///< fitted intercept of (V(P(x)) - nu)/nu^2
    double beta_pred = 0.0;                ///< predicted return-time coefficient
    double c_pred = 0.0;                   ///< predicted amplitude coefficient
};

/// Follow one side's flow from a surface point with transversal velocity of
/// the matching sign (V > 0 for the right side, V < 0 for the left) until it
/// intersects the surface again. The local return time scales like
/// 2 nu / |L2| per side, which sets both the lower cutoff excluding the
/// trivial root at t = 0 and, when t_budget <= 0, the default search budget.
/// Throws NoReturnError when the departing side's second Lie derivative
/// vanishes or the orbit does not come back within the budget — which
/// legitimately happens near the boundaries of the invisible-invisible
/// region.
HalfReturn half_return(const PiecewiseSystem& sys, Side side, const Vec& x,
                       double t_budget = 0.0);

/// Compose the right and left half-returns from a surface point with V > 0.
ReturnMapSample full_return(const PiecewiseSystem& sys, const Vec& x);

/// Evaluate the return map on a grid of transversal velocities seeded from a
/// base point on the invisible-invisible part of the tangency set, then fit
/// the leading coefficients on the smallest surviving grid points. The grid
/// defaults to eight points geometrically spaced by 1/2 from 1e-2. Grid
/// points whose orbits fail to return are dropped; fewer than three
/// survivors raise InsufficientDataError.
AsymptoticFit fit_asymptotics(const PiecewiseSystem& sys, const Vec& base,
                              std::vector<double> nu_grid = {});

}  // namespace filsim
