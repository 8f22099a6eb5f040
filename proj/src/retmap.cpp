#include "filsim/retmap.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "filsim/errors.hpp"
#include "filsim/integrate.hpp"
#include "filsim/sliding.hpp"
#include "filsim/surface.hpp"

namespace filsim {

namespace {

void require_second_order_on_surface(const PiecewiseSystem& sys, const Vec& x,
                                     const char* who) {
    if (!sys.second_order) {
        throw PreconditionError(std::string(who) +
                                ": return maps need a second-order system");
    }
    if (x.size() != sys.dim || !x.allFinite()) {
        throw PreconditionError(std::string(who) + ": bad start point");
    }
    const double h = sys.surface.real(x);
    if (std::abs(h) > 1e-9 * (1.0 + x.norm())) {
        throw PreconditionError(std::string(who) +
                                ": start point must lie on the surface");
    }
}

/// Simple least-squares line y = a + b t; returns the intercept a.
double ls_intercept(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t m = t.size();
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double det = m * stt - st * st;
    if (std::abs(det) < 1e-300) {
        throw InsufficientDataError("asymptotic fit: degenerate abscissae");
    }
    return (stt * sy - st * sty) / det;
}

}  // namespace

HalfReturn half_return(const PiecewiseSystem& sys, Side side, const Vec& x,
                       double t_budget) {
    require_second_order_on_surface(sys, x, "half_return");
    const double v = transversal_velocity(sys, x);
    if (side == Side::Right && !(v > 0.0)) {
        throw PreconditionError("half_return: the right half-map needs V > 0");
    }
    if (side == Side::Left && !(v < 0.0)) {
        throw PreconditionError("half_return: the left half-map needs V < 0");
    }
    const double nu = std::abs(v);

    // The raw second Lie derivatives at x set the local return-time scale
    // (tau ~ 2 nu / |L2| on an invisible side).  When the departing side's
    // L2 vanishes the point sits on a region boundary and the scale is
    // undefined.
    const double l2_l = lie_derivatives(sys, Side::Left, x, 2)[2];
    const double l2_r = lie_derivatives(sys, Side::Right, x, 2)[2];
    const double l2_own = (side == Side::Right) ? l2_r : l2_l;
    const double l2_other = (side == Side::Right) ? l2_l : l2_r;
    if (std::abs(l2_own) <= 1e-12) {
        throw NoReturnError(
            "half_return: return-time scale undefined (second Lie derivative "
            "vanishes; the point sits on a region boundary)");
    }
    double scale = 2.0 / std::abs(l2_own);
    if (std::abs(l2_other) > 1e-12) scale += 2.0 / std::abs(l2_other);
    // The surface vanishes quadratically at the arc's endpoints, so the root
    // finder must skip the trivial root at t = 0 before bracketing the next
    // intersection.
    const double t_min = 1e-3 * nu * scale;
    const double budget = (t_budget > 0.0) ? t_budget : 100.0 * nu * scale;

    const SurfaceHit hit = flow_to_surface(sys, side, x, t_min, budget);
    return {hit.point, hit.t};
}

ReturnMapSample full_return(const PiecewiseSystem& sys, const Vec& x) {
    require_second_order_on_surface(sys, x, "full_return");
    const double v = transversal_velocity(sys, x);
    if (!(v > 0.0)) {
        throw PreconditionError("full_return: start must have V > 0");
    }

    ReturnMapSample s;
    s.x = x;
    s.nu = v;
    HalfReturn right = half_return(sys, Side::Right, x);
    s.p_r = std::move(right.point);
    s.tau_r = right.time;
    HalfReturn left = half_return(sys, Side::Left, s.p_r);
    s.p = std::move(left.point);
    s.tau_l = left.time;
    s.tau = s.tau_r + s.tau_l;
    s.v_return = transversal_velocity(sys, s.p);
    return s;
}

AsymptoticFit fit_asymptotics(const PiecewiseSystem& sys, const Vec& base,
                              std::vector<double> nu_grid) {
    if (!sys.second_order) {
        throw PreconditionError("fit_asymptotics: needs a second-order system");
    }
    if (base.size() != sys.dim || !base.allFinite()) {
        throw PreconditionError("fit_asymptotics: bad base point");
    }

    AsymptoticFit fit;
    fit.base = project_to_tangency(sys, base);
    const SurfaceClassification cls = classify_point(sys, fit.base);
    if (cls.kind != SurfaceKind::Tangency || cls.region != RegionKind::InvInv) {
        throw PreconditionError(
            "fit_asymptotics: base must lie on the invisible-invisible part "
            "of the tangency set");
    }
    fit.beta_pred = beta(sys, fit.base);
    fit.c_pred = (2.0 / 3.0) * cls.lambda;

    if (nu_grid.empty()) {
        double nu = 1e-2;
        for (int k = 0; k < 8; ++k, nu *= 0.5) nu_grid.push_back(nu);
    }
    std::sort(nu_grid.begin(), nu_grid.end(), std::greater<double>());

    // Displacement direction off the tangency set: tangent to the surface,
    // unit speed in V (the min-norm solution of [grad H; grad V] u = (0,1)).
    Eigen::MatrixXd A(2, sys.dim);
    A.row(0) = surface_gradient(sys, fit.base).transpose();
    A.row(1) = transversal_velocity_gradient(sys, fit.base).transpose();
    const Eigen::Matrix2d gram = A * A.transpose();
    Eigen::Vector2d rhs2(0.0, 1.0);
    const Vec u = A.transpose() * gram.ldlt().solve(rhs2);

    for (const double nu : nu_grid) {
        if (!(nu > 0.0)) continue;
        try {
            const Vec x_nu = project_to_surface(sys, fit.base + nu * u);
            if (!(transversal_velocity(sys, x_nu) > 0.0)) continue;
            fit.samples.push_back(full_return(sys, x_nu));
        } catch (const NoReturnError&) {
            // Legitimate near the region boundary: drop the grid point.
        } catch (const PreconditionError&) {
            continue;
        }
    }
    if (fit.samples.size() < 3) {
        throw InsufficientDataError(
            "fit_asymptotics: fewer than three grid points returned");
    }

    // Fit on the smallest surviving velocities, where the leading orders
    // dominate; regressing against nu removes the next-order bias.
    const std::size_t m = std::min<std::size_t>(4, fit.samples.size());
    std::vector<double> ns, taus, dvs;
    for (std::size_t i = fit.samples.size() - m; i < fit.samples.size(); ++i) {
        const ReturnMapSample& s = fit.samples[i];
        ns.push_back(s.nu);
        taus.push_back(s.tau / s.nu);
        dvs.push_back((s.v_return - s.nu) / (s.nu * s.nu));
    }
    fit.beta_hat = ls_intercept(ns, taus);
    fit.c_hat = ls_intercept(ns, dvs);
    return fit;
}

}  // namespace filsim
