#include "filsim/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "filsim/errors.hpp"
#include "filsim/rootfind.hpp"

namespace filsim {

const char* to_string(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Crossing: return "Crossing";
        case SurfaceKind::AttractingSliding: return "AttractingSliding";
        case SurfaceKind::RepellingSliding: return "RepellingSliding";
        case SurfaceKind::Tangency: return "Tangency";
    }
    return "?";
}

const char* to_string(Fold f) {
    switch (f) {
        case Fold::NotApplicable: return "NotApplicable";
        case Fold::Visible: return "Visible";
        case Fold::Invisible: return "Invisible";
        case Fold::Degenerate: return "Degenerate";
    }
    return "?";
}

const char* to_string(RegionKind r) {
    switch (r) {
        case RegionKind::NotApplicable: return "NotApplicable";
        case RegionKind::VisVis: return "VisVis";
        case RegionKind::VisInv: return "VisInv";
        case RegionKind::InvInv: return "InvInv";
        case RegionKind::Boundary: return "Boundary";
    }
    return "?";
}

const char* to_string(LambdaSign s) {
    switch (s) {
        case LambdaSign::NotApplicable: return "NotApplicable";
        case LambdaSign::Attracting: return "Attracting";
        case LambdaSign::Repelling: return "Repelling";
        case LambdaSign::Marginal: return "Marginal";
    }
    return "?";
}

const char* to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::CubicTangencyL: return "cL";
        case BoundaryKind::CubicTangencyR: return "cR";
        case BoundaryKind::AttractionChange: return "chi";
    }
    return "?";
}

SurfaceClassification classify_point(const PiecewiseSystem& sys, const Vec& x, double tol) {
    const double ts = tol * (1.0 + x.norm());
    if (std::abs(sys.surface.real(x)) > ts)
        throw PreconditionError("classify_point: point is not on the surface");

    SurfaceClassification c;
    c.point = x;
    c.lie_left = lie_derivatives(sys, Side::Left, x, 3);
    c.lie_right = lie_derivatives(sys, Side::Right, x, 3);
    const double l1L = c.lie_left[1], l2L = c.lie_left[2];
    const double l1R = c.lie_right[1], l2R = c.lie_right[2];
    const bool tangentL = std::abs(l1L) <= ts;
    const bool tangentR = std::abs(l1R) <= ts;

    if (!tangentL && !tangentR) {
        if ((l1L > 0.0) == (l1R > 0.0))
            c.kind = SurfaceKind::Crossing;
        else if (l1L > 0.0)
            c.kind = SurfaceKind::AttractingSliding;
        else
            c.kind = SurfaceKind::RepellingSliding;
        return c;
    }

    c.kind = SurfaceKind::Tangency;
    if (tangentL)
        c.fold_left = l2L < -ts ? Fold::Visible
                                : (l2L > ts ? Fold::Invisible : Fold::Degenerate);
    if (tangentR)  // visibility of the right orbit has the opposite sign rule
        c.fold_right = l2R > ts ? Fold::Visible
                                : (l2R < -ts ? Fold::Invisible : Fold::Degenerate);

    if (sys.second_order && tangentL && tangentR) {
        if (std::abs(l2L) <= ts || std::abs(l2R) <= ts) {
            c.region = RegionKind::Boundary;
        } else if (l2L < 0.0 && l2R > 0.0) {
            c.region = RegionKind::VisVis;
        } else if (l2L > 0.0 && l2R < 0.0) {
            c.region = RegionKind::InvInv;
        } else {
            c.region = RegionKind::VisInv;
        }
        if (c.region == RegionKind::InvInv) {
            c.lambda = c.lie_left[3] / (l2L * l2L) - c.lie_right[3] / (l2R * l2R);
            c.lambda_sign = c.lambda < -ts ? LambdaSign::Attracting
                                           : (c.lambda > ts ? LambdaSign::Repelling
                                                            : LambdaSign::Marginal);
        }
    }
    return c;
}

double attraction_coefficient(const PiecewiseSystem& sys, const Vec& x) {
    const auto left = lie_derivatives(sys, Side::Left, x, 3);
    const auto right = lie_derivatives(sys, Side::Right, x, 3);
    return left[3] / (left[2] * left[2]) - right[3] / (right[2] * right[2]);
}

Vec project_to_surface(const PiecewiseSystem& sys, const Vec& x, double tol, int max_iter) {
    Vec y = x;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double h = sys.surface.real(y);
        if (std::abs(h) <= tol * (1.0 + y.norm())) return y;
        const Vec grad = surface_gradient(sys, y);
        const double g2 = grad.squaredNorm();
        if (g2 < 1e-20)
            throw DegeneracyError("project_to_surface: vanishing surface gradient");
        y -= (h / g2) * grad;
    }
    throw PreconditionError("project_to_surface: Newton did not converge");
}

Vec project_to_tangency(const PiecewiseSystem& sys, const Vec& x, double tol, int max_iter) {
    if (!sys.second_order || !sys.smooth_surface)
        throw PreconditionError(
            "project_to_tangency requires a second-order system with a smooth surface");
    Vec y = x;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double h = sys.surface.real(y);
        const double v = transversal_velocity(sys, y);
        if (std::max(std::abs(h), std::abs(v)) <= tol * (1.0 + y.norm())) return y;
        Eigen::MatrixXd jac(2, sys.dim);
        jac.row(0) = surface_gradient(sys, y).transpose();
        jac.row(1) = transversal_velocity_gradient(sys, y).transpose();
        const Eigen::Vector2d residual(h, v);
        // Least-norm Newton step: J^T (J J^T)^{-1} r.
        const Eigen::Matrix2d gram = jac * jac.transpose();
        if (std::abs(gram.determinant()) < 1e-16)
            throw DegeneracyError("project_to_tangency: rank-deficient tangency equations");
        y -= jac.transpose() * gram.ldlt().solve(residual);
    }
    throw PreconditionError("project_to_tangency: Newton did not converge");
}

double tangency_rank_sigma(const PiecewiseSystem& sys, const Vec& x) {
    Eigen::MatrixXd m(sys.dim, 2);
    m.col(0) = surface_gradient(sys, x);
    m.col(1) = transversal_velocity_gradient(sys, x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()[1];
}

namespace {

/// Newton-solve {H = 0, V = 0} restricted to the slice x[chart] = s.
Vec solve_tangency_slice(const PiecewiseSystem& sys, Vec guess, int chart, double s,
                         double tol = 1e-12, int max_iter = 50) {
    guess[chart] = s;
    const int n = sys.dim;
    std::vector<int> free_idx;
    free_idx.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != chart) free_idx.push_back(i);

    for (int iter = 0; iter < max_iter; ++iter) {
        const double h = sys.surface.real(guess);
        const double v = transversal_velocity(sys, guess);
        if (std::max(std::abs(h), std::abs(v)) <= tol * (1.0 + guess.norm())) return guess;
        const Vec gh = surface_gradient(sys, guess);
        const Vec gv = transversal_velocity_gradient(sys, guess);
        Eigen::MatrixXd jac(2, n - 1);
        for (size_t j = 0; j < free_idx.size(); ++j) {
            jac(0, static_cast<Eigen::Index>(j)) = gh[free_idx[j]];
            jac(1, static_cast<Eigen::Index>(j)) = gv[free_idx[j]];
        }
        const Eigen::Vector2d residual(h, v);
        const Eigen::VectorXd step =
            jac.completeOrthogonalDecomposition().solve(residual);
        for (size_t j = 0; j < free_idx.size(); ++j)
            guess[free_idx[j]] -= step[static_cast<Eigen::Index>(j)];
    }
    std::ostringstream msg;
    msg << "tangency chart: Newton did not converge in the slice x[" << chart
        << "] = " << s;
    throw PreconditionError(msg.str());
}

int pick_chart_coordinate(const PiecewiseSystem& sys, const Vec& x) {
    Eigen::MatrixXd jac(2, sys.dim);
    jac.row(0) = surface_gradient(sys, x).transpose();
    jac.row(1) = transversal_velocity_gradient(sys, x).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
    const Eigen::VectorXd tangent = svd.matrixV().col(2);  // null direction of T
    int best = 0;
    for (int i = 1; i < sys.dim; ++i)
        if (std::abs(tangent[i]) > std::abs(tangent[best])) best = i;
    return best;
}

}  // namespace

TangencyChart chart_tangency(const PiecewiseSystem& sys, const Vec& seed, double lo,
                             double hi, int chart_coord, int grid) {
    if (sys.dim < 3)
        throw PreconditionError(
            "chart_tangency: the tangency set of a planar system is zero-dimensional");
    if (!(lo < hi)) throw PreconditionError("chart_tangency: empty interval");
    if (grid < 8) throw PreconditionError("chart_tangency: grid too coarse");

    TangencyChart chart;
    const Vec x0 = project_to_tangency(sys, seed);
    chart.chart_coord = chart_coord >= 0 ? chart_coord : pick_chart_coordinate(sys, x0);
    if (chart.chart_coord >= sys.dim)
        throw PreconditionError("chart_tangency: chart coordinate out of range");
    chart.lo = lo;
    chart.hi = hi;
    const int c = chart.chart_coord;

    chart.params.resize(grid + 1);
    chart.points.resize(grid + 1);
    for (int i = 0; i <= grid; ++i)
        chart.params[i] = lo + (hi - lo) * (static_cast<double>(i) / grid);

    // March outward from the grid point nearest the seed so every Newton solve
    // starts from the neighbouring slice (continuation).
    int start = 0;
    for (int i = 1; i <= grid; ++i)
        if (std::abs(chart.params[i] - x0[c]) < std::abs(chart.params[start] - x0[c]))
            start = i;
    chart.points[start] = solve_tangency_slice(sys, x0, c, chart.params[start]);
    for (int i = start - 1; i >= 0; --i)
        chart.points[i] = solve_tangency_slice(sys, chart.points[i + 1], c, chart.params[i]);
    for (int i = start + 1; i <= grid; ++i)
        chart.points[i] = solve_tangency_slice(sys, chart.points[i - 1], c, chart.params[i]);

    chart.min_rank_sigma = std::numeric_limits<double>::infinity();
    std::vector<double> l2L(grid + 1), l2R(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        const Vec& x = chart.points[i];
        chart.min_rank_sigma = std::min(chart.min_rank_sigma, tangency_rank_sigma(sys, x));
        l2L[i] = lie_derivatives(sys, Side::Left, x, 2)[2];
        l2R[i] = lie_derivatives(sys, Side::Right, x, 2)[2];
    }
    if (chart.min_rank_sigma < 1e-8)
        throw DegeneracyError("chart_tangency: tangency set fails the rank condition");

    // Zeros of one side's second Lie derivative along the chart. A grid point
    // may be an exact root; otherwise bracket sign changes and refine.
    auto locate = [&](const std::vector<double>& values, Side side, BoundaryKind kind) {
        for (int i = 0; i <= grid; ++i)
            if (values[i] == 0.0)
                chart.boundaries.push_back({chart.points[i], kind, chart.params[i]});
        for (int i = 0; i < grid; ++i) {
            if (values[i] == 0.0 || values[i + 1] == 0.0) continue;
            if ((values[i] < 0.0) == (values[i + 1] < 0.0)) continue;
            const Vec base = chart.points[i];
            auto g = [&](double s) {
                const Vec x = solve_tangency_slice(sys, base, c, s);
                return lie_derivatives(sys, side, x, 2)[2];
            };
            const double s = brent_root(g, chart.params[i], chart.params[i + 1],
                                        values[i], values[i + 1],
                                        1e-13 * std::max(1.0, std::abs(chart.params[i])));
            chart.boundaries.push_back(
                {solve_tangency_slice(sys, base, c, s), kind, s});
        }
    };
    locate(l2L, Side::Left, BoundaryKind::CubicTangencyL);
    locate(l2R, Side::Right, BoundaryKind::CubicTangencyR);

    // Sign changes of Lambda strictly inside invisible-invisible segments.
    const double guard = 1e-9;
    std::vector<double> lambda(grid + 1, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i <= grid; ++i) {
        const double scale = 1.0 + chart.points[i].norm();
        if (l2L[i] > guard * scale && l2R[i] < -guard * scale)
            lambda[i] = attraction_coefficient(sys, chart.points[i]);
    }
    for (int i = 0; i <= grid; ++i)
        if (lambda[i] == 0.0)
            chart.boundaries.push_back(
                {chart.points[i], BoundaryKind::AttractionChange, chart.params[i]});
    for (int i = 0; i < grid; ++i) {
        if (!std::isfinite(lambda[i]) || !std::isfinite(lambda[i + 1])) continue;
        if (lambda[i] == 0.0 || lambda[i + 1] == 0.0) continue;
        if ((lambda[i] < 0.0) == (lambda[i + 1] < 0.0)) continue;
        const Vec base = chart.points[i];
        auto g = [&](double s) {
            return attraction_coefficient(sys, solve_tangency_slice(sys, base, c, s));
        };
        const double s = brent_root(g, chart.params[i], chart.params[i + 1], lambda[i],
                                    lambda[i + 1],
                                    1e-13 * std::max(1.0, std::abs(chart.params[i])));
        chart.boundaries.push_back(
            {solve_tangency_slice(sys, base, c, s), BoundaryKind::AttractionChange, s});
    }

    std::sort(chart.boundaries.begin(), chart.boundaries.end(),
              [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.param < b.param; });
    return chart;
}

std::vector<BoundaryPoint> find_region_boundaries(const PiecewiseSystem& sys,
                                                  const Vec& seed, double lo, double hi,
                                                  int chart_coord, int grid) {
    return chart_tangency(sys, seed, lo, hi, chart_coord, grid).boundaries;
}

}  // namespace filsim
