#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "filsim/sliding.hpp"
#include "filsim/surface.hpp"

using namespace filsim;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Vec colony_tangency_point(double x3) {
    const double x2 = (7.0 - 1.75 * x3) / 1.202;
    return vec3(30.0 - x2 - x3, x2, x3);
}

}  // namespace

TEST_CASE("convex combination of the one-sided fields") {
    const PiecewiseSystem sys = build_model("example-b");
    const Vec x = vec2(0.0, 2.0);
    CHECK((convex_field(sys, x, 0.0) - sys.left.real(x)).norm() == 0.0);
    CHECK((convex_field(sys, x, 1.0) - sys.right.real(x)).norm() == 0.0);
    const Vec mid = convex_field(sys, x, 0.5);  // midpoint of (-2,-1) and (2,1)
    CHECK(mid[0] == doctest::Approx(0.0));
    CHECK(mid[1] == doctest::Approx(0.0));
}

TEST_CASE("sliding field of the planar linear model") {
    const PiecewiseSystem sys = build_model("example-b");
    for (double x2 : {-1.0, 0.0, 1.0, 2.0, 3.0}) {
        const SlidingValue sv = sliding_field(sys, vec2(0.0, x2));
        CHECK(sv.field[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sv.field[1] == doctest::Approx((x2 - 2.0) / (2.0 - 3.0 * x2)).epsilon(1e-12));
        CHECK(sv.s == doctest::Approx(-x2 / (2.0 - 3.0 * x2)).epsilon(1e-12));
    }

    const SlidingValue at_star = sliding_field(sys, vec2(0.0, 2.0));
    CHECK(at_star.field.norm() <= 1e-14);

    CHECK_THROWS_AS((void)sliding_field(sys, vec2(0.0, 2.0 / 3.0)), DegeneracyError);
}

TEST_CASE("sliding velocity is tangent to the surface") {
    const PiecewiseSystem sys = build_model("example-b");
    std::mt19937_64 rng(13u);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    int checked = 0;
    while (checked < 50) {
        const double x2 = unif(rng);
        if (std::abs(2.0 - 3.0 * x2) < 0.1) continue;
        const Vec x = vec2(0.0, x2);
        const SlidingValue sv = sliding_field(sys, x);
        // Differentiate the surface function along the frozen sliding velocity.
        const double drift =
            lie_derivatives(frozen_field(sv.field), sys.surface, x, 1)[1];
        CHECK(std::abs(drift) <= 1e-10 * (1.0 + sv.field.norm()));
        ++checked;
    }

    // On a second-order system the first derivatives agree and the convex
    // parameter is undefined.
    const PiecewiseSystem colony = build_model("ant-colony");
    CHECK_THROWS_AS((void)sliding_field(colony, vec3(20.0, 5.0, 5.0)), DegeneracyError);
}

TEST_CASE("second-order sliding field of the cubic model") {
    const PiecewiseSystem sys = build_model("cubic-3d");
    for (double x3 : {-1.5, -1.0, -0.3, 0.25, 2.0}) {
        const SlidingValue sv = second_order_sliding_field(sys, vec3(0.0, 0.0, x3));
        CHECK(sv.field[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sv.field[1] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sv.field[2] ==
              doctest::Approx((0.2 - 0.7 * x3) / (1.0 - 2.0 * x3)).epsilon(1e-12));
        CHECK(sv.s == doctest::Approx((1.0 - x3) / (1.0 - 2.0 * x3)).epsilon(1e-12));
    }

    // The convex parameter lies strictly inside (0,1) on the invisible-
    // invisible and visible-visible regions.
    CHECK(second_order_sliding_field(sys, vec3(0.0, 0.0, -1.0)).s ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(second_order_sliding_field(sys, vec3(0.0, 0.0, 2.0)).s ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)second_order_sliding_field(sys, vec3(0.0, 0.0, 0.5)),
                    DegeneracyError);
    CHECK_THROWS_AS((void)second_order_sliding_field(sys, vec3(0.0, 0.5, -1.0)),
                    PreconditionError);
    CHECK_THROWS_AS(
        (void)second_order_sliding_field(build_model("example-b"), vec2(0.0, 0.0)),
        PreconditionError);
}

TEST_CASE("second-order sliding on the impact oscillator advances the phase only") {
    const PiecewiseSystem sys = build_model("impact-osc");
    for (double x3 : {0.5, 0.7, 0.9, 1.3}) {
        const SlidingValue sv = second_order_sliding_field(sys, vec3(0.0, 0.0, x3));
        CHECK(sv.field[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sv.field[1] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sv.field[2] == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("second-order sliding velocity is tangent to the tangency set") {
    std::mt19937_64 rng(29u);
    std::uniform_real_distribution<double> cubic_range(-2.0, 2.0);
    const PiecewiseSystem cubic = build_model("cubic-3d");
    for (int rep = 0; rep < 30; ++rep) {
        const double x3 = cubic_range(rng);
        if (std::abs(1.0 - 2.0 * x3) < 0.1) continue;
        const Vec x = vec3(0.0, 0.0, x3);
        const SlidingValue sv = second_order_sliding_field(cubic, x);
        const double h_drift =
            lie_derivatives(frozen_field(sv.field), cubic.surface, x, 1)[1];
        const double v_drift = transversal_velocity_gradient(cubic, x).dot(sv.field);
        CHECK(std::abs(h_drift) <= 1e-8 * (1.0 + sv.field.norm()));
        CHECK(std::abs(v_drift) <= 1e-8 * (1.0 + sv.field.norm()));
    }

    const PiecewiseSystem colony = build_model("ant-colony");
    std::uniform_real_distribution<double> x3_range(0.5, 2.5);
    for (int rep = 0; rep < 30; ++rep) {
        const Vec x = colony_tangency_point(x3_range(rng));
        const SlidingValue sv = second_order_sliding_field(colony, x);
        const double h_drift =
            lie_derivatives(frozen_field(sv.field), colony.surface, x, 1)[1];
        const double v_drift = transversal_velocity_gradient(colony, x).dot(sv.field);
        CHECK(std::abs(h_drift) <= 1e-8 * (1.0 + sv.field.norm()));
        CHECK(std::abs(v_drift) <= 1e-8 * (1.0 + sv.field.norm()));
    }
}

TEST_CASE("norm-weighted tangential field agrees with second-order sliding on "
          "visible-visible and invisible-invisible regions") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    std::mt19937_64 rng(37u);

    // Invisible-invisible: x3 < 0; visible-visible: x3 > 1.
    std::uniform_real_distribution<double> inv_range(-2.0, -0.05);
    std::uniform_real_distribution<double> vis_range(1.05, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        for (const double x3 : {inv_range(rng), vis_range(rng)}) {
            const Vec x = vec3(0.0, 0.0, x3);
            const Vec ft = second_order_sliding_field(cubic, x).field;
            const Vec ftan = tangential_field_carvalho(cubic, x);
            CHECK((ftan - ft).norm() <= 1e-12 * (1.0 + ft.norm()));
        }
    }

    // Visible-invisible: no agreement claimed, and indeed they differ.
    const Vec x = vec3(0.0, 0.0, 0.25);
    const Vec ft = second_order_sliding_field(cubic, x).field;
    const Vec ftan = tangential_field_carvalho(cubic, x);
    CHECK(ft[2] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(ftan[2] == doctest::Approx(0.275).epsilon(1e-12));
    CHECK((ftan - ft).norm() > 0.2);

    // Colony model: sample its tangency line and verify the agreement on
    // whichever visible-visible points show up.
    const PiecewiseSystem colony = build_model("ant-colony");
    std::uniform_real_distribution<double> x3_range(0.2, 3.0);
    int vis_vis_seen = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Vec y = colony_tangency_point(x3_range(rng));
        if (classify_point(colony, y).region != RegionKind::VisVis) continue;
        ++vis_vis_seen;
        const Vec gt = second_order_sliding_field(colony, y).field;
        const Vec gtan = tangential_field_carvalho(colony, y);
        CHECK((gtan - gt).norm() <= 1e-12 * (1.0 + gt.norm()));
    }
    CHECK(vis_vis_seen > 10);
}

TEST_CASE("leading return-time coefficient on invisible-invisible points") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    CHECK(beta(cubic, vec3(0.0, 0.0, -1.0)) == doctest::Approx(3.0).epsilon(1e-12));

    const PiecewiseSystem impact = build_model("impact-osc");
    const double chi_pinned = std::acos(13.0 / 18.0);
    CHECK(beta(impact, vec3(0.0, 0.0, chi_pinned)) ==
          doctest::Approx(8.0 / 3.0).epsilon(1e-12));

    std::mt19937_64 rng(41u);
    std::uniform_real_distribution<double> cubic_range(-2.0, -0.05);
    std::uniform_real_distribution<double> impact_range(0.48, 0.98);
    for (int rep = 0; rep < 50; ++rep) {
        CHECK(beta(cubic, vec3(0.0, 0.0, cubic_range(rng))) > 0.0);
        CHECK(beta(impact, vec3(0.0, 0.0, impact_range(rng))) > 0.0);
    }

    CHECK_THROWS_AS((void)beta(cubic, vec3(0.0, 0.0, 0.25)), PreconditionError);
    CHECK_THROWS_AS((void)beta(cubic, vec3(0.0, 0.0, 2.0)), PreconditionError);
}

TEST_CASE("the return-time coefficient times the sliding field has the two-term form") {
    std::mt19937_64 rng(43u);
    std::uniform_real_distribution<double> cubic_range(-2.0, -0.05);
    std::uniform_real_distribution<double> impact_range(0.48, 0.98);
    const PiecewiseSystem cubic = build_model("cubic-3d");
    const PiecewiseSystem impact = build_model("impact-osc");
    for (int rep = 0; rep < 100; ++rep) {
        for (int which = 0; which < 2; ++which) {
            const PiecewiseSystem& sys = which == 0 ? cubic : impact;
            const Vec x =
                vec3(0.0, 0.0, which == 0 ? cubic_range(rng) : impact_range(rng));
            const double l2L = lie_derivatives(sys, Side::Left, x, 2)[2];
            const double l2R = lie_derivatives(sys, Side::Right, x, 2)[2];
            const Vec lhs = beta(sys, x) * second_order_sliding_field(sys, x).field;
            const Vec rhs =
                2.0 * (sys.left.real(x) / l2L - sys.right.real(x) / l2R);
            CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }
}
