#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

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

/// Tangency-line point of the default colony model at a given x3.
Vec colony_tangency_point(double x3) {
    const double x2 = (7.0 - 1.75 * x3) / 1.202;
    return vec3(30.0 - x2 - x3, x2, x3);
}

PiecewiseSystem swap_sides(const PiecewiseSystem& sys) {
    PiecewiseSystem swapped = sys;
    std::swap(swapped.left, swapped.right);
    return swapped;
}

}  // namespace

TEST_CASE("classification of surface points by first-derivative signs") {
    const PiecewiseSystem sys = build_model("example-b");

    const SurfaceClassification fold = classify_point(sys, vec2(0.0, 0.0));
    CHECK(fold.kind == SurfaceKind::Tangency);
    CHECK(fold.fold_left == Fold::Invisible);
    CHECK(fold.fold_right == Fold::NotApplicable);
    CHECK(fold.region == RegionKind::NotApplicable);  // not a second-order system
    CHECK(std::isnan(fold.lambda));

    // The right field is tangent at (0,1) with L2_R = 2; the right-side
    // visibility convention has the opposite sign, so the fold is visible.
    const SurfaceClassification foldR = classify_point(sys, vec2(0.0, 1.0));
    CHECK(foldR.kind == SurfaceKind::Tangency);
    CHECK(foldR.fold_left == Fold::NotApplicable);
    CHECK(foldR.fold_right == Fold::Visible);

    CHECK(classify_point(sys, vec2(0.0, -1.0)).kind == SurfaceKind::AttractingSliding);
    CHECK(classify_point(sys, vec2(0.0, 2.0)).kind == SurfaceKind::RepellingSliding);
    CHECK(classify_point(sys, vec2(0.0, 0.5)).kind == SurfaceKind::Crossing);

    CHECK_THROWS_AS((void)classify_point(sys, vec2(0.5, 0.0)), PreconditionError);
}

TEST_CASE("region kinds and the attraction coefficient on the cubic model") {
    const PiecewiseSystem sys = build_model("cubic-3d");

    const SurfaceClassification inv = classify_point(sys, vec3(0.0, 0.0, -1.0));
    CHECK(inv.kind == SurfaceKind::Tangency);
    CHECK(inv.region == RegionKind::InvInv);
    CHECK(inv.lambda == doctest::Approx(-0.325).epsilon(1e-12));
    CHECK(inv.lambda_sign == LambdaSign::Attracting);

    const SurfaceClassification vis = classify_point(sys, vec3(0.0, 0.0, 2.0));
    CHECK(vis.region == RegionKind::VisVis);
    CHECK(std::isnan(vis.lambda));
    CHECK(vis.lambda_sign == LambdaSign::NotApplicable);

    CHECK(classify_point(sys, vec3(0.0, 0.0, 0.25)).region == RegionKind::VisInv);
    CHECK(classify_point(sys, vec3(0.0, 0.0, 0.0)).region == RegionKind::Boundary);
    CHECK(classify_point(sys, vec3(0.0, 0.0, 1.0)).region == RegionKind::Boundary);

    // The attraction coefficient matches its closed form
    // -1/(2 (1 - x3)^2) - 1/(5 x3^2) wherever both accelerations are nonzero.
    std::mt19937_64 rng(17u);
    std::uniform_real_distribution<double> unif(-2.0, -0.05);
    for (int rep = 0; rep < 50; ++rep) {
        const double x3 = unif(rng);
        const double expected = -0.5 / ((1.0 - x3) * (1.0 - x3)) - 0.2 / (x3 * x3);
        CHECK(attraction_coefficient(sys, vec3(0.0, 0.0, x3)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("invisible-invisible band of the impact oscillator") {
    const PiecewiseSystem sys = build_model("impact-osc");
    for (double x3 : {0.5, 0.7, 0.9}) {
        // cos(x3) between 5/9 and 8/9 here
        const SurfaceClassification c = classify_point(sys, vec3(0.0, 0.0, x3));
        CHECK(c.kind == SurfaceKind::Tangency);
        CHECK(c.region == RegionKind::InvInv);
    }
    CHECK(classify_point(sys, vec3(0.0, 0.0, 0.3)).region == RegionKind::VisInv);
    CHECK(classify_point(sys, vec3(0.0, 0.0, 1.2)).region == RegionKind::VisInv);

    // With the damping contribution to the third Lie derivatives, the
    // attraction coefficient at cos(x3) = 13/18 is -2/3, not zero: there the
    // two accelerations are +-3/2, the third derivatives each carry -b * L2,
    // and the forcing terms cancel between the sides.
    const double x3 = std::acos(13.0 / 18.0);
    const SurfaceClassification c = classify_point(sys, vec3(0.0, 0.0, x3));
    CHECK(c.region == RegionKind::InvInv);
    CHECK(c.lambda == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(c.lambda_sign == LambdaSign::Attracting);
}

TEST_CASE("attraction coefficient is antisymmetric under swapping the sides") {
    std::mt19937_64 rng(23u);
    std::uniform_real_distribution<double> cubic_range(-2.0, -0.1);
    std::uniform_real_distribution<double> impact_range(0.48, 0.98);

    const PiecewiseSystem cubic = build_model("cubic-3d");
    const PiecewiseSystem cubic_swapped = swap_sides(cubic);
    const PiecewiseSystem impact = build_model("impact-osc");
    const PiecewiseSystem impact_swapped = swap_sides(impact);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec a = vec3(0.0, 0.0, cubic_range(rng));
        CHECK(attraction_coefficient(cubic_swapped, a) ==
              doctest::Approx(-attraction_coefficient(cubic, a)).epsilon(1e-12));
        const Vec b = vec3(0.0, 0.0, impact_range(rng));
        CHECK(attraction_coefficient(impact_swapped, b) ==
              doctest::Approx(-attraction_coefficient(impact, b)).epsilon(1e-12));
    }
}

TEST_CASE("planar quadratic normal form: attraction coefficient at the origin") {
    std::mt19937_64 rng(31u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::map<std::string, double> overrides;
        for (const char* name : {"a1", "a3", "a4", "b1", "b2", "b3", "b4", "b5"}) {
            overrides[std::string(name) + "L"] = unif(rng);
            overrides[std::string(name) + "R"] = unif(rng);
        }
        const double a2 = 0.5 + std::abs(unif(rng));
        const double a5 = unif(rng);
        const double b0L = 0.5 + std::abs(unif(rng));
        const double b0R = -0.5 - std::abs(unif(rng));
        overrides["a2"] = a2;
        overrides["a5"] = a5;
        overrides["b0L"] = b0L;
        overrides["b0R"] = b0R;
        const PiecewiseSystem sys = build_model("planar-quadratic", overrides);

        const SurfaceClassification c = classify_point(sys, Vec::Zero(2));
        CHECK(c.region == RegionKind::InvInv);

        const double sigmaL = overrides["a1L"] / b0L + overrides["b2L"] / b0L - a5 / a2;
        const double sigmaR = overrides["a1R"] / b0R + overrides["b2R"] / b0R - a5 / a2;
        const double expected = (sigmaL - sigmaR) / a2;
        CHECK(std::abs(c.lambda - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("projections onto the surface and the tangency set") {
    const PiecewiseSystem sys = build_model("ant-colony");
    std::mt19937_64 rng(3u);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec x0 = vec3(20.0 + unif(rng), 5.0 + unif(rng), 5.0 + unif(rng));
        const Vec on_sigma = project_to_surface(sys, x0);
        CHECK(std::abs(sys.surface.real(on_sigma)) <= 1e-13 * (1.0 + on_sigma.norm()));

        const Vec on_t = project_to_tangency(sys, x0);
        CHECK(std::abs(sys.surface.real(on_t)) <= 1e-11 * (1.0 + on_t.norm()));
        CHECK(std::abs(transversal_velocity(sys, on_t)) <= 1e-11 * (1.0 + on_t.norm()));
    }

    const PiecewiseSystem cubic = build_model("cubic-3d");
    const Vec projected = project_to_tangency(cubic, vec3(0.3, -0.2, -0.8));
    CHECK(std::abs(projected[0]) < 1e-11);
    CHECK(std::abs(projected[1]) < 1e-11);
    CHECK(projected[2] == doctest::Approx(-0.8).epsilon(1e-6));

    CHECK_THROWS_AS((void)project_to_tangency(build_model("example-b"), Vec::Zero(2)),
                    PreconditionError);
    CHECK_THROWS_AS((void)project_to_tangency(build_model("fuller"), Vec::Zero(2)),
                    PreconditionError);
}

TEST_CASE("rank condition along the tangency sets of the built-in models") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    CHECK(tangency_rank_sigma(cubic, vec3(0.0, 0.0, -1.0)) == doctest::Approx(1.0).epsilon(1e-7));

    const TangencyChart cubic_chart =
        chart_tangency(cubic, vec3(0.0, 0.0, -1.0), -2.0, 2.0);
    CHECK(cubic_chart.min_rank_sigma >= 1e-8);

    const PiecewiseSystem impact = build_model("impact-osc");
    const TangencyChart impact_chart =
        chart_tangency(impact, vec3(0.0, 0.0, 0.7), 0.01, 1.5);
    CHECK(impact_chart.min_rank_sigma >= 1e-8);

    const PiecewiseSystem colony = build_model("ant-colony");
    const TangencyChart colony_chart =
        chart_tangency(colony, colony_tangency_point(1.6), 1.0, 6.0, /*chart_coord=*/1);
    CHECK(colony_chart.min_rank_sigma >= 1e-8);
    for (const Vec& x : colony_chart.points) {
        CHECK(std::abs(colony.surface.real(x)) <= 1e-10 * (1.0 + x.norm()));
        CHECK(std::abs(transversal_velocity(colony, x)) <= 1e-10 * (1.0 + x.norm()));
    }
}

TEST_CASE("region boundaries of the impact oscillator tangency band") {
    const PiecewiseSystem sys = build_model("impact-osc");
    const auto boundaries =
        find_region_boundaries(sys, vec3(0.0, 0.0, 0.7), 0.01, 1.5);
    REQUIRE(boundaries.size() == 3);

    CHECK(boundaries[0].kind == BoundaryKind::CubicTangencyR);
    CHECK(boundaries[0].param == doctest::Approx(std::acos(8.0 / 9.0)).epsilon(1e-10));

    // The zero of the attraction coefficient, with the damping term included
    // in the third Lie derivatives.
    CHECK(boundaries[1].kind == BoundaryKind::AttractionChange);
    CHECK(boundaries[1].param == doctest::Approx(0.748980609533011).epsilon(1e-9));
    CHECK(std::abs(attraction_coefficient(sys, boundaries[1].point)) <= 1e-8);

    CHECK(boundaries[2].kind == BoundaryKind::CubicTangencyL);
    CHECK(boundaries[2].param == doctest::Approx(std::acos(5.0 / 9.0)).epsilon(1e-10));
    CHECK(std::abs(lie_derivatives(sys, Side::Left, boundaries[2].point, 2)[2]) <= 1e-10);
    CHECK(std::abs(lie_derivatives(sys, Side::Right, boundaries[0].point, 2)[2]) <= 1e-10);

    // The attraction coefficient is negative (attracting) above the change
    // point and positive below it.
    CHECK(attraction_coefficient(sys, vec3(0.0, 0.0, 0.8)) < 0.0);
    CHECK(attraction_coefficient(sys, vec3(0.0, 0.0, 0.7)) > 0.0);
}

TEST_CASE("region boundaries of the cubic model: two cubic tangencies, no attraction change") {
    const PiecewiseSystem sys = build_model("cubic-3d");
    const auto boundaries =
        find_region_boundaries(sys, vec3(0.0, 0.0, -1.0), -2.0, 2.0);
    REQUIRE(boundaries.size() == 2);
    CHECK(boundaries[0].kind == BoundaryKind::CubicTangencyR);
    CHECK(boundaries[0].param == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(boundaries[1].kind == BoundaryKind::CubicTangencyL);
    CHECK(boundaries[1].param == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("charting rejects unusable inputs") {
    const PiecewiseSystem planar = build_model("planar-quadratic");
    CHECK_THROWS_AS((void)chart_tangency(planar, Vec::Zero(2), -1.0, 1.0),
                    PreconditionError);
    const PiecewiseSystem cubic = build_model("cubic-3d");
    CHECK_THROWS_AS((void)chart_tangency(cubic, vec3(0.0, 0.0, -1.0), 1.0, -1.0),
                    PreconditionError);
}
