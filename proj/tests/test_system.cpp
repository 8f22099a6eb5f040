#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "filsim/system.hpp"

using namespace filsim;

TEST_CASE("registry lists the six built-in models") {
    const auto& models = list_models();
    REQUIRE(models.size() == 6);
    std::set<std::string> ids;
    for (const auto& info : models) ids.insert(info.id);
    const std::set<std::string> expected = {"example-b",  "cubic-3d",         "impact-osc",
                                            "ant-colony", "planar-quadratic", "fuller"};
    CHECK(ids == expected);
    for (const auto& info : models) {
        const PiecewiseSystem sys = build_model(info.id);
        CHECK(sys.dim == info.dim);
        CHECK(sys.name == info.id);
        CHECK(sys.params == info.defaults);
        CHECK(sys.anchor.size() == sys.dim);
    }
}

TEST_CASE("default parameters match the published values") {
    const PiecewiseSystem impact = build_model("impact-osc");
    CHECK(impact.params.at("k") == 5.0);
    CHECK(impact.params.at("b") == 0.5);
    CHECK(impact.params.at("k_D") == 10.0);
    CHECK(impact.params.at("d") == 0.3);
    CHECK(impact.params.at("A") == 9.0);

    const PiecewiseSystem fuller = build_model("fuller");
    CHECK(fuller.params.at("C") ==
          doctest::Approx(std::sqrt((std::sqrt(33.0) - 1.0) / 24.0)).epsilon(1e-15));
    CHECK(fuller.params.at("C") == doctest::Approx(0.4446).epsilon(1e-3));
    CHECK_FALSE(fuller.smooth_surface);
    CHECK_FALSE(fuller.second_order);

    const PiecewiseSystem colony = build_model("ant-colony");
    CHECK(colony.params.size() == 11);
    CHECK(colony.params.at("N") == 200.0);
    CHECK(colony.params.at("Theta") == 30.0);
    CHECK(colony.params.at("rho") == 0.25);
    CHECK(colony.params.at("alpha_lc") == 0.15);
}

TEST_CASE("built fields evaluate to their defining expressions") {
    const PiecewiseSystem sys = build_model("example-b");
    Vec x(2);
    x << 0.3, 0.7;
    const Vec fl = sys.left.real(x);
    CHECK(fl[0] == doctest::Approx(-0.7));
    CHECK(fl[1] == doctest::Approx(-1.0));
    const Vec fr = sys.right.real(x);
    CHECK(fr[0] == doctest::Approx(-0.6));
    CHECK(fr[1] == doctest::Approx(1.0));
    CHECK(sys.surface.real(x) == doctest::Approx(0.3));

    const PiecewiseSystem colony = build_model("ant-colony");
    Vec y(3);
    y << 10.0, 5.0, 3.0;
    // Right field differs from left only by moving alpha_lc * x2 ants from
    // leading to carrying.
    const Vec gl = colony.left.real(y);
    const Vec gr = colony.right.real(y);
    CHECK(gr[0] == doctest::Approx(gl[0]));
    CHECK(gr[1] == doctest::Approx(gl[1] - 0.15 * 5.0));
    CHECK(gr[2] == doctest::Approx(gl[2] + 0.15 * 5.0));
    CHECK(colony.surface.real(y) == doctest::Approx(18.0 - 30.0));
}

TEST_CASE("parameter overrides are applied and validated") {
    const PiecewiseSystem sys = build_model("impact-osc", {{"k", 6.0}, {"A", 10.0}});
    CHECK(sys.params.at("k") == 6.0);
    CHECK(sys.params.at("A") == 10.0);
    CHECK(sys.params.at("b") == 0.5);  // untouched default
    Vec x(3);
    x << 0.0, 0.0, 0.0;
    // Acceleration at the origin on the left: A cos(0) - k = 4.
    CHECK(sys.left.real(x)[1] == doctest::Approx(4.0));

    CHECK_THROWS_AS((void)build_model("no-such-model"), PreconditionError);
    CHECK_THROWS_AS((void)build_model("impact-osc", {{"stiffness", 1.0}}), PreconditionError);
    CHECK_THROWS_AS((void)build_model("example-b", {{"k", 1.0}}), PreconditionError);
}

TEST_CASE("surface sampling is deterministic and lands on the surface") {
    const PiecewiseSystem sys = build_model("ant-colony");
    const auto pts = sample_surface_points(sys, 50, 123u);
    REQUIRE(pts.size() == 50);
    for (const Vec& x : pts)
        CHECK(std::abs(sys.surface.real(x)) <= 1e-10 * (1.0 + x.norm()));

    const auto again = sample_surface_points(sys, 50, 123u);
    for (size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - again[i]).norm() == 0.0);

    const auto other = sample_surface_points(sys, 50, 124u);
    CHECK((pts[0] - other[0]).norm() > 0.0);
}

TEST_CASE("surface sampling reports failure modes") {
    PiecewiseSystem unreachable = build_model("example-b");
    unreachable.surface = make_scalar_field([](const auto& x) {
        return x[0] * x[0] + 1.0;  // never zero
    });
    CHECK_THROWS_AS((void)sample_surface_points(unreachable, 10, 1u), SamplingError);

    PiecewiseSystem degenerate = build_model("example-b");
    degenerate.surface = make_scalar_field([](const auto& x) {
        return x[0] * x[0] * x[0];  // root with vanishing gradient
    });
    CHECK_THROWS_AS((void)sample_surface_points(degenerate, 10, 1u), DegeneracyError);
}

TEST_CASE("second-order verdicts for the built-in models") {
    struct Expectation {
        const char* id;
        bool second_order;
    };
    for (const Expectation e : {Expectation{"example-b", false},
                                Expectation{"cubic-3d", true},
                                Expectation{"impact-osc", true},
                                Expectation{"ant-colony", true},
                                Expectation{"planar-quadratic", true},
                                Expectation{"fuller", false}}) {
        const PiecewiseSystem sys = build_model(e.id);
        const SecondOrderReport report = check_second_order(sys, 1000, 2026u);
        INFO("model ", e.id, " max gap ", report.max_velocity_gap);
        CHECK(report.second_order == e.second_order);
        CHECK(report.samples == 1000);
        CHECK(report.second_order == sys.second_order);
        if (!e.second_order) CHECK(report.max_velocity_gap > 0.1);
    }
}

TEST_CASE("random quadratic coefficients stay second-order under the shared-coefficient constraint") {
    std::mt19937_64 rng(99u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::map<std::string, double> overrides;
        for (const char* name : {"a1", "a3", "a4", "b1", "b2", "b3", "b4", "b5"}) {
            overrides[std::string(name) + "L"] = unif(rng);
            overrides[std::string(name) + "R"] = unif(rng);
        }
        overrides["a2"] = 0.5 + std::abs(unif(rng));
        overrides["a5"] = unif(rng);
        overrides["b0L"] = 0.5 + std::abs(unif(rng));
        overrides["b0R"] = -0.5 - std::abs(unif(rng));
        const PiecewiseSystem sys = build_model("planar-quadratic", overrides);
        const SecondOrderReport report = check_second_order(sys, 200, 3u + rep);
        INFO("rep ", rep, " max gap ", report.max_velocity_gap);
        CHECK(report.second_order);
    }
}

TEST_CASE("transversal velocity equals the first Lie derivative") {
    const PiecewiseSystem sys = build_model("cubic-3d");
    std::mt19937_64 rng(1u);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x(3);
        x << unif(rng), unif(rng), unif(rng);
        CHECK(transversal_velocity(sys, x) == doctest::Approx(x[1]).epsilon(1e-14));
    }
    // Its finite-difference gradient points along x2 for this model.
    Vec x(3);
    x << 0.0, 0.0, -1.0;
    const Vec grad = transversal_velocity_gradient(sys, x);
    CHECK(grad[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(grad[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(grad[2] == doctest::Approx(0.0).epsilon(1e-9));
}
