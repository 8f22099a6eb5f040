#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "filsim/errors.hpp"
#include "filsim/retmap.hpp"
#include "filsim/sliding.hpp"
#include "filsim/surface.hpp"
#include "filsim/system.hpp"

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

/// Least-squares intercept of y against t (removes the next-order bias when
/// extrapolating an asymptotic coefficient to t -> 0).
double intercept(const std::vector<double>& t, const std::vector<double>& y) {
    const double m = static_cast<double>(t.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    return (stt * sy - st * sty) / (m * stt - st * st);
}

}  // namespace

TEST_CASE("half maps around the cubic tangency") {
    const PiecewiseSystem cubic = build_model("cubic-3d");

    const HalfReturn hr = half_return(cubic, Side::Right, vec3(0.0, 1e-4, -1.0));
    CHECK(hr.time == doctest::Approx(2e-4).epsilon(1e-3));
    CHECK(std::abs(cubic.surface.real(hr.point)) <= 1e-12 * (1.0 + hr.point.norm()));
    CHECK(transversal_velocity(cubic, hr.point) < 0.0);

    // Leading coefficients of the right half-map: time 2 nu / |L2_R| and
    // velocity overshoot (V(P_R) + nu)/nu^2 -> 2 L3_R / (3 L2_R^2) = 2/15.
    std::vector<double> ns, times, overs;
    for (const double nu : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
        const HalfReturn h = half_return(cubic, Side::Right, vec3(0.0, nu, -1.0));
        ns.push_back(nu);
        times.push_back(h.time / nu);
        overs.push_back((transversal_velocity(cubic, h.point) + nu) / (nu * nu));
    }
    CHECK(intercept(ns, times) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(intercept(ns, overs) == doctest::Approx(2.0 / 15.0).epsilon(0.05));

    CHECK_THROWS_AS(half_return(cubic, Side::Right, vec3(0.0, -1e-4, -1.0)),
                    PreconditionError);
    CHECK_THROWS_AS(half_return(cubic, Side::Left, vec3(0.0, 1e-4, -1.0)),
                    PreconditionError);
    CHECK_THROWS_AS(half_return(cubic, Side::Right, vec3(0.5, 1e-4, -1.0)),
                    PreconditionError);  // off the surface
    CHECK_THROWS_AS(half_return(build_model("example-b"), Side::Right, vec2(0.0, 1.0)),
                    PreconditionError);  // not second order
}

TEST_CASE("full return composes the half maps") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    const Vec base = vec3(0.0, 0.0, -1.0);

    const ReturnMapSample s = full_return(cubic, vec3(0.0, 1e-3, -1.0));
    CHECK(s.nu == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(s.tau == s.tau_r + s.tau_l);
    CHECK(std::abs(cubic.surface.real(s.p)) <= 1e-10 * (1.0 + s.p.norm()));
    CHECK(std::abs(cubic.surface.real(s.p_r)) <= 1e-10 * (1.0 + s.p_r.norm()));
    CHECK(s.tau / s.nu == doctest::Approx(3.0).epsilon(0.01));
    CHECK((s.v_return - s.nu) / (s.nu * s.nu) ==
          doctest::Approx(-0.325 * 2.0 / 3.0).epsilon(0.05));

    // First-order displacement P(x) = x + beta nu f^T + O(nu^2): halving nu
    // shrinks the residual about fourfold.
    const double b = beta(cubic, base);
    const Vec fT = tangential_field_carvalho(cubic, base);
    auto residual = [&](double nu) {
        const ReturnMapSample t = full_return(cubic, vec3(0.0, nu, -1.0));
        return (t.p - t.x - b * nu * fT).norm();
    };
    const double r1 = residual(2e-3);
    const double r2 = residual(1e-3);
    const double r3 = residual(5e-4);
    CHECK(r1 / r2 > 2.5);
    CHECK(r1 / r2 < 6.0);
    CHECK(r2 / r3 > 2.5);
    CHECK(r2 / r3 < 6.0);

    CHECK_THROWS_AS(full_return(cubic, vec3(0.0, -1e-3, -1.0)), PreconditionError);
}

TEST_CASE("asymptotic fit recovers the predicted coefficients") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    const AsymptoticFit fit = fit_asymptotics(cubic, vec3(0.0, 0.0, -1.0));

    CHECK(fit.samples.size() == 8);
    CHECK(fit.beta_pred == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.c_pred == doctest::Approx(-0.325 * 2.0 / 3.0).epsilon(1e-9));
    CHECK(fit.beta_hat == doctest::Approx(3.0).epsilon(0.01));
    CHECK(fit.c_hat == doctest::Approx(fit.c_pred).epsilon(0.05));

    for (std::size_t i = 0; i < fit.samples.size(); ++i) {
        const ReturnMapSample& s = fit.samples[i];
        CHECK(s.tau == s.tau_r + s.tau_l);
        CHECK(std::abs(cubic.surface.real(s.p)) <= 1e-10 * (1.0 + s.p.norm()));
        if (i > 0) CHECK(s.nu < fit.samples[i - 1].nu);
    }

    // A base merely near the tangency set is projected onto it first.
    const AsymptoticFit nudged = fit_asymptotics(cubic, vec3(1e-9, -1e-9, -1.0));
    CHECK((nudged.base - vec3(0.0, 0.0, -1.0)).norm() < 1e-6);
}

TEST_CASE("fit degenerates at the critical phase of the impact oscillator") {
    const PiecewiseSystem imp = build_model("impact-osc");
    auto lam = [&](double x3) {
        return attraction_coefficient(imp, vec3(0.0, 0.0, x3));
    };
    // The attraction coefficient changes sign between phases 0.6 and 0.9;
    // bisect the critical phase.
    double lo = 0.6, hi = 0.9;
    REQUIRE(lam(lo) > 0.0);
    REQUIRE(lam(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lam(mid) > 0.0 ? lo : hi) = mid;
    }
    const double chi = 0.5 * (lo + hi);
    CHECK(chi == doctest::Approx(0.748980609533).epsilon(1e-9));

    const AsymptoticFit below = fit_asymptotics(imp, vec3(0.0, 0.0, 0.6));
    const AsymptoticFit above = fit_asymptotics(imp, vec3(0.0, 0.0, 0.9));
    const AsymptoticFit at_chi = fit_asymptotics(imp, vec3(0.0, 0.0, chi));

    CHECK(below.c_pred > 0.0);
    CHECK(above.c_pred < 0.0);
    CHECK(below.c_hat == doctest::Approx(below.c_pred).epsilon(0.1));
    CHECK(above.c_hat == doctest::Approx(above.c_pred).epsilon(0.1));
    CHECK(std::abs(at_chi.c_pred) < 1e-9);
    // The fitted coefficient sits below the scale of either neighbour.
    CHECK(std::abs(at_chi.c_hat) <
          0.05 * std::min(std::abs(below.c_pred), std::abs(above.c_pred)));
}

TEST_CASE("orbits approach the tangency set exactly when Lambda is negative") {
    const PiecewiseSystem imp = build_model("impact-osc");
    const PiecewiseSystem cubic = build_model("cubic-3d");
    std::mt19937_64 rng(20240817ull);

    const double cr = std::acos(8.0 / 9.0), cl = std::acos(5.0 / 9.0);
    std::uniform_real_distribution<double> phase(cr + 0.05, cl - 0.05);
    int kept = 0;
    while (kept < 20) {
        const double x3 = phase(rng);
        const double L = attraction_coefficient(imp, vec3(0.0, 0.0, x3));
        if (std::abs(L) < 0.05) continue;  // too close to the marginal phase
        const ReturnMapSample s = full_return(imp, vec3(0.0, 3e-4, x3));
        CHECK((s.v_return - s.nu < 0.0) == (L < 0.0));
        ++kept;
    }

    std::uniform_real_distribution<double> depth(-2.5, -0.2);
    for (int i = 0; i < 20; ++i) {
        const double x3 = depth(rng);
        REQUIRE(attraction_coefficient(cubic, vec3(0.0, 0.0, x3)) < 0.0);
        const ReturnMapSample s = full_return(cubic, vec3(0.0, 3e-4, x3));
        CHECK(s.v_return < s.nu);
    }
}

TEST_CASE("no return past the region boundary") {
    const PiecewiseSystem cubic = build_model("cubic-3d");
    // x3 = 0.1 makes the right fold visible: the right arc never comes back.
    CHECK_THROWS_AS(half_return(cubic, Side::Right, vec3(0.0, 1e-3, 0.1)),
                    NoReturnError);
    // A one-point grid cannot support the fit.
    CHECK_THROWS_AS(fit_asymptotics(cubic, vec3(0.0, 0.0, -1.0), {1e-3}),
                    InsufficientDataError);
    // Bases outside the invisible-invisible region are rejected.
    CHECK_THROWS_AS(fit_asymptotics(cubic, vec3(0.0, 0.0, 0.5)), PreconditionError);
}

TEST_CASE("planar quadratic return map matches its normal-form coefficient") {
    const PiecewiseSystem pq = build_model("planar-quadratic");
    const AsymptoticFit fit = fit_asymptotics(pq, Vec::Zero(2));
    CHECK(fit.beta_hat == doctest::Approx(fit.beta_pred).epsilon(0.01));
    CHECK(fit.c_hat == doctest::Approx(fit.c_pred).epsilon(0.05));
}
