#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "filsim/field.hpp"
#include "filsim/lie.hpp"

namespace filsim {

enum class Side { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
inline const char* to_string(Side s) { return s == Side::Left ? "L" : "R"; }

/// A discontinuous ODE with two smooth pieces separated by the zero set of a
/// scalar surface function: the left field governs surface < 0, the right
/// field surface > 0, and motion on the surface follows Filippov's convention.
struct PiecewiseSystem {
    std::string name;
    int dim = 0;
    VectorField left;
    VectorField right;
    ScalarField surface;
    /// Parameter values the system was built with (registry models only).
    std::map<std::string, double> params;
    /// Claimed property: the transversal velocity is continuous across the
    /// surface, so tangency happens on a codimension-2 set. Verified by
    /// check_second_order; the integrator only arms tangency handling when set.
    bool second_order = false;
    /// False when the surface function is not C^1 (relay-with-kink models):
    /// all tangency machinery is bypassed for such systems.
    bool smooth_surface = true;
    /// A point near the interesting dynamics; surface sampling boxes are
    /// centred here (the surface need not pass near the origin).
    Vec anchor;

    const VectorField& field(Side s) const { return s == Side::Left ? left : right; }
};

/// Lie derivatives of the surface function along one side's field,
/// [h(x), L^1, ..., L^max_m].
inline std::vector<double> lie_derivatives(const PiecewiseSystem& sys, Side side,
                                           const Vec& x, int max_m) {
    return lie_derivatives(sys.field(side), sys.surface, x, max_m);
}

/// Transversal velocity V(x) = L^1 of the surface along the left field,
/// extended off the surface; on a second-order system it is side-independent
/// on the surface, and {surface = 0, V = 0} is the tangency set.
inline double transversal_velocity(const PiecewiseSystem& sys, const Vec& x) {
    return lie_derivatives(sys, Side::Left, x, 1)[1];
}

Vec surface_gradient(const PiecewiseSystem& sys, const Vec& x);
Vec transversal_velocity_gradient(const PiecewiseSystem& sys, const Vec& x);

/// Draw points on the surface by bracketing sign changes of the surface
/// function along random chords of a box centred on the system's anchor
/// (budget of 100*n_samples surface evaluations; throws SamplingError when
/// exhausted). Every returned point has a nonvanishing surface gradient.
std::vector<Vec> sample_surface_points(const PiecewiseSystem& sys, int n_samples,
                                       std::uint64_t seed, double box_halfwidth = 10.0);

struct SecondOrderReport {
    bool second_order = false;
    double max_velocity_gap = 0.0;  // max |L1_left - L1_right| over samples
    int samples = 0;
};

/// Sample the surface and test whether the transversal velocity matches
/// across it to 1e-10 * (1 + |x|) at every sample.
SecondOrderReport check_second_order(const PiecewiseSystem& sys, int n_samples,
                                     std::uint64_t seed, double box_halfwidth = 10.0);

// ---------------------------------------------------------------------------
// Model registry

struct ModelInfo {
    std::string id;
    std::string summary;
    int dim;
    std::map<std::string, double> defaults;
};

const std::vector<ModelInfo>& list_models();

/// Build a registry model by id ("example-b", "cubic-3d", "impact-osc",
/// "ant-colony", "planar-quadratic", "fuller"), optionally overriding named
/// parameters. Unknown ids or parameter names throw PreconditionError.
PiecewiseSystem build_model(const std::string& id,
                            const std::map<std::string, double>& overrides = {});

}  // namespace filsim
