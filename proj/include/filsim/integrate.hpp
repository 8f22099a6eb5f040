#pragma once

#include <limits>
#include <string>
#include <vector>

#include "filsim/system.hpp"

namespace filsim {

/// Which vector field currently governs the motion.
enum class Mode {
    FlowL,       ///< smooth flow of the left field in {H <= 0}
    FlowR,       ///< smooth flow of the right field in {H >= 0}
    SlideSigma,  ///< first-order sliding on the switching surface
    SlideT,      ///< second-order sliding on the tangency set T
};

const char* to_string(Mode m);

enum class EventKind {
    HitSigmaCross,      ///< transversal crossing of the switching surface
    HitSigmaSlideStart, ///< arrival on a sliding region (attracting or repelling)
    SlideExit,          ///< sliding parameter left [0,1]; flow resumes on one side
    TConvergence,       ///< spiralling orbit captured by the tangency set
    TExitCubicTangency, ///< second-order sliding reached a cubic tangency boundary
    Ejection,           ///< spiralling stopped returning to the surface
    HorizonEnd,         ///< reached the time horizon
    StepFailure,        ///< integration could not continue; see Event::detail
};

/// Stable identifier used in logs and serialized output.
const char* to_string(EventKind k);

/// What to do when the orbit starts on (or reaches) a repelling sliding
/// region, where forward evolution is not unique.
enum class RepellingChoice { Stop, Left, Right };

struct Event {
    double t = 0.0;
    Vec point;
    EventKind kind = EventKind::HorizonEnd;
    /// Transversal velocity V at the event point (second-order systems;
    /// NaN where not meaningful).
    double nu = std::numeric_limits<double>::quiet_NaN();
    /// Convex combination parameter of the active sliding field at the
    /// event (s on the switching surface, s2 on T; NaN where not defined).
    double s = std::numeric_limits<double>::quiet_NaN();
    /// Free-form context, e.g. which side's tangency ended a sliding arc
    /// or why a step failed.
    std::string detail;
};

struct Sample {
    double t = 0.0;
    Vec x;
};

/// Maximal time interval during which a single mode governs the motion.
/// Samples hold every accepted integrator step (plus any requested
/// sample_times falling inside the segment), in increasing time order.
struct Segment {
    Mode mode = Mode::FlowL;
    std::vector<Sample> samples;
};

/// Hybrid orbit: contiguous segments plus the events separating/ending them.
/// Consecutive segments share their junction point except across
/// TConvergence events, where the recorded jump is the projection of a
/// converged spiral onto the tangency set (size bounded by v_converge).
struct Trajectory {
    std::vector<Segment> segments;
    std::vector<Event> events;

    double final_time() const;
    Vec final_point() const;
    bool has_event(EventKind k) const;
    const Event* first_event(EventKind k) const;
};

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    /// Spiral capture threshold: once |V| at successive crossings decreases
    /// below this value the orbit is projected onto T (TConvergence).
    double v_converge = 1e-6;
    /// Transversality guard: a surface hit with |L1| below this (relative)
    /// tolerance is treated as a tangency interaction, not a crossing.
    double guard_tol = 1e-8;
    RepellingChoice repelling_choice = RepellingChoice::Stop;
    /// A flow segment lasting more than eject_factor times the previous
    /// inter-crossing time ends the spiral bookkeeping with an Ejection event.
    double eject_factor = 10.0;
    /// If > 0, stop as soon as a surface event lands within this distance of
    /// stop_center (defaults to the origin); that event gains the detail
    /// "stop radius reached" and terminates the trajectory.
    double stop_radius = 0.0;
    Vec stop_center;
    /// Extra times at which dense-output samples are recorded.
    std::vector<double> sample_times;
    long max_steps = 50'000'000;
};

/// Integrate the discontinuous system from x0 over [0, t_end] under the
/// sliding-mode conventions (crossing / sliding / second-order sliding),
/// switching modes at detected events. Always terminates the event list
/// with exactly one of HorizonEnd / StepFailure / a stopping event.
Trajectory integrate(const PiecewiseSystem& sys, const Vec& x0, double t_end,
                     const IntegrateOptions& opts = {});

/// Integrate the second-order sliding field on the tangency set T from a
/// point y0 (projected onto T first). Produces a single SlideT segment,
/// ending at a cubic tangency boundary (TExit-CubicTangency), the horizon,
/// or a StepFailure. Requires a second-order system with a smooth surface
/// and y0 in a two-fold region admitting the sliding field.
Trajectory integrate_slideT(const PiecewiseSystem& sys, const Vec& y0, double t_end,
                            const IntegrateOptions& opts = {});

/// Low-level primitive: flow x0 with the given side's field until the first
/// sign change of H occurring after t_min (relative to the start), within a
/// time budget. Returns the localized hit time and point (polished onto the
/// surface). Throws NoReturnError if the orbit does not come back within
/// t_budget. No mode logic, no events; used by return-map construction.
struct SurfaceHit {
    double t = 0.0;
    Vec point;
};
SurfaceHit flow_to_surface(const PiecewiseSystem& sys, Side side, const Vec& x0,
                           double t_min, double t_budget,
                           double rtol = 1e-12, double atol = 1e-14);

}  // namespace filsim
