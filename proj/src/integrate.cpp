#include "filsim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "filsim/errors.hpp"
#include "filsim/ode.hpp"
#include "filsim/rootfind.hpp"
#include "filsim/sliding.hpp"
#include "filsim/surface.hpp"

namespace filsim {

const char* to_string(Mode m) {
    switch (m) {
        case Mode::FlowL: return "FlowL";
        case Mode::FlowR: return "FlowR";
        case Mode::SlideSigma: return "SlideSigma";
        case Mode::SlideT: return "SlideT";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::HitSigmaCross: return "HitSigma-Cross";
        case EventKind::HitSigmaSlideStart: return "HitSigma-SlideStart";
        case EventKind::SlideExit: return "SlideExit";
        case EventKind::TConvergence: return "TConvergence";
        case EventKind::TExitCubicTangency: return "TExit-CubicTangency";
        case EventKind::Ejection: return "Ejection";
        case EventKind::HorizonEnd: return "HorizonEnd";
        case EventKind::StepFailure: return "StepFailure";
    }
    return "?";
}

double Trajectory::final_time() const {
    if (!segments.empty() && !segments.back().samples.empty()) {
        return segments.back().samples.back().t;
    }
    if (!events.empty()) return events.back().t;
    return 0.0;
}

Vec Trajectory::final_point() const {
    if (!segments.empty() && !segments.back().samples.empty()) {
        return segments.back().samples.back().x;
    }
    if (!events.empty()) return events.back().point;
    return Vec();
}

bool Trajectory::has_event(EventKind k) const { return first_event(k) != nullptr; }

const Event* Trajectory::first_event(EventKind k) const {
    for (const auto& e : events) {
        if (e.kind == k) return &e;
    }
    return nullptr;
}

namespace {

/// Newton-polish a point onto the surface; the extra step after the
/// projection's stopping tolerance matters for orbits whose whole excursion
/// in H is below an absolute tolerance (shrinking relay oscillations).
Vec polish_surface(const PiecewiseSystem& sys, Vec y) {
    y = project_to_surface(sys, y);
    const Vec g = surface_gradient(sys, y);
    const double n2 = g.squaredNorm();
    if (n2 > 0.0) y -= (sys.surface.real(y) / n2) * g;
    return y;
}

/// Sign-change monitor with an arming band around its starting residual, so
/// that a segment beginning exactly on the monitored zero set does not
/// retrigger on roundoff noise.
struct Monitor {
    std::function<double(const Vec&)> g;
    double armed = 0.0;  // last significant value (its sign is the armed sign)
    double floor = 0.0;  // |values| below this neither trigger nor re-arm

    void seed(double v0, double interior_sign) {
        floor = (std::abs(v0) < 1e-6) ? 16.0 * std::abs(v0) + 1e-300 : 0.0;
        armed = (std::abs(v0) <= floor) ? std::copysign(std::max(std::abs(v0), 1e-300),
                                                        interior_sign)
                                        : v0;
    }
};

struct EventHit {
    double t = 0.0;
    int which = -1;
};

/// Scan the last accepted step for the earliest sign change of any monitor,
/// subsampling the dense output so that a large step spanning several
/// oscillations cannot skip past the first hit.
std::optional<EventHit> scan_step(const Dopri5& ode, std::vector<Monitor>& ms,
                                  double t_hi) {
    constexpr int kSub = 8;
    const double t0 = ode.t_prev();
    if (!(t_hi > t0)) return std::nullopt;
    // A few ulps of the current time: Brent is superlinear, and cascades of
    // shrinking arcs need event times resolved to the representable limit or
    // the per-arc amplitudes inherit O(xtol) absolute errors.
    const double xtol =
        8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_hi));

    std::vector<double> last_t(ms.size(), t0);
    std::optional<EventHit> best;
    for (int k = 1; k <= kSub && !best; ++k) {
        const double s = (k == kSub) ? t_hi : t0 + (t_hi - t0) * k / kSub;
        const Vec xs = ode.dense(s);
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const double v = ms[i].g(xs);
            if (v == 0.0) {
                if (!best || s < best->t) best = EventHit{s, static_cast<int>(i)};
                continue;
            }
            if (std::abs(v) <= ms[i].floor) continue;
            if (std::signbit(v) == std::signbit(ms[i].armed)) {
                ms[i].armed = v;
                last_t[i] = s;
                continue;
            }
            const double a = std::max(last_t[i], t0);
            const double fa = std::copysign(std::max(std::abs(ms[i].armed), 1e-300),
                                            ms[i].armed);
            auto f = [&](double tt) { return ms[i].g(ode.dense(tt)); };
            const double t_star = brent_root(f, a, s, fa, v, xtol);
            if (!best || t_star < best->t) best = EventHit{t_star, static_cast<int>(i)};
        }
    }
    return best;
}

class Runner {
public:
    Runner(const PiecewiseSystem& sys, IntegrateOptions opts, double t_end)
        : sys_(sys), opts_(std::move(opts)), t_end_(t_end) {
        times_ = opts_.sample_times;
        std::sort(times_.begin(), times_.end());
        steps_left_ = opts_.max_steps;
    }

    Trajectory traj;
    double t = 0.0;
    Vec x;
    Mode mode = Mode::FlowL;
    bool done = false;
    bool standalone_slide_t = false;
    bool skip_start = false;

    void run() {
        if (!skip_start) start();
        const double teps = 1e-14 * std::max(1.0, std::abs(t_end_));
        while (!done) {
            if (t >= t_end_ - teps) {
                horizon();
                break;
            }
            try {
                switch (mode) {
                    case Mode::FlowL: run_flow(Side::Left); break;
                    case Mode::FlowR: run_flow(Side::Right); break;
                    case Mode::SlideSigma: run_slide_sigma(); break;
                    case Mode::SlideT: run_slide_t(); break;
                }
            } catch (const Error& e) {
                step_failure(e.what());
            }
        }
    }

private:
    // --- bookkeeping -------------------------------------------------------

    Segment& begin_segment(Mode m) {
        traj.segments.push_back(Segment{m, {}});
        traj.segments.back().samples.push_back({t, x});
        return traj.segments.back();
    }

    void capture_samples(Segment& seg, const Dopri5& ode, double t_hi) {
        while (cursor_ < times_.size() && times_[cursor_] <= t_hi) {
            const double ts = times_[cursor_];
            if (ts > ode.t_prev()) seg.samples.push_back({ts, ode.dense(ts)});
            ++cursor_;
        }
    }

    void horizon() {
        traj.events.push_back({t, x, EventKind::HorizonEnd, nan_, nan_, {}});
        done = true;
    }

    void step_failure(std::string why) {
        Event ev{t, x, EventKind::StepFailure, nan_, nan_, std::move(why)};
        traj.events.push_back(std::move(ev));
        done = true;
    }

    bool budget_ok() {
        if (--steps_left_ < 0) {
            step_failure("step budget exhausted");
            return false;
        }
        return true;
    }

    bool stop_ball_hit() {
        if (!(opts_.stop_radius > 0.0)) return false;
        Vec c = opts_.stop_center;
        if (c.size() != sys_.dim) c = Vec::Zero(sys_.dim);
        if ((x - c).norm() > opts_.stop_radius) return false;
        // Annotate the surface event that landed inside the ball rather than
        // emitting a second event at the same time: events stay strictly
        // time-ordered and the final event is the stopping one.
        Event& last = traj.events.back();
        last.detail = last.detail.empty() ? "stop radius reached"
                                          : last.detail + "; stop radius reached";
        done = true;
        return true;
    }

    void reset_spiral() {
        cross_streak_ = 0;
        nu_hist_.clear();
        have_last_cross_ = false;
        prev_cross_dt_ = 0.0;
    }

    // --- initial classification -------------------------------------------

    void start() {
        const double h0 = sys_.surface.real(x);
        if (std::abs(h0) > 1e-9 * (1.0 + x.norm())) {
            mode = (h0 < 0.0) ? Mode::FlowL : Mode::FlowR;
            return;
        }
        x = polish_surface(sys_, x);
        const SurfaceClassification cls = classify_point(sys_, x, opts_.guard_tol);
        switch (cls.kind) {
            case SurfaceKind::Crossing:
                mode = (cls.lie_left[1] > 0.0) ? Mode::FlowR : Mode::FlowL;
                return;
            case SurfaceKind::AttractingSliding:
                mode = Mode::SlideSigma;
                return;
            case SurfaceKind::RepellingSliding: {
                if (opts_.repelling_choice == RepellingChoice::Stop) {
                    Event ev{t, x, EventKind::HitSigmaSlideStart, nan_, nan_,
                             "start on a repelling sliding region; forward "
                             "evolution is not unique"};
                    try {
                        ev.s = sliding_field(sys_, x).s;
                    } catch (const Error&) {
                    }
                    traj.events.push_back(std::move(ev));
                    done = true;
                    return;
                }
                mode = (opts_.repelling_choice == RepellingChoice::Left) ? Mode::FlowL
                                                                         : Mode::FlowR;
                return;
            }
            case SurfaceKind::Tangency:
                resolve_tangency(cls, /*initial=*/true);
                return;
        }
    }

    // --- surface arrival logic --------------------------------------------

    void resolve_surface_arrival(Side from) {
        SurfaceClassification cls;
        try {
            cls = classify_point(sys_, x, opts_.guard_tol);
        } catch (const Error& e) {
            step_failure(e.what());
            return;
        }

        switch (cls.kind) {
            case SurfaceKind::Crossing: {
                Event ev{t, x, EventKind::HitSigmaCross, nan_, nan_, {}};
                if (sys_.second_order) ev.nu = cls.lie_left[1];
                traj.events.push_back(std::move(ev));
                if (stop_ball_hit()) return;
                if (sys_.second_order && try_capture_on_t(cls.lie_left[1])) return;
                mode = (from == Side::Left) ? Mode::FlowR : Mode::FlowL;
                return;
            }
            case SurfaceKind::AttractingSliding: {
                Event ev{t, x, EventKind::HitSigmaSlideStart, nan_, nan_, {}};
                try {
                    ev.s = sliding_field(sys_, x).s;
                } catch (const Error&) {
                }
                traj.events.push_back(std::move(ev));
                reset_spiral();
                if (stop_ball_hit()) return;
                mode = Mode::SlideSigma;
                return;
            }
            case SurfaceKind::RepellingSliding: {
                Event ev{t, x, EventKind::HitSigmaSlideStart, nan_, nan_,
                         "repelling sliding region"};
                try {
                    ev.s = sliding_field(sys_, x).s;
                } catch (const Error&) {
                }
                traj.events.push_back(std::move(ev));
                reset_spiral();
                if (stop_ball_hit()) return;
                if (opts_.repelling_choice == RepellingChoice::Stop) {
                    done = true;
                    return;
                }
                mode = (opts_.repelling_choice == RepellingChoice::Left) ? Mode::FlowL
                                                                         : Mode::FlowR;
                return;
            }
            case SurfaceKind::Tangency:
                reset_spiral();
                resolve_tangency(cls, /*initial=*/false);
                return;
        }
    }

    /// A surface hit inside the transversality guard. On a second-order
    /// system this means the orbit grazed the tangency set; elsewhere it is a
    /// one-sided fold.
    void resolve_tangency(const SurfaceClassification& cls, bool initial) {
        const double scale = opts_.guard_tol * (1.0 + x.norm());
        if (sys_.second_order && sys_.smooth_surface) {
            Vec y;
            try {
                y = project_to_tangency(sys_, x);
            } catch (const Error& e) {
                step_failure(e.what());
                return;
            }
            SurfaceClassification on_t;
            try {
                on_t = classify_point(sys_, y, opts_.guard_tol);
            } catch (const Error& e) {
                step_failure(e.what());
                return;
            }
            if (on_t.region == RegionKind::InvInv || on_t.region == RegionKind::VisVis) {
                if (!initial) {
                    Event ev{t, x, EventKind::HitSigmaSlideStart, cls.lie_left[1], nan_,
                             "tangency interaction"};
                    try {
                        ev.s = second_order_sliding_field(sys_, y).s;
                    } catch (const Error&) {
                    }
                    traj.events.push_back(std::move(ev));
                }
                x = y;
                mode = Mode::SlideT;
                return;
            }
            if (on_t.region == RegionKind::VisInv) {
                mode = (on_t.fold_left == Fold::Visible) ? Mode::FlowL : Mode::FlowR;
                return;
            }
            step_failure("tangency interaction at a region boundary");
            return;
        }
        if (!sys_.smooth_surface) {
            step_failure("tangency interaction on a non-smooth surface");
            return;
        }
        // One-sided fold on a first-order system: the other side is
        // transversal and decides whether the motion sticks or departs.
        const double l1L = cls.lie_left[1], l1R = cls.lie_right[1];
        const Side tang = (std::abs(l1L) <= std::abs(l1R)) ? Side::Left : Side::Right;
        const double l1_other = (tang == Side::Left) ? l1R : l1L;
        if (std::abs(l1_other) <= scale) {
            step_failure("doubly tangent point on a first-order system");
            return;
        }
        const bool toward = (tang == Side::Left) ? (l1_other < 0.0) : (l1_other > 0.0);
        if (toward) {
            if (!initial) {
                Event ev{t, x, EventKind::HitSigmaSlideStart, nan_, nan_,
                         "fold arrival"};
                try {
                    ev.s = sliding_field(sys_, x).s;
                } catch (const Error&) {
                }
                traj.events.push_back(std::move(ev));
            }
            mode = Mode::SlideSigma;
            return;
        }
        // Departing: the transversal field carries the point off the surface
        // immediately, so follow the half-space it points into.
        mode = (l1_other < 0.0) ? Mode::FlowL : Mode::FlowR;
    }

    /// Spiral bookkeeping at a transversal crossing; returns true when the
    /// orbit was captured onto the tangency set (TConvergence recorded).
    bool try_capture_on_t(double nu) {
        if (have_last_cross_) prev_cross_dt_ = t - last_cross_t_;
        last_cross_t_ = t;
        have_last_cross_ = true;
        ++cross_streak_;
        nu_hist_.push_back(std::abs(nu));
        if (nu_hist_.size() > 4) nu_hist_.pop_front();

        if (!sys_.smooth_surface || cross_streak_ < 3 || nu_hist_.size() < 3) return false;
        // Compare same-parity crossings (two back): the two half-revolutions
        // perturb |V| with opposite-signed quadratic terms, so the sequence
        // may zigzag even while every full revolution shrinks it.
        const std::size_t n = nu_hist_.size();
        const bool decreasing = nu_hist_[n - 1] < nu_hist_[n - 3] &&
                                (n < 4 || nu_hist_[n - 2] < nu_hist_[n - 4]);
        if (!decreasing || std::abs(nu) >= opts_.v_converge) return false;

        Vec y;
        SurfaceClassification on_t;
        try {
            y = project_to_tangency(sys_, x);
            on_t = classify_point(sys_, y, opts_.guard_tol);
        } catch (const Error&) {
            return false;
        }
        if (on_t.region != RegionKind::InvInv) return false;

        Event ev{t, y, EventKind::TConvergence, nu, nan_, {}};
        try {
            ev.s = second_order_sliding_field(sys_, y).s;
        } catch (const Error&) {
        }
        traj.events.push_back(std::move(ev));
        reset_spiral();
        x = y;
        mode = Mode::SlideT;
        return true;
    }

    // --- segment runners ----------------------------------------------------

    void run_flow(Side side) {
        Segment& seg = begin_segment(side == Side::Left ? Mode::FlowL : Mode::FlowR);
        const auto f = sys_.field(side).real;
        Dopri5 ode([f](double, const Vec& y) { return f(y); }, opts_.rtol, opts_.atol);
        ode.init(t, x);

        const double interior = (side == Side::Left) ? -1.0 : 1.0;
        std::vector<Monitor> ms(1);
        ms[0].g = [this](const Vec& y) { return sys_.surface.real(y); };
        ms[0].seed(sys_.surface.real(x), interior);

        while (true) {
            if (t >= t_end_ - 1e-14 * std::max(1.0, std::abs(t_end_))) {
                horizon();
                return;
            }
            if (!ode.step(t_end_)) {
                step_failure("step size underflow");
                return;
            }
            if (!budget_ok()) return;

            if (auto hit = scan_step(ode, ms, ode.t())) {
                const double t_star = hit->t;
                Vec x_star = polish_surface(sys_, ode.dense(t_star));
                capture_samples(seg, ode, t_star);
                seg.samples.push_back({t_star, x_star});
                t = t_star;
                x = std::move(x_star);
                resolve_surface_arrival(side);
                return;
            }

            capture_samples(seg, ode, ode.t());
            t = ode.t();
            x = ode.y();
            seg.samples.push_back({t, x});

            if (sys_.second_order && cross_streak_ >= 2 && prev_cross_dt_ > 0.0 &&
                (t - last_cross_t_) > opts_.eject_factor * prev_cross_dt_) {
                traj.events.push_back({t, x, EventKind::Ejection, nan_, nan_,
                                       "flow segment outlasted the previous "
                                       "inter-crossing time"});
                reset_spiral();
            }
        }
    }

    void run_slide_sigma() {
        Segment& seg = begin_segment(Mode::SlideSigma);
        Dopri5 ode(
            [this](double, const Vec& y) { return sliding_field(sys_, y).field; },
            opts_.rtol, opts_.atol);
        ode.init(t, x);

        std::vector<Monitor> ms(2);
        const double s0 = sliding_field(sys_, x).s;
        ms[0].g = [this](const Vec& y) { return sliding_field(sys_, y).s; };
        ms[0].seed(s0, 1.0);
        ms[1].g = [this](const Vec& y) { return 1.0 - sliding_field(sys_, y).s; };
        ms[1].seed(1.0 - s0, 1.0);

        while (true) {
            if (t >= t_end_ - 1e-14 * std::max(1.0, std::abs(t_end_))) {
                horizon();
                return;
            }
            if (!ode.step(t_end_)) {
                step_failure("step size underflow");
                return;
            }
            if (!budget_ok()) return;

            if (auto hit = scan_step(ode, ms, ode.t())) {
                const double t_star = hit->t;
                Vec x_star = polish_surface(sys_, ode.dense(t_star));
                capture_samples(seg, ode, t_star);
                seg.samples.push_back({t_star, x_star});
                t = t_star;
                x = std::move(x_star);
                const Side exit_side = (hit->which == 0) ? Side::Left : Side::Right;
                Event ev{t, x, EventKind::SlideExit, nan_,
                         (hit->which == 0) ? 0.0 : 1.0,
                         (exit_side == Side::Left) ? "fold of the left field"
                                                   : "fold of the right field"};
                if (sys_.second_order) ev.nu = transversal_velocity(sys_, x);
                traj.events.push_back(std::move(ev));
                mode = (exit_side == Side::Left) ? Mode::FlowL : Mode::FlowR;
                return;
            }

            capture_samples(seg, ode, ode.t());
            t = ode.t();
            x = ode.y();
            if (std::abs(sys_.surface.real(x)) > 1e-9 * (1.0 + x.norm())) {
                x = polish_surface(sys_, x);
                ode.reanchor(t, x);
            }
            seg.samples.push_back({t, x});
        }
    }

    void run_slide_t() {
        Segment& seg = begin_segment(Mode::SlideT);
        // Relaxed on-manifold tolerance: Runge-Kutta stage points sit off T
        // by the local truncation error, which the per-step projection later
        // removes.
        Dopri5 ode(
            [this](double, const Vec& y) {
                return second_order_sliding_field(sys_, y, 1e-4).field;
            },
            opts_.rtol, opts_.atol);
        ode.init(t, x);

        std::vector<Monitor> ms(2);
        ms[0].g = [this](const Vec& y) {
            return lie_derivatives(sys_, Side::Left, y, 2)[2];
        };
        ms[1].g = [this](const Vec& y) {
            return lie_derivatives(sys_, Side::Right, y, 2)[2];
        };
        const double l2L0 = ms[0].g(x), l2R0 = ms[1].g(x);
        ms[0].seed(l2L0, (l2L0 >= 0.0) ? 1.0 : -1.0);
        ms[1].seed(l2R0, (l2R0 >= 0.0) ? 1.0 : -1.0);

        while (true) {
            if (t >= t_end_ - 1e-14 * std::max(1.0, std::abs(t_end_))) {
                horizon();
                return;
            }
            if (!ode.step(t_end_)) {
                step_failure("step size underflow");
                return;
            }
            if (!budget_ok()) return;

            if (auto hit = scan_step(ode, ms, ode.t())) {
                const double t_star = hit->t;
                Vec y_star = project_to_tangency(sys_, ode.dense(t_star));
                capture_samples(seg, ode, t_star);
                seg.samples.push_back({t_star, y_star});
                t = t_star;
                x = std::move(y_star);
                const Side z = (hit->which == 0) ? Side::Left : Side::Right;
                Event ev{t, x, EventKind::TExitCubicTangency,
                         transversal_velocity(sys_, x),
                         (hit->which == 0) ? 0.0 : 1.0,
                         (z == Side::Left) ? "left" : "right"};
                traj.events.push_back(std::move(ev));
                if (standalone_slide_t) {
                    done = true;
                    return;
                }
                const double l3 = lie_derivatives(sys_, z, x, 3)[3];
                if (std::abs(l3) < opts_.guard_tol * (1.0 + x.norm())) {
                    step_failure(
                        "cubic tangency with vanishing third-order derivative");
                    return;
                }
                const bool enters = (z == Side::Left) ? (l3 < 0.0) : (l3 > 0.0);
                if (!enters) {
                    step_failure(
                        "tangency exit does not enter the governing half-space");
                    return;
                }
                mode = (z == Side::Left) ? Mode::FlowL : Mode::FlowR;
                return;
            }

            capture_samples(seg, ode, ode.t());
            t = ode.t();
            x = ode.y();
            const double drift = std::abs(sys_.surface.real(x)) +
                                 std::abs(transversal_velocity(sys_, x));
            if (drift > 1e-10 * (1.0 + x.norm())) {
                x = project_to_tangency(sys_, x);
                ode.reanchor(t, x);
            }
            seg.samples.push_back({t, x});
        }
    }

    const PiecewiseSystem& sys_;
    IntegrateOptions opts_;
    double t_end_;
    std::vector<double> times_;
    std::size_t cursor_ = 0;
    long steps_left_ = 0;

    // spiral bookkeeping (second-order systems)
    std::deque<double> nu_hist_;
    int cross_streak_ = 0;
    double last_cross_t_ = 0.0;
    double prev_cross_dt_ = 0.0;
    bool have_last_cross_ = false;

    static constexpr double nan_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

Trajectory integrate(const PiecewiseSystem& sys, const Vec& x0, double t_end,
                     const IntegrateOptions& opts) {
    if (x0.size() != sys.dim) {
        throw PreconditionError("integrate: initial point has wrong dimension");
    }
    if (!x0.allFinite()) throw PreconditionError("integrate: initial point not finite");
    if (!(t_end > 0.0)) throw PreconditionError("integrate: t_end must be positive");
    Runner r(sys, opts, t_end);
    r.x = x0;
    r.run();
    return std::move(r.traj);
}

Trajectory integrate_slideT(const PiecewiseSystem& sys, const Vec& y0, double t_end,
                            const IntegrateOptions& opts) {
    if (!sys.second_order || !sys.smooth_surface) {
        throw PreconditionError(
            "integrate_slideT: requires a second-order system with a smooth surface");
    }
    if (y0.size() != sys.dim) {
        throw PreconditionError("integrate_slideT: initial point has wrong dimension");
    }
    if (!(t_end > 0.0)) {
        throw PreconditionError("integrate_slideT: t_end must be positive");
    }
    const Vec y = project_to_tangency(sys, y0);
    const SurfaceClassification cls = classify_point(sys, y, opts.guard_tol);
    if (cls.region != RegionKind::InvInv && cls.region != RegionKind::VisVis) {
        throw PreconditionError(
            "integrate_slideT: start point is not in a two-fold region that admits "
            "the second-order sliding field");
    }
    Runner r(sys, opts, t_end);
    r.x = y;
    r.mode = Mode::SlideT;
    r.standalone_slide_t = true;
    r.skip_start = true;
    r.run();
    return std::move(r.traj);
}

SurfaceHit flow_to_surface(const PiecewiseSystem& sys, Side side, const Vec& x0,
                           double t_min, double t_budget, double rtol, double atol) {
    if (x0.size() != sys.dim) {
        throw PreconditionError("flow_to_surface: initial point has wrong dimension");
    }
    if (!(t_budget > t_min) || !(t_min >= 0.0)) {
        throw PreconditionError("flow_to_surface: need 0 <= t_min < t_budget");
    }
    const auto f = sys.field(side).real;
    Dopri5 ode([f](double, const Vec& y) { return f(y); }, rtol, atol);
    ode.init(0.0, x0);
    const double xtol =
        8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t_budget);
    constexpr int kSub = 8;

    while (ode.t() < t_budget) {
        if (!ode.step(t_budget)) {
            throw NoReturnError("flow_to_surface: step size underflow before return");
        }
        if (ode.t() <= t_min) continue;
        const double ta = std::max(ode.t_prev(), t_min);
        const double tb = ode.t();
        double prev_t = ta;
        double prev_v = sys.surface.real(ode.dense(ta));
        for (int k = 1; k <= kSub; ++k) {
            const double s = (k == kSub) ? tb : ta + (tb - ta) * k / kSub;
            const double v = sys.surface.real(ode.dense(s));
            if (v == 0.0) {
                return {s, polish_surface(sys, ode.dense(s))};
            }
            if (prev_v != 0.0 && std::signbit(v) != std::signbit(prev_v)) {
                auto g = [&](double tt) { return sys.surface.real(ode.dense(tt)); };
                const double t_star = brent_root(g, prev_t, s, prev_v, v, xtol);
                return {t_star, polish_surface(sys, ode.dense(t_star))};
            }
            prev_t = s;
            prev_v = v;
        }
    }
    throw NoReturnError("flow_to_surface: no surface return within the time budget");
}

}  // namespace filsim
