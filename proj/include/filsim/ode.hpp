#pragma once

#include <functional>

#include "filsim/field.hpp"

namespace filsim {

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with FSAL and a
/// quartic dense-output interpolant on the last accepted step.
///
/// Usage: construct with a right-hand side and tolerances, init(t0, y0), then
/// call step() repeatedly; after each accepted step the interval
/// [t_prev(), t()] can be interrogated through dense(). Event handling (sign
/// monitors, re-anchoring at located events) lives in the callers.
class Dopri5 {
public:
    using Rhs = std::function<Vec(double, const Vec&)>;

    Dopri5(Rhs rhs, double rtol, double atol);

    /// Anchor the integrator at (t0, y0); the first step size is chosen
    /// automatically unless h0 > 0 is given.
    void init(double t0, const Vec& y0, double h0 = 0.0);

    /// Advance one accepted step, not beyond t_limit. Returns false when the
    /// step size underflows (cannot make progress at this tolerance).
    bool step(double t_limit);

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    const Vec& y() const { return y_; }
    const Vec& y_prev() const { return y_prev_; }
    double h_next() const { return h_; }

    /// Re-anchor the current state (used after projections onto constraint
    /// manifolds or at located events); keeps the step-size memory.
    void reanchor(double t0, const Vec& y0);

    /// Dense-output evaluation at time s in [t_prev(), t()].
    Vec dense(double s) const;

    long n_steps() const { return n_steps_; }
    long n_rejected() const { return n_rejected_; }
    long n_rhs() const { return n_rhs_; }

private:
    Vec eval(double t, const Vec& y);
    double initial_step(double t0, const Vec& y0, const Vec& f0, double t_limit) const;

    Rhs rhs_;
    double rtol_, atol_;
    double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0;
    Vec y_, y_prev_;
    Vec k1_;  // FSAL: derivative at (t_, y_)
    bool have_k1_ = false;
    Vec rcont1_, rcont2_, rcont3_, rcont4_, rcont5_;
    double dense_t0_ = 0.0, dense_h_ = 0.0;
    long n_steps_ = 0, n_rejected_ = 0, n_rhs_ = 0;
};

}  // namespace filsim
