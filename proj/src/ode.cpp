#include "filsim/ode.hpp"

#include <algorithm>
#include <cmath>

#include "filsim/errors.hpp"

namespace filsim {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

// Error coefficients (5th-order solution minus embedded 4th-order one).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Dense-output coefficients (Hairer, Norsett & Wanner, Solving ODEs I).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

}  // namespace

Dopri5::Dopri5(Rhs rhs, double rtol, double atol)
    : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol) {
    if (!(rtol_ > 0.0) || !(atol_ >= 0.0)) {
        throw PreconditionError("Dopri5: tolerances must satisfy rtol > 0, atol >= 0");
    }
}

Vec Dopri5::eval(double t, const Vec& y) {
    ++n_rhs_;
    Vec f = rhs_(t, y);
    if (!f.allFinite()) {
        throw EvaluationError("Dopri5: right-hand side returned a non-finite value");
    }
    return f;
}

void Dopri5::init(double t0, const Vec& y0, double h0) {
    t_ = t_prev_ = t0;
    y_ = y_prev_ = y0;
    k1_ = eval(t0, y0);
    have_k1_ = true;
    h_ = h0;
    dense_h_ = 0.0;
}

void Dopri5::reanchor(double t0, const Vec& y0) {
    t_ = t_prev_ = t0;
    y_ = y_prev_ = y0;
    k1_ = eval(t0, y0);
    have_k1_ = true;
    // keep h_ as memory of the recent scale
}

double Dopri5::initial_step(double t0, const Vec& y0, const Vec& f0, double t_limit) const {
    const Vec sc = (atol_ + rtol_ * y0.cwiseAbs().array()).matrix();
    const double d0 = (y0.array() / sc.array()).matrix().norm();
    const double d1n = (f0.array() / sc.array()).matrix().norm();
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, std::abs(t_limit - t0));
    if (h0 <= 0.0) h0 = 1e-6;
    const Vec y1 = y0 + h0 * f0;
    Vec f1;
    try {
        f1 = rhs_(t0 + h0, y1);
    } catch (const Error&) {
        return std::max(1e-10, 1e-3 * h0);
    }
    if (!f1.allFinite()) return std::max(1e-10, 1e-3 * h0);
    const double d2 = ((f1 - f0).array() / sc.array()).matrix().norm() / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    const double span = std::abs(t_limit - t0);
    const double h = std::min({100.0 * h0, h1, span});
    // Starting near the origin the weighted norms can make h0 collapse even
    // though nothing is stiff; floor the guess at a sliver of the span and
    // let the error controller reject it if the problem disagrees.
    return std::max(h, std::min(span, 1e-6 * span));
}

bool Dopri5::step(double t_limit) {
    if (!have_k1_) throw PreconditionError("Dopri5: step() before init()");
    if (!(t_limit > t_)) throw PreconditionError("Dopri5: t_limit must exceed current time");
    if (h_ <= 0.0) h_ = initial_step(t_, y_, k1_, t_limit);

    const auto n = y_.size();
    Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n), y_stage(n);

    for (int attempt = 0; attempt < 64; ++attempt) {
        double h = std::min(h_, t_limit - t_);
        const bool hits_limit = (h >= t_limit - t_ - 1e-14 * std::max(1.0, std::abs(t_limit)));
        if (h < 1e-14 * std::max(1.0, std::abs(t_))) {
            return false;  // step size underflow
        }

        y_stage = y_ + h * (a21 * k1_);
        k2 = eval(t_ + c2 * h, y_stage);
        y_stage = y_ + h * (a31 * k1_ + a32 * k2);
        k3 = eval(t_ + c3 * h, y_stage);
        y_stage = y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3);
        k4 = eval(t_ + c4 * h, y_stage);
        y_stage = y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = eval(t_ + c5 * h, y_stage);
        y_stage = y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = eval(t_ + h, y_stage);
        y_new = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = eval(t_ + h, y_new);

        const Vec err_vec = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(y_new[i]));
            const double r = err_vec[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err <= 1.0) {
            // Accept: build the dense-output polynomial for [t_, t_ + h].
            const Vec ydiff = y_new - y_;
            const Vec bspl = h * k1_ - ydiff;
            rcont1_ = y_;
            rcont2_ = ydiff;
            rcont3_ = bspl;
            rcont4_ = ydiff - h * k7 - bspl;
            rcont5_ = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            dense_t0_ = t_;
            dense_h_ = h;

            t_prev_ = t_;
            y_prev_ = y_;
            t_ = hits_limit ? t_limit : t_ + h;
            y_ = y_new;
            k1_ = k7;  // FSAL
            ++n_steps_;

            double fac = kSafety * std::pow(err > 1e-50 ? 1.0 / err : 1e50, 0.2);
            fac = std::clamp(fac, kMinFactor, kMaxFactor);
            h_ = h * fac;
            return true;
        }

        ++n_rejected_;
        double fac = kSafety * std::pow(1.0 / err, 0.2);
        h_ = h * std::clamp(fac, kMinFactor, 1.0);
    }
    return false;
}

Vec Dopri5::dense(double s) const {
    if (dense_h_ == 0.0) throw PreconditionError("Dopri5: dense() before an accepted step");
    const double theta = (s - dense_t0_) / dense_h_;
    const double theta1 = 1.0 - theta;
    return rcont1_ +
           theta * (rcont2_ + theta1 * (rcont3_ + theta * (rcont4_ + theta1 * rcont5_)));
}

}  // namespace filsim
