#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <Eigen/Core>

#include "filsim/errors.hpp"

namespace filsim {

/// Truncated Taylor series in a single (time-like) variable.
///
/// Coefficient m stores the m-th derivative divided by m!, so a Jet of order K
/// represents c0 + c1 t + ... + cK t^K. Arithmetic is the exact algebra of
/// truncated series: coefficient m of any result depends only on coefficients
/// <= m of the operands, which is what makes the Picard flow expansion work.
///
/// Orders up to kMaxOrder are supported at runtime. Doubles promote to
/// order-0 constants; since a constant is exact at any order, binary
/// operations zero-pad the shorter operand and keep the longer order.
class Jet {
public:
    static constexpr int kMaxOrder = 7;
    static constexpr int kMaxLen = kMaxOrder + 1;

    Jet() : len_(1) { c_[0] = 0.0; }

    // NOLINTNEXTLINE(google-explicit-constructor): doubles promote to constants.
    Jet(double value) : len_(1) { c_[0] = value; }

    Jet(double value, int order) : len_(check_order(order) + 1) {
        c_.fill(0.0);
        c_[0] = value;
    }

    static Jet constant(double value, int order) { return Jet(value, order); }

    int order() const { return len_ - 1; }
    int size() const { return len_; }

    double value() const { return c_[0]; }

    double coeff(int m) const { return m < len_ ? c_[m] : 0.0; }
    double& coeff_ref(int m) { return c_[m]; }

    /// m-th derivative of the series at 0 (coefficient times m!).
    double derivative(int m) const {
        double f = 1.0;
        for (int i = 2; i <= m; ++i) f *= i;
        return coeff(m) * f;
    }

    bool all_finite() const {
        for (int i = 0; i < len_; ++i)
            if (!std::isfinite(c_[i])) return false;
        return true;
    }

    Jet operator-() const {
        Jet r = *this;
        for (int i = 0; i < r.len_; ++i) r.c_[i] = -r.c_[i];
        return r;
    }

    Jet& operator+=(const Jet& o) {
        grow_to(o.len_);
        for (int i = 0; i < o.len_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        grow_to(o.len_);
        for (int i = 0; i < o.len_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator/=(const Jet& o) { return *this = *this / o; }

    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s) {
        for (int i = 0; i < len_; ++i) c_[i] *= s;
        return *this;
    }
    Jet& operator/=(double s) { return *this *= 1.0 / s; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        const int n = std::max(a.len_, b.len_);
        Jet r;
        r.len_ = n;
        for (int m = 0; m < n; ++m) {
            double acc = 0.0;
            for (int i = 0; i <= m; ++i) acc += a.coeff(i) * b.coeff(m - i);
            r.c_[m] = acc;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        if (b.c_[0] == 0.0)
            throw DegeneracyError("jet division by series with zero constant term");
        const int n = std::max(a.len_, b.len_);
        Jet r;
        r.len_ = n;
        const double inv = 1.0 / b.c_[0];
        for (int m = 0; m < n; ++m) {
            double acc = a.coeff(m);
            for (int i = 0; i < m; ++i) acc -= r.c_[i] * b.coeff(m - i);
            r.c_[m] = acc * inv;
        }
        return r;
    }

    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(double s, const Jet& a) { return Jet(s, a.order()) / a; }

    friend bool operator==(const Jet& a, const Jet& b) {
        return a.value() == b.value();
    }
    friend bool operator!=(const Jet& a, const Jet& b) { return !(a == b); }
    friend bool operator<(const Jet& a, const Jet& b) { return a.value() < b.value(); }
    friend bool operator>(const Jet& a, const Jet& b) { return a.value() > b.value(); }
    friend bool operator<=(const Jet& a, const Jet& b) { return a.value() <= b.value(); }
    friend bool operator>=(const Jet& a, const Jet& b) { return a.value() >= b.value(); }

    friend std::ostream& operator<<(std::ostream& os, const Jet& j) {
        os << "[";
        for (int i = 0; i < j.len_; ++i) os << (i ? ", " : "") << j.c_[i];
        return os << "]";
    }

private:
    static int check_order(int order) {
        if (order < 0 || order > kMaxOrder)
            throw PreconditionError("jet order out of range");
        return order;
    }
    void grow_to(int len) {
        for (int i = len_; i < len; ++i) c_[i] = 0.0;
        len_ = std::max(len_, len);
    }

    std::array<double, kMaxLen> c_;
    int len_;
};

inline Jet sin(const Jet& a);
inline Jet cos(const Jet& a);

namespace detail {
/// sin and cos share the classical joint Taylor recurrence
/// (s' = c a', c' = -s a' in coefficient form).
inline void sincos(const Jet& a, Jet* s, Jet* c) {
    const int n = a.size();
    Jet rs(0.0, a.order()), rc(0.0, a.order());
    rs.coeff_ref(0) = std::sin(a.value());
    rc.coeff_ref(0) = std::cos(a.value());
    for (int m = 1; m < n; ++m) {
        double accs = 0.0, accc = 0.0;
        for (int i = 1; i <= m; ++i) {
            accs += i * a.coeff(i) * rc.coeff(m - i);
            accc += i * a.coeff(i) * rs.coeff(m - i);
        }
        rs.coeff_ref(m) = accs / m;
        rc.coeff_ref(m) = -accc / m;
    }
    if (s) *s = rs;
    if (c) *c = rc;
}
}  // namespace detail

inline Jet sin(const Jet& a) {
    Jet s;
    detail::sincos(a, &s, nullptr);
    return s;
}

inline Jet cos(const Jet& a) {
    Jet c;
    detail::sincos(a, nullptr, &c);
    return c;
}

inline Jet sqrt(const Jet& a) {
    if (a.value() <= 0.0)
        throw EvaluationError("jet sqrt requires positive constant term");
    Jet r(0.0, a.order());
    r.coeff_ref(0) = std::sqrt(a.value());
    const double inv2r0 = 0.5 / r.coeff(0);
    for (int m = 1; m < a.size(); ++m) {
        double acc = a.coeff(m);
        for (int i = 1; i < m; ++i) acc -= r.coeff(i) * r.coeff(m - i);
        r.coeff_ref(m) = acc * inv2r0;
    }
    return r;
}

inline Jet exp(const Jet& a) {
    Jet r(0.0, a.order());
    r.coeff_ref(0) = std::exp(a.value());
    for (int m = 1; m < a.size(); ++m) {
        double acc = 0.0;
        for (int i = 1; i <= m; ++i) acc += i * a.coeff(i) * r.coeff(m - i);
        r.coeff_ref(m) = acc / m;
    }
    return r;
}

/// Branches on the sign of the constant term; exact off the kink, an error at it.
inline Jet abs(const Jet& a) {
    if (a.value() > 0.0) return a;
    if (a.value() < 0.0) return -a;
    throw EvaluationError("jet abs at a zero constant term (non-smooth point)");
}

inline bool isfinite(const Jet& a) { return a.all_finite(); }

/// Scalar-generic vector/covector used by the model definitions.
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using JetVec = VecX<Jet>;

}  // namespace filsim

namespace Eigen {

template <>
struct NumTraits<filsim::Jet> : NumTraits<double> {
    using Real = filsim::Jet;
    using NonInteger = filsim::Jet;
    using Nested = filsim::Jet;
    using Literal = double;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = filsim::Jet::kMaxLen,
        MulCost = filsim::Jet::kMaxLen * filsim::Jet::kMaxLen,
    };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<filsim::Jet, double, BinaryOp> {
    using ReturnType = filsim::Jet;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, filsim::Jet, BinaryOp> {
    using ReturnType = filsim::Jet;
};

}  // namespace Eigen
