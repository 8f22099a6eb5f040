#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "filsim/jet.hpp"

namespace filsim {

using Vec = Eigen::VectorXd;

/// A vector field evaluable on plain states and on jet states. Both entries
/// are built from one scalar-generic callable by make_vector_field, so the
/// two views can never drift apart.
struct VectorField {
    std::function<Vec(const Vec&)> real;
    std::function<JetVec(const JetVec&)> jets;

    Vec operator()(const Vec& x) const { return real(x); }
    JetVec operator()(const JetVec& x) const { return jets(x); }
};

/// Same idea for scalar functions (the switching surface).
struct ScalarField {
    std::function<double(const Vec&)> real;
    std::function<Jet(const JetVec&)> jets;

    double operator()(const Vec& x) const { return real(x); }
    Jet operator()(const JetVec& x) const { return jets(x); }
};

template <class F>
VectorField make_vector_field(F f) {
    return VectorField{
        [f](const Vec& x) -> Vec { return f(x); },
        [f](const JetVec& x) -> JetVec { return f(x); },
    };
}

template <class F>
ScalarField make_scalar_field(F f) {
    return ScalarField{
        [f](const Vec& x) -> double { return f(x); },
        [f](const JetVec& x) -> Jet { return f(x); },
    };
}

/// Constant vector field (used to probe directional derivatives of scalar
/// fields along a frozen vector, e.g. the sliding-field tangency identity).
inline VectorField frozen_field(const Vec& value) {
    return VectorField{
        [value](const Vec&) -> Vec { return value; },
        [value](const JetVec& x) -> JetVec {
            JetVec out(value.size());
            for (Eigen::Index i = 0; i < value.size(); ++i)
                out[i] = Jet(value[i], x.size() ? x[0].order() : 0);
            return out;
        },
    };
}

}  // namespace filsim
