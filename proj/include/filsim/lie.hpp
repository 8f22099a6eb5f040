#pragma once

#include <vector>

#include "filsim/field.hpp"

namespace filsim {

/// Truncated Taylor expansion of the flow of a vector field about a point:
/// states[i] is the series of coordinate i in time.
struct FlowJet {
    Vec base;
    JetVec states;
    int order = 0;
};

/// Expand the flow of f through x to the given order with the Picard
/// recurrence: coefficient m+1 of the state is coefficient m of f(state)
/// divided by m+1. Throws EvaluationError on non-finite results.
FlowJet flow_jet(const VectorField& f, const Vec& x, int order);

/// Lie derivatives of h along f at x: entry m is L^m_f h(x) for m = 0..max_m
/// (entry 0 is h(x)), read off the expansion of h along the flow.
std::vector<double> lie_derivatives(const VectorField& f, const ScalarField& h,
                                    const Vec& x, int max_m);

/// Central finite-difference gradient with the classical cube-root-of-eps step.
Vec fd_gradient(const std::function<double(const Vec&)>& g, const Vec& x);

}  // namespace filsim
