#include "filsim/lie.hpp"

#include <cmath>
#include <string>

namespace filsim {

FlowJet flow_jet(const VectorField& f, const Vec& x, int order) {
    if (order < 1 || order > Jet::kMaxOrder)
        throw PreconditionError("flow_jet order must be in [1, " +
                                std::to_string(Jet::kMaxOrder) + "]");
    FlowJet flow;
    flow.base = x;
    flow.order = order;
    flow.states.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        flow.states[i] = Jet(x[i], order);

    // After sweep m the state series are exact through order m+1: truncated
    // series arithmetic is lower triangular, so coefficient m of f(state)
    // only reads state coefficients <= m, which the previous sweeps fixed.
    for (int m = 0; m < order; ++m) {
        JetVec fx = f(flow.states);
        if (fx.size() != x.size())
            throw EvaluationError("vector field dimension mismatch in flow_jet");
        for (Eigen::Index i = 0; i < x.size(); ++i)
            flow.states[i].coeff_ref(m + 1) = fx[i].coeff(m) / (m + 1);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!flow.states[i].all_finite())
            throw EvaluationError("non-finite flow expansion in coordinate " +
                                  std::to_string(i));
    }
    return flow;
}

std::vector<double> lie_derivatives(const VectorField& f, const ScalarField& h,
                                    const Vec& x, int max_m) {
    if (max_m < 0) throw PreconditionError("lie_derivatives needs max_m >= 0");
    if (max_m == 0) return {h.real(x)};
    FlowJet flow = flow_jet(f, x, max_m);
    Jet along = h(flow.states);
    if (!along.all_finite())
        throw EvaluationError("non-finite surface expansion in lie_derivatives");
    std::vector<double> out(static_cast<size_t>(max_m) + 1);
    for (int m = 0; m <= max_m; ++m) out[static_cast<size_t>(m)] = along.derivative(m);
    return out;
}

Vec fd_gradient(const std::function<double(const Vec&)>& g, const Vec& x) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                     std::max(1.0, x.norm());
    Vec grad(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = g(xp);
        xp[i] = xi - h;
        const double fm = g(xp);
        xp[i] = xi;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace filsim
