#include "filsim/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "filsim/errors.hpp"
#include "filsim/sliding.hpp"

namespace filsim {

const char* to_string(EqOrder o) {
    return o == EqOrder::First ? "first" : "second";
}

const char* to_string(Admissibility a) {
    return a == Admissibility::Admissible ? "admissible" : "virtual";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::AsymptoticallyStable: return "asymptotically-stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

constexpr double kEigTol = 1e-8;

Vec reproject(const PiecewiseSystem& sys, EqOrder order, const Vec& x) {
    return order == EqOrder::First ? project_to_surface(sys, x)
                                   : project_to_tangency(sys, x);
}

SlidingValue restricted_field(const PiecewiseSystem& sys, EqOrder order,
                              const Vec& x) {
    return order == EqOrder::First ? sliding_field(sys, x)
                                   : second_order_sliding_field(sys, x);
}

}  // namespace

Eigen::MatrixXd chart_basis(const PiecewiseSystem& sys, const Vec& x,
                            EqOrder order) {
    const int n = static_cast<int>(sys.dim);
    const int codim = order == EqOrder::First ? 1 : 2;
    Eigen::MatrixXd g(n, codim);
    g.col(0) = surface_gradient(sys, x);
    if (codim == 2) g.col(1) = transversal_velocity_gradient(sys, x);
    // The trailing columns of the full Q factor span the orthogonal
    // complement of the gradient(s), i.e. the tangent space of the manifold.
    const Eigen::MatrixXd q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    return q.rightCols(n - codim);
}

Eigen::MatrixXd restricted_jacobian(const PiecewiseSystem& sys, const Vec& x,
                                    EqOrder order, const Eigen::MatrixXd& basis) {
    const int m = static_cast<int>(basis.cols());
    const double h = 1e-6 * (1.0 + x.norm());
    Eigen::MatrixXd jac(m, m);
    for (int j = 0; j < m; ++j) {
        const Vec xp = reproject(sys, order, x + h * basis.col(j));
        const Vec xm = reproject(sys, order, x - h * basis.col(j));
        const Vec fp = restricted_field(sys, order, xp).field;
        const Vec fm = restricted_field(sys, order, xm).field;
        jac.col(j) = basis.transpose() * (fp - fm) / (2.0 * h);
    }
    return jac;
}

std::vector<PseudoEquilibrium> find_pseudo_equilibria(
    const PiecewiseSystem& sys, const std::vector<Vec>& seeds, EqOrder order,
    std::vector<std::string>* notes) {
    if (order == EqOrder::Second && !sys.second_order) {
        throw PreconditionError(
            "find_pseudo_equilibria: second-order equilibria need a "
            "second-order system");
    }
    auto note = [&](std::size_t i, const std::string& why) {
        if (notes) notes->push_back("seed " + std::to_string(i) + ": " + why);
    };

    std::vector<PseudoEquilibrium> found;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (seeds[i].size() != static_cast<Eigen::Index>(sys.dim) ||
            !seeds[i].allFinite()) {
            note(i, "seed has the wrong dimension or non-finite entries");
            continue;
        }

        Vec x;
        double residual = std::numeric_limits<double>::infinity();
        double s_at_root = std::numeric_limits<double>::quiet_NaN();
        try {
            x = reproject(sys, order, seeds[i]);
            for (int it = 0; it < 50; ++it) {
                const SlidingValue sv = restricted_field(sys, order, x);
                residual = sv.field.norm();
                s_at_root = sv.s;
                if (residual <= 1e-12 * (1.0 + x.norm())) break;
                const Eigen::MatrixXd basis = chart_basis(sys, x, order);
                if (basis.cols() == 0) break;  // zero-dimensional chart
                const Eigen::MatrixXd jac = restricted_jacobian(sys, x, order, basis);
                const Eigen::VectorXd g = basis.transpose() * sv.field;
                const Eigen::VectorXd step = jac.fullPivLu().solve(-g);
                if (!step.allFinite() || step.norm() > 1e6 * (1.0 + x.norm())) {
                    throw DegeneracyError("Newton step diverged");
                }
                x = reproject(sys, order, x + basis * step);
            }
        } catch (const Error& e) {
            note(i, std::string("iteration failed: ") + e.what());
            continue;
        }
        if (!(residual <= 1e-10)) {
            note(i, "Newton did not reach the residual bound within 50 steps");
            continue;
        }

        bool duplicate = false;
        for (const PseudoEquilibrium& prev : found) {
            if ((prev.point - x).norm() < 1e-6) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;

        PseudoEquilibrium pe;
        pe.point = x;
        pe.order = order;
        pe.s = s_at_root;
        pe.admissibility = (s_at_root >= 0.0 && s_at_root <= 1.0)
                               ? Admissibility::Admissible
                               : Admissibility::Virtual;
        try {
            const SurfaceClassification cls = classify_point(sys, x);
            pe.kind = cls.kind;
            pe.region = cls.region;
            pe.lambda = cls.lambda;
        } catch (const Error& e) {
            note(i, std::string("classification failed: ") + e.what());
            continue;
        }

        bool jac_ok = true;
        try {
            pe.jacobian = restricted_jacobian(sys, x, order, chart_basis(sys, x, order));
            jac_ok = pe.jacobian.allFinite();
        } catch (const Error&) {
            jac_ok = false;
        }
        if (jac_ok && pe.jacobian.size() > 0) {
            Eigen::EigenSolver<Eigen::MatrixXd> es(pe.jacobian);
            std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                                 es.eigenvalues().data() +
                                                     es.eigenvalues().size());
            std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
                if (a.real() != b.real()) return a.real() > b.real();
                return a.imag() > b.imag();
            });
            pe.eigenvalues =
                Eigen::Map<const Eigen::VectorXcd>(ev.data(), ev.size());
        } else {
            pe.eigenvalues.resize(0);
        }
        if (jac_ok) {
            pe.verdict = classify_stability(sys, pe);
        } else {
            pe.verdict = Verdict::Inconclusive;
            note(i, "jacobian finite differences failed; verdict inconclusive");
        }
        found.push_back(std::move(pe));
    }
    return found;
}

Verdict classify_stability(const PiecewiseSystem&, const PseudoEquilibrium& pe) {
    bool any_pos = false;
    bool all_neg = true;
    for (Eigen::Index k = 0; k < pe.eigenvalues.size(); ++k) {
        const double re = pe.eigenvalues[k].real();
        if (re > kEigTol) any_pos = true;
        if (!(re < -kEigTol)) all_neg = false;
    }

    if (pe.order == EqOrder::First) {
        if (pe.kind == SurfaceKind::RepellingSliding || any_pos)
            return Verdict::Unstable;
        if (pe.kind == SurfaceKind::AttractingSliding && all_neg)
            return Verdict::AsymptoticallyStable;
        return Verdict::Inconclusive;
    }

    const bool inv_inv = pe.region == RegionKind::InvInv;
    if (pe.region == RegionKind::VisVis || (inv_inv && pe.lambda > kEigTol) ||
        any_pos) {
        return Verdict::Unstable;
    }
    if (inv_inv && pe.lambda < -kEigTol && all_neg)
        return Verdict::AsymptoticallyStable;
    return Verdict::Inconclusive;
}

}  // namespace filsim
