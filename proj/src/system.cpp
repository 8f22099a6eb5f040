#include "filsim/system.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "filsim/errors.hpp"
#include "filsim/rootfind.hpp"

namespace filsim {

Vec surface_gradient(const PiecewiseSystem& sys, const Vec& x) {
    return fd_gradient([&](const Vec& y) { return sys.surface.real(y); }, x);
}

Vec transversal_velocity_gradient(const PiecewiseSystem& sys, const Vec& x) {
    return fd_gradient([&](const Vec& y) { return transversal_velocity(sys, y); }, x);
}

std::vector<Vec> sample_surface_points(const PiecewiseSystem& sys, int n_samples,
                                       std::uint64_t seed, double box_halfwidth) {
    if (n_samples <= 0) throw PreconditionError("sample_surface_points: n_samples must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset(-box_halfwidth, box_halfwidth);

    const long budget = 100L * n_samples;
    long evals = 0;
    auto h = [&](const Vec& x) {
        ++evals;
        return sys.surface.real(x);
    };

    const Vec center = sys.anchor.size() == sys.dim ? sys.anchor : Vec(Vec::Zero(sys.dim));
    std::vector<Vec> points;
    points.reserve(n_samples);
    while (static_cast<int>(points.size()) < n_samples) {
        if (evals >= budget) {
            std::ostringstream msg;
            msg << "surface sampling budget exhausted after " << evals << " evaluations ("
                << points.size() << "/" << n_samples << " points found)";
            throw SamplingError(msg.str());
        }
        Vec p(sys.dim), q(sys.dim);
        for (int i = 0; i < sys.dim; ++i) {
            p[i] = center[i] + offset(rng);
            q[i] = center[i] + offset(rng);
        }
        const double hp = h(p), hq = h(q);
        Vec x;
        if (hp == 0.0) {
            x = p;
        } else if (hq == 0.0) {
            x = q;
        } else if ((hp < 0.0) != (hq < 0.0)) {
            const Vec dir = q - p;
            const double t = brent_root([&](double s) { return h(p + s * dir); },
                                        0.0, 1.0, hp, hq, 1e-15);
            x = p + t * dir;
        } else {
            continue;
        }
        const Vec grad = surface_gradient(sys, x);
        if (grad.norm() <= 1e-10 * (1.0 + x.norm()))
            throw DegeneracyError("vanishing surface gradient at sampled surface point");
        points.push_back(std::move(x));
    }
    return points;
}

SecondOrderReport check_second_order(const PiecewiseSystem& sys, int n_samples,
                                     std::uint64_t seed, double box_halfwidth) {
    const std::vector<Vec> points = sample_surface_points(sys, n_samples, seed, box_halfwidth);
    SecondOrderReport report;
    report.samples = static_cast<int>(points.size());
    report.second_order = true;
    for (const Vec& x : points) {
        const double vl = lie_derivatives(sys, Side::Left, x, 1)[1];
        const double vr = lie_derivatives(sys, Side::Right, x, 1)[1];
        const double gap = std::abs(vl - vr);
        report.max_velocity_gap = std::max(report.max_velocity_gap, gap);
        if (gap > 1e-10 * (1.0 + x.norm())) report.second_order = false;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Model registry

namespace {

using Params = std::map<std::string, double>;

PiecewiseSystem build_example_b(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "example-b";
    sys.dim = 2;
    sys.params = p;
    sys.second_order = false;
    sys.left = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(2);
        f[0] = -x[1];
        f[1] = S(-1.0);
        return f;
    });
    sys.right = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(2);
        f[0] = 2.0 * x[1] - 2.0;
        f[1] = S(1.0);
        return f;
    });
    sys.surface = make_scalar_field([](const auto& x) { return x[0]; });
    sys.anchor = Vec::Zero(2);
    return sys;
}

PiecewiseSystem build_cubic_3d(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "cubic-3d";
    sys.dim = 3;
    sys.params = p;
    sys.second_order = true;
    sys.left = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(3);
        f[0] = x[1];
        f[1] = 1.0 - x[2];
        f[2] = S(0.5);
        return f;
    });
    sys.right = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(3);
        f[0] = x[1];
        f[1] = x[2];
        f[2] = S(0.2);
        return f;
    });
    sys.surface = make_scalar_field([](const auto& x) { return x[0]; });
    sys.anchor = Vec::Zero(3);
    return sys;
}

PiecewiseSystem build_impact_osc(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "impact-osc";
    sys.dim = 3;
    sys.params = p;
    sys.second_order = true;
    const double k = p.at("k"), b = p.at("b"), kD = p.at("k_D"), d = p.at("d"), A = p.at("A");
    sys.left = make_vector_field([k, b, A](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        using std::cos;
        VecX<S> f(3);
        f[0] = x[1];
        f[1] = -k * (x[0] + 1.0) - b * x[1] + A * cos(x[2]);
        f[2] = S(1.0);
        return f;
    });
    sys.right = make_vector_field([k, b, A, kD, d](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        using std::cos;
        VecX<S> f(3);
        f[0] = x[1];
        f[1] = -k * (x[0] + 1.0) - b * x[1] + A * cos(x[2]) - kD * (x[0] + d);
        f[2] = S(1.0);
        return f;
    });
    sys.surface = make_scalar_field([](const auto& x) { return x[0]; });
    sys.anchor = Vec::Zero(3);
    return sys;
}

PiecewiseSystem build_ant_colony(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "ant-colony";
    sys.dim = 3;
    sys.params = p;
    sys.second_order = true;
    const double N = p.at("N"), Theta = p.at("Theta"), rho = p.at("rho");
    const double a_cs = p.at("alpha_cs"), a_ls = p.at("alpha_ls");
    const double b_ls = p.at("beta_ls"), b_cs = p.at("beta_cs");
    const double a_al = p.at("alpha_al"), a_lc = p.at("alpha_lc");
    const double a_as = p.at("alpha_as"), a_sa = p.at("alpha_sa");
    const double pool = rho * N;
    sys.left = make_vector_field([=](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(3);
        f[0] = (a_sa + b_ls * x[1] + b_cs * x[2]) * (pool - x[0] - x[1] - x[2])
               - (a_as + a_al) * x[0];
        f[1] = a_al * x[0] - a_ls * x[1];
        f[2] = -a_cs * x[2];
        return f;
    });
    sys.right = make_vector_field([=](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(3);
        f[0] = (a_sa + b_ls * x[1] + b_cs * x[2]) * (pool - x[0] - x[1] - x[2])
               - (a_as + a_al) * x[0];
        f[1] = a_al * x[0] - a_ls * x[1] - a_lc * x[1];
        f[2] = -a_cs * x[2] + a_lc * x[1];
        return f;
    });
    sys.surface = make_scalar_field([Theta](const auto& x) {
        return x[0] + x[1] + x[2] - Theta;
    });
    sys.anchor = Vec(3);
    sys.anchor << 2.0 * Theta / 3.0, Theta / 6.0, Theta / 6.0;
    return sys;
}

PiecewiseSystem build_planar_quadratic(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "planar-quadratic";
    sys.dim = 2;
    sys.params = p;
    sys.second_order = true;  // a0 = 0 and a2, a5 shared by construction
    const double a2 = p.at("a2"), a5 = p.at("a5");
    auto side = [a2, a5](const Params& q, char z) {
        auto g = [&](const char* stem) { return q.at(std::string(stem) + z); };
        const double a1 = g("a1"), a3 = g("a3"), a4 = g("a4");
        const double b0 = g("b0"), b1 = g("b1"), b2 = g("b2");
        const double b3 = g("b3"), b4 = g("b4"), b5 = g("b5");
        return make_vector_field([=](const auto& x) {
            using S = std::decay_t<decltype(x[0])>;
            VecX<S> f(2);
            f[0] = a1 * x[0] + a2 * x[1] + a3 * x[0] * x[0] + a4 * x[0] * x[1]
                   + a5 * x[1] * x[1];
            f[1] = b0 + b1 * x[0] + b2 * x[1] + b3 * x[0] * x[0] + b4 * x[0] * x[1]
                   + b5 * x[1] * x[1];
            return f;
        });
    };
    sys.left = side(p, 'L');
    sys.right = side(p, 'R');
    sys.surface = make_scalar_field([](const auto& x) { return x[0]; });
    sys.anchor = Vec::Zero(2);
    return sys;
}

PiecewiseSystem build_fuller(const Params& p) {
    PiecewiseSystem sys;
    sys.name = "fuller";
    sys.dim = 2;
    sys.params = p;
    sys.second_order = false;
    sys.smooth_surface = false;
    const double C = p.at("C");
    sys.left = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(2);
        f[0] = x[1];
        f[1] = S(1.0);
        return f;
    });
    sys.right = make_vector_field([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        VecX<S> f(2);
        f[0] = x[1];
        f[1] = S(-1.0);
        return f;
    });
    sys.surface = make_scalar_field([C](const auto& x) {
        using std::abs;
        return x[0] + C * x[1] * abs(x[1]);
    });
    sys.anchor = Vec::Zero(2);
    return sys;
}

struct RegistryEntry {
    ModelInfo info;
    PiecewiseSystem (*build)(const Params&);
};

const std::vector<RegistryEntry>& registry() {
    static const std::vector<RegistryEntry> entries = [] {
        std::vector<RegistryEntry> r;
        r.push_back({{"example-b",
                      "planar piecewise-linear model: crossing and sliding regions, "
                      "pseudo-equilibrium at (0,2)",
                      2,
                      {}},
                     &build_example_b});
        r.push_back({{"cubic-3d",
                      "3-D polynomial model: spiralling around an invisible-invisible "
                      "tangency line, cubic-tangency exit at x3=0",
                      3,
                      {}},
                     &build_cubic_3d});
        r.push_back({{"impact-osc",
                      "periodically forced block impacting a preloaded damper "
                      "(phase coordinates x3 = t mod 2*pi)",
                      3,
                      {{"k", 5.0}, {"b", 0.5}, {"k_D", 10.0}, {"d", 0.3}, {"A", 9.0}}},
                     &build_impact_osc});
        r.push_back({{"ant-colony",
                      "compartmental colony-migration model switching at a population "
                      "threshold",
                      3,
                      {{"N", 200.0},
                       {"Theta", 30.0},
                       {"rho", 0.25},
                       {"alpha_cs", 0.07},
                       {"alpha_ls", 0.018},
                       {"beta_ls", 0.049},
                       {"beta_cs", 0.079},
                       {"alpha_al", 0.007},
                       {"alpha_lc", 0.15},
                       {"alpha_as", 0.24},
                       {"alpha_sa", 0.01}}},
                     &build_ant_colony});
        r.push_back({{"planar-quadratic",
                      "planar quadratic normal form near a two-fold; per-side quadratic "
                      "coefficients as parameters (a2, a5 shared across sides)",
                      2,
                      {{"a2", 1.0},   {"a5", 0.0},   {"a1L", -0.3}, {"a3L", 0.0},
                       {"a4L", 0.0},  {"b0L", 1.0},  {"b1L", 0.0},  {"b2L", -0.1},
                       {"b3L", 0.0},  {"b4L", 0.0},  {"b5L", 0.0},  {"a1R", -0.2},
                       {"a3R", 0.0},  {"a4R", 0.0},  {"b0R", -1.0}, {"b1R", 0.0},
                       {"b2R", 0.0},  {"b3R", 0.0},  {"b4R", 0.0},  {"b5R", 0.0}}},
                     &build_planar_quadratic});
        r.push_back({{"fuller",
                      "double integrator under bang-bang control with a nonsmooth "
                      "switching curve; reaches the origin through infinitely many "
                      "switches in finite time",
                      2,
                      {{"C", std::sqrt((std::sqrt(33.0) - 1.0) / 24.0)}}},
                     &build_fuller});
        return r;
    }();
    return entries;
}

}  // namespace

const std::vector<ModelInfo>& list_models() {
    static const std::vector<ModelInfo> infos = [] {
        std::vector<ModelInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

PiecewiseSystem build_model(const std::string& id, const std::map<std::string, double>& overrides) {
    for (const auto& entry : registry()) {
        if (entry.info.id != id) continue;
        Params params = entry.info.defaults;
        for (const auto& [key, value] : overrides) {
            auto it = params.find(key);
            if (it == params.end()) {
                std::ostringstream msg;
                msg << "unknown parameter '" << key << "' for model '" << id << "'";
                throw PreconditionError(msg.str());
            }
            it->second = value;
        }
        return entry.build(params);
    }
    std::ostringstream msg;
    msg << "unknown model id '" << id << "' (available:";
    for (const auto& entry : registry()) msg << " " << entry.info.id;
    msg << ")";
    throw PreconditionError(msg.str());
}

}  // namespace filsim
