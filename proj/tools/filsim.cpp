// Command-line front end: model registry listing, event-driven simulation,
// surface classification, return-map fitting, pseudo-equilibrium search, and
// the numerical verification suite.
//
// Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "filsim/equilibria.hpp"
#include "filsim/errors.hpp"
#include "filsim/integrate.hpp"
#include "filsim/io.hpp"
#include "filsim/retmap.hpp"
#include "filsim/sliding.hpp"
#include "filsim/surface.hpp"
#include "filsim/system.hpp"
#include "filsim/verify.hpp"

namespace {

using namespace filsim;

/// Bad user input discovered after flag parsing; reported on stderr, exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a run needs; filled from flags, then a key=value config file,
/// then defaults (highest precedence first).
struct RunConfig {
    std::string model;
    std::vector<std::string> params;  // name=value overrides
    std::string x0;                   // comma-separated initial condition
    double rtol = 1e-10;
    double atol = 1e-12;
    double v_converge = 1e-6;
    double guard_tol = 1e-8;
    double horizon = 10.0;
    std::uint64_t seed = 20240817;
    std::string events_path;
    std::string repelling = "stop";
    double sample_dt = 0.0;
    bool slide_tangency = false;
    std::string config_path;
};

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Fold a key=value file into a parsed subcommand: each key names one of the
/// subcommand's long options, and a value from the file applies only when the
/// option was absent from the command line, so flags > file > defaults.
void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file '" + path + "'");
    std::vector<CLI::Option*> from_file;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError(where + ": expected key=value");
        const std::string key = trim(text.substr(0, eq));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw UsageError(where + ": unknown key '" + key + "'");
        const bool started_here =
            std::find(from_file.begin(), from_file.end(), opt) != from_file.end();
        if (opt->count() > 0 && !started_here) continue;
        opt->add_result(trim(text.substr(eq + 1)));
        if (!started_here) from_file.push_back(opt);
    }
    for (CLI::Option* opt : from_file) opt->run_callback();
}

Vec parse_vec(const std::string& flag, const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(flag + ": expected comma-separated numbers, got '" +
                             text + "'");
        }
    }
    if (vals.empty())
        throw UsageError(flag + ": expected comma-separated numbers");
    return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const std::string& kv : kvs) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("--param expects name=value, got '" + kv + "'");
        try {
            out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("--param " + kv + ": value is not a number");
        }
    }
    return out;
}

PiecewiseSystem make_system(const RunConfig& cfg) {
    try {
        return build_model(cfg.model, parse_params(cfg.params));
    } catch (const PreconditionError& e) {
        // Unknown model ids or parameter names are usage errors.
        throw UsageError(e.what());
    }
}

std::string json_list(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_g17(v[i]);
    }
    return out + "]";
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--model", cfg.model, "Registry model id (see `models`)")
        ->required();
    cmd->add_option("--param", cfg.params,
                    "Model parameter override name=value (repeatable)");
    cmd->add_option("--config", cfg.config_path,
                    "Read options from a key=value file (flags win)");
}

void add_tolerance_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--rtol", cfg.rtol, "Relative integration tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--atol", cfg.atol, "Absolute integration tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--v-converge", cfg.v_converge,
                    "Transversal velocity treated as converged to the tangency set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--guard-tol", cfg.guard_tol,
                    "Surface guard tolerance for event location")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

IntegrateOptions make_options(const RunConfig& cfg) {
    IntegrateOptions opts;
    opts.rtol = cfg.rtol;
    opts.atol = cfg.atol;
    opts.v_converge = cfg.v_converge;
    opts.guard_tol = cfg.guard_tol;
    if (cfg.repelling == "stop")
        opts.repelling_choice = RepellingChoice::Stop;
    else if (cfg.repelling == "left")
        opts.repelling_choice = RepellingChoice::Left;
    else if (cfg.repelling == "right")
        opts.repelling_choice = RepellingChoice::Right;
    else
        throw UsageError("--repelling-choice must be stop, left or right");
    if (cfg.sample_dt > 0.0)
        for (int k = 1; k * cfg.sample_dt <= cfg.horizon; ++k)
            opts.sample_times.push_back(k * cfg.sample_dt);
    return opts;
}

int run_models() {
    for (const ModelInfo& m : list_models()) {
        std::printf("%-16s dim %d  %s\n", m.id.c_str(), m.dim,
                    m.summary.c_str());
        if (!m.defaults.empty()) {
            std::string line = "    defaults:";
            for (const auto& [k, v] : m.defaults) {
                char buf[64];
                std::snprintf(buf, sizeof buf, " %s=%g", k.c_str(), v);
                line += buf;
            }
            std::printf("%s\n", line.c_str());
        }
    }
    return 0;
}

int run_simulate(const RunConfig& cfg) {
    const PiecewiseSystem sys = make_system(cfg);
    if (cfg.x0.empty())
        throw UsageError("--x0 is required (as a flag or a config-file key)");
    const Vec x0 = parse_vec("--x0", cfg.x0);
    if (x0.size() != sys.dim)
        throw UsageError("--x0 has " + std::to_string(x0.size()) +
                         " entries; model " + cfg.model + " needs " +
                         std::to_string(sys.dim));
    const IntegrateOptions opts = make_options(cfg);
    const Trajectory tr = cfg.slide_tangency
                              ? integrate_slideT(sys, x0, cfg.horizon, opts)
                              : integrate(sys, x0, cfg.horizon, opts);
    write_csv(std::cout, tr);
    if (!cfg.events_path.empty()) {
        std::ofstream f(cfg.events_path);
        if (!f) throw UsageError("cannot open events path " + cfg.events_path);
        write_events_jsonl(f, tr);
    }
    return 0;
}

int run_classify(const RunConfig& cfg, const std::string& x_text, int n) {
    const PiecewiseSystem sys = make_system(cfg);
    std::vector<Vec> pts;
    if (!x_text.empty())
        pts.push_back(project_to_surface(sys, parse_vec("--x", x_text)));
    else
        pts = sample_surface_points(sys, n, cfg.seed);
    for (const Vec& p : pts) {
        const SurfaceClassification cls = classify_point(sys, p);
        std::cout << "{\"point\": " << json_vec(cls.point) << ", \"kind\": \""
                  << to_string(cls.kind) << "\", \"fold_left\": \""
                  << to_string(cls.fold_left) << "\", \"fold_right\": \""
                  << to_string(cls.fold_right) << "\", \"region\": \""
                  << to_string(cls.region)
                  << "\", \"lambda\": " << json_number_or_null(cls.lambda)
                  << ", \"lambda_sign\": \"" << to_string(cls.lambda_sign)
                  << "\", \"lie_left\": " << json_list(cls.lie_left)
                  << ", \"lie_right\": " << json_list(cls.lie_right) << "}\n";
    }
    return 0;
}

int run_return_map(const RunConfig& cfg, const std::string& base_text) {
    const PiecewiseSystem sys = make_system(cfg);
    const Vec base = parse_vec("--base", base_text);
    if (base.size() != sys.dim)
        throw UsageError("--base has the wrong dimension for " + cfg.model);
    const AsymptoticFit fit = fit_asymptotics(sys, base);
    std::cout << "{\n  \"base\": " << json_vec(fit.base) << ",\n"
              << "  \"beta_pred\": " << format_g17(fit.beta_pred) << ",\n"
              << "  \"beta_hat\": " << format_g17(fit.beta_hat) << ",\n"
              << "  \"c_pred\": " << format_g17(fit.c_pred) << ",\n"
              << "  \"c_hat\": " << format_g17(fit.c_hat) << ",\n"
              << "  \"samples\": [\n";
    for (std::size_t i = 0; i < fit.samples.size(); ++i) {
        const ReturnMapSample& s = fit.samples[i];
        std::cout << "    {\"nu\": " << format_g17(s.nu)
                  << ", \"tau\": " << format_g17(s.tau)
                  << ", \"v_return\": " << format_g17(s.v_return) << "}"
                  << (i + 1 < fit.samples.size() ? "," : "") << "\n";
    }
    std::cout << "  ]\n}\n";
    return 0;
}

int run_pseudo_eq(const RunConfig& cfg, std::string order_text,
                  const std::vector<std::string>& seed_texts, int n) {
    const PiecewiseSystem sys = make_system(cfg);
    if (order_text.empty()) order_text = sys.second_order ? "second" : "first";
    EqOrder order;
    if (order_text == "first")
        order = EqOrder::First;
    else if (order_text == "second")
        order = EqOrder::Second;
    else
        throw UsageError("--order must be first or second");

    std::vector<Vec> seeds;
    for (const std::string& s : seed_texts)
        seeds.push_back(parse_vec("--seed-point", s));
    if (seeds.empty()) seeds = sample_surface_points(sys, n, cfg.seed);

    std::vector<std::string> notes;
    const auto found = find_pseudo_equilibria(sys, seeds, order, &notes);

    std::cout << "{\n  \"order\": \"" << to_string(order) << "\",\n"
              << "  \"equilibria\": [\n";
    for (std::size_t i = 0; i < found.size(); ++i) {
        const PseudoEquilibrium& pe = found[i];
        std::cout << "    {\"point\": " << json_vec(pe.point)
                  << ", \"admissibility\": \"" << to_string(pe.admissibility)
                  << "\", \"kind\": \"" << to_string(pe.kind)
                  << "\", \"region\": \"" << to_string(pe.region)
                  << "\", \"s\": " << json_number_or_null(pe.s)
                  << ", \"lambda\": " << json_number_or_null(pe.lambda)
                  << ", \"eigenvalues\": [";
        for (Eigen::Index j = 0; j < pe.eigenvalues.size(); ++j) {
            if (j > 0) std::cout << ", ";
            std::cout << "[" << format_g17(pe.eigenvalues[j].real()) << ", "
                      << format_g17(pe.eigenvalues[j].imag()) << "]";
        }
        std::cout << "], \"verdict\": \"" << to_string(pe.verdict) << "\"}"
                  << (i + 1 < found.size() ? "," : "") << "\n";
    }
    std::cout << "  ],\n  \"notes\": [";
    for (std::size_t i = 0; i < notes.size(); ++i) {
        if (i > 0) std::cout << ", ";
        std::cout << "\"" << notes[i] << "\"";
    }
    std::cout << "]\n}\n";
    return 0;
}

int run_verify(std::uint64_t seed) {
    const VerifyReport report = run_verification(seed);
    std::fputs(render_report(report).c_str(), stdout);
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Event-driven simulation of piecewise-smooth ODEs under the Filippov "
        "convention, with tangency-surface classification, return-map "
        "fitting and pseudo-equilibrium analysis"};
    app.require_subcommand(1);

    CLI::App* models = app.add_subcommand(
        "models", "List the registry models with their parameter defaults");

    RunConfig sim_cfg;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Integrate a model and emit CSV samples plus events");
    add_model_options(simulate, sim_cfg);
    add_tolerance_options(simulate, sim_cfg);
    simulate->add_option("--x0", sim_cfg.x0,
                         "Initial condition, comma separated");
    simulate->add_option("--t-end", sim_cfg.horizon, "Time horizon")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate->add_option("--events", sim_cfg.events_path,
                         "Write events as JSON lines to this path");
    simulate->add_option("--repelling-choice", sim_cfg.repelling,
                         "On a repelling sliding region: stop, left or right")
        ->capture_default_str();
    simulate->add_option("--sample-dt", sim_cfg.sample_dt,
                         "Store samples on a uniform grid of this spacing "
                         "instead of at the accepted steps");
    simulate->add_flag("--slide-tangency", sim_cfg.slide_tangency,
                       "Integrate the second-order sliding flow on the "
                       "tangency set from x0");

    RunConfig cls_cfg;
    std::string cls_x;
    int cls_n = 8;
    CLI::App* classify = app.add_subcommand(
        "classify-surface",
        "Classify surface points: kind, fold visibility, region, Lambda");
    add_model_options(classify, cls_cfg);
    classify->add_option("--x", cls_x,
                         "Point to project onto the surface and classify "
                         "(default: sample the surface instead)");
    classify->add_option("--n", cls_n, "How many surface points to sample")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    classify->add_option("--seed", cls_cfg.seed, "Sampling seed")
        ->capture_default_str();

    RunConfig rm_cfg;
    std::string rm_base;
    CLI::App* retmap = app.add_subcommand(
        "return-map",
        "Fit the spiralling return map's leading coefficients at a "
        "tangency-set base point");
    add_model_options(retmap, rm_cfg);
    retmap->add_option("--base", rm_base, "Base point, comma separated")
        ->required();

    RunConfig pe_cfg;
    std::string pe_order;
    std::vector<std::string> pe_seeds;
    int pe_n = 8;
    CLI::App* pseudo = app.add_subcommand(
        "pseudo-eq", "Locate and classify pseudo-equilibria of a sliding flow");
    add_model_options(pseudo, pe_cfg);
    pseudo->add_option("--order", pe_order,
                       "first (sliding on the surface) or second (sliding on "
                       "the tangency set); default matches the model");
    pseudo->add_option("--seed-point", pe_seeds,
                       "Newton seed, comma separated (repeatable; default: "
                       "sampled surface points)");
    pseudo->add_option("--n", pe_n, "How many seeds to sample when none given")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pseudo->add_option("--seed", pe_cfg.seed, "Sampling seed")
        ->capture_default_str();

    std::uint64_t verify_seed = 20240817;
    CLI::App* verify = app.add_subcommand(
        "verify", "Run the numerical verification suite and print a "
                  "pass/fail table");
    verify->add_option("--seed", verify_seed, "Suite seed")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*models) return run_models();
        if (*simulate) {
            apply_config(simulate, sim_cfg.config_path);
            return run_simulate(sim_cfg);
        }
        if (*classify) {
            apply_config(classify, cls_cfg.config_path);
            return run_classify(cls_cfg, cls_x, cls_n);
        }
        if (*retmap) {
            apply_config(retmap, rm_cfg.config_path);
            return run_return_map(rm_cfg, rm_base);
        }
        if (*pseudo) {
            apply_config(pseudo, pe_cfg.config_path);
            return run_pseudo_eq(pe_cfg, pe_order, pe_seeds, pe_n);
        }
        if (*verify) return run_verify(verify_seed);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
