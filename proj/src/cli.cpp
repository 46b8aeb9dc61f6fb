#include "rps/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rps/csv.hpp"
#include "rps/harness.hpp"
#include "rps/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rps {

namespace {

json load_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file '" + file + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + file + "': " + e.what());
    }
}

// Flag beats config section beats default.
template <class T>
T pick(const CLI::Option* opt, const T& flag_val, const json& section, const char* key,
       const T& dflt) {
    if (opt != nullptr && opt->count() > 0) return flag_val;
    if (section.is_object() && section.contains(key)) {
        try {
            return section.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
    return dflt;
}

Vec vec_from_values(const std::vector<double>& vals, int dim, const char* what) {
    if (vals.size() == 1) return Vec::Constant(dim, vals[0]);
    if (static_cast<int>(vals.size()) != dim)
        throw ConfigError(std::string(what) + " must have 1 or dim entries");
    return Eigen::Map<const Vec>(vals.data(), dim);
}

Vec parse_vec(const std::string& s, int dim, const char* what) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": cannot parse '" + tok + "' as a number");
        }
    }
    if (vals.empty()) throw ConfigError(std::string(what) + ": empty vector");
    return vec_from_values(vals, dim, what);
}

Vec resolve_vec(const CLI::Option* opt, const std::string& flag_val, const json& section,
                const char* key, double dflt, int dim, const char* what) {
    if (opt != nullptr && opt->count() > 0) return parse_vec(flag_val, dim, what);
    if (section.is_object() && section.contains(key)) {
        const json& v = section.at(key);
        try {
            if (v.is_number()) return Vec::Constant(dim, v.get<double>());
            return vec_from_values(v.get<std::vector<double>>(), dim, what);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
    return Vec::Constant(dim, dflt);
}

// Model-dependent experiment defaults so the preset studies run out of the box.
struct Defaults {
    double h = 0.01;
    double sim_t0 = 0.0;
    std::int64_t sim_steps = 1000;
    double sim_xi = 0.5;
    double pb_lo = -1.0, pb_hi = 0.0, pb_tol = 1e-3, pb_xi = 0.5;
    int pb_kmax = 20;
    double con_t0 = -10.0, con_T = 0.0, con_xi = 0.8, con_eta = -0.5;
    int con_paths = 100;
    double per_t0 = -10.0, per_a = 2.0, per_b = 6.0, per_xi = 0.3;
    int per_shift = 1;
    double cv_t0 = -10.0, cv_T = 10.0, cv_xi = 0.8;
    int cv_ref = 14, cv_paths = 200;
    std::vector<int> cv_expo = {8, 9, 10, 11};
    double mo_t0 = 0.0, mo_xi = 0.5;
    std::int64_t mo_steps = 10000;
    int mo_paths = 100;
};

Defaults defaults_for(const SdeModel& m) {
    Defaults d;
    if (m.id == "example2-additive") {
        d.sim_t0 = -5.0;
        d.con_t0 = -5.0;
        d.con_T = 5.0;
        d.per_t0 = -5.0;
        d.per_a = 10.0;
        d.per_b = 13.0;
        d.per_xi = 0.5;
        d.cv_t0 = -5.0;
        d.cv_T = 15.0;
        d.cv_xi = 0.5;
    }
    return d;
}

int ceil_log2_steps(std::int64_t steps) {
    int levels = 0;
    while ((std::int64_t{1} << levels) < steps) ++levels;
    return levels;
}

BrownianPath path_for_run(const SdeModel& model, double h, double t0, std::int64_t steps,
                          std::uint64_t seed, std::uint64_t stream) {
    GridSpec grid;
    grid.t0 = t0;
    grid.levels = ceil_log2_steps(std::max<std::int64_t>(steps, 1));
    grid.span = std::ldexp(h, grid.levels);
    return BrownianPath::generate(grid, model.noise_dim, seed, stream);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Projected Euler toolkit: random periodic solutions of semi-linear SDEs "
                 "with superlinearly growing, time-periodic coefficients"};
    app.require_subcommand(1);
    app.fallthrough();
    // --h is the step size, so the help flag keeps only its long form.
    app.set_help_flag("--help", "print this help message and exit");

    std::string config_file, preset, model_file, out_dir, scheme_name, admiss_name;
    double h_val = 0.0;
    std::uint64_t seed_val = 0;
    bool svg_flag = false;
    auto* opt_config = app.add_option("--config", config_file, "JSON configuration file");
    auto* opt_preset = app.add_option("--preset", preset, "built-in model name");
    auto* opt_model = app.add_option("--model-json", model_file, "JSON file with an inline model");
    auto* opt_h = app.add_option("--h", h_val, "step size");
    auto* opt_scheme = app.add_option("--scheme", scheme_name, "projected-euler | euler-maruyama");
    auto* opt_admiss =
        app.add_option("--admissibility", admiss_name, "step-size policy: strict | warn | off");
    auto* opt_seed = app.add_option("--seed", seed_val, "base RNG seed");
    auto* opt_out = app.add_option("--out", out_dir, "output directory");
    app.add_flag("--svg", svg_flag, "also write SVG charts");

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory and write trajectory.csv");
    double sim_t0 = 0.0;
    std::int64_t sim_steps = 0;
    std::uint64_t sim_stream = 0;
    std::string sim_xi;
    auto* sim_opt_t0 = sim->add_option("--t0", sim_t0, "start time");
    auto* sim_opt_steps = sim->add_option("--steps", sim_steps, "number of steps");
    auto* sim_opt_stream = sim->add_option("--stream", sim_stream, "noise stream id");
    auto* sim_opt_xi = sim->add_option("--xi", sim_xi, "initial value (comma-separated)");

    // pullback
    auto* pb = app.add_subcommand("pullback",
                                  "pull back from -k tau until the window gap meets tol");
    double pb_lo = 0.0, pb_hi = 0.0, pb_tol = 0.0;
    int pb_kmax = 0;
    bool pb_strict = false;
    std::string pb_xi;
    auto* pb_opt_lo = pb->add_option("--t-lo", pb_lo, "window start");
    auto* pb_opt_hi = pb->add_option("--t-hi", pb_hi, "window end");
    auto* pb_opt_kmax = pb->add_option("--k-max", pb_kmax, "maximum pull-back depth");
    auto* pb_opt_tol = pb->add_option("--tol", pb_tol, "Cauchy gap tolerance");
    auto* pb_opt_xi = pb->add_option("--xi", pb_xi, "initial value");
    pb->add_flag("--strict", pb_strict, "exit 4 when not converged at k-max");

    // contract
    auto* con = app.add_subcommand("contract",
                                   "mean-square gap of two initial values on shared noise");
    double con_t0 = 0.0, con_T = 0.0;
    int con_paths = 0;
    std::string con_xi, con_eta;
    auto* con_opt_t0 = con->add_option("--t0", con_t0, "start time");
    auto* con_opt_T = con->add_option("--T", con_T, "end time");
    auto* con_opt_paths = con->add_option("--paths", con_paths, "Monte Carlo streams");
    auto* con_opt_xi = con->add_option("--xi", con_xi, "first initial value");
    auto* con_opt_eta = con->add_option("--eta", con_eta, "second initial value");

    // periodicity
    auto* per = app.add_subcommand("periodicity",
                                   "gap between the path and its Wiener-shifted copy");
    double per_t0 = 0.0, per_a = 0.0, per_b = 0.0;
    int per_shift = 0;
    std::string per_xi;
    auto* per_opt_t0 = per->add_option("--t0", per_t0, "start time");
    auto* per_opt_a = per->add_option("--window-a", per_a, "observation window start");
    auto* per_opt_b = per->add_option("--window-b", per_b, "observation window end");
    auto* per_opt_shift = per->add_option("--shift-periods", per_shift, "periods to shift by");
    auto* per_opt_xi = per->add_option("--xi", per_xi, "initial value");

    // converge
    auto* cv = app.add_subcommand("converge", "coupled-path strong convergence study");
    double cv_t0 = 0.0, cv_T = 0.0;
    int cv_ref = 0, cv_paths = 0;
    std::vector<int> cv_expo;
    std::string cv_xi;
    auto* cv_opt_t0 = cv->add_option("--t0", cv_t0, "start time");
    auto* cv_opt_T = cv->add_option("--T", cv_T, "terminal time");
    auto* cv_opt_ref = cv->add_option("--ref-levels", cv_ref, "reference dyadic level");
    auto* cv_opt_expo =
        cv->add_option("--test-exponents", cv_expo, "dyadic exponents i, h = span/2^i")
            ->delimiter(',');
    auto* cv_opt_paths = cv->add_option("--paths", cv_paths, "Monte Carlo streams");
    auto* cv_opt_xi = cv->add_option("--xi", cv_xi, "initial value");

    // moments
    auto* mo = app.add_subcommand("moments", "Monte Carlo second moments along the run");
    double mo_t0 = 0.0;
    std::int64_t mo_steps = 0;
    int mo_paths = 0;
    std::string mo_xi;
    auto* mo_opt_t0 = mo->add_option("--t0", mo_t0, "start time");
    auto* mo_opt_steps = mo->add_option("--steps", mo_steps, "number of steps");
    auto* mo_opt_paths = mo->add_option("--paths", mo_paths, "Monte Carlo streams");
    auto* mo_opt_xi = mo->add_option("--xi", mo_xi, "initial value");

    // check-model
    auto* ck = app.add_subcommand("check-model",
                                  "validate invariants and report derived constants");
    double ck_eps = 0.0, ck_p2 = 0.0, ck_radius = 2.0;
    int ck_samples = 10000;
    auto* ck_opt_eps = ck->add_option("--epsilon", ck_eps, "coercivity epsilon");
    auto* ck_opt_p2 = ck->add_option("--p2", ck_p2, "secondary moment exponent");
    ck->add_option("--radius", ck_radius, "probe ball radius");
    ck->add_option("--samples", ck_samples, "probe sample count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        json cfg = config_file.empty() ? json::object() : load_json_file(config_file);
        if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
        const json exp = cfg.value("experiment", json::object());
        const json sch = cfg.value("scheme", json::object());

        SdeModel model;
        if (opt_preset->count() > 0)
            model = preset_model(preset);
        else if (opt_model->count() > 0)
            model = model_from_json(load_json_file(model_file));
        else if (cfg.contains("model"))
            model = model_from_json(cfg.at("model"));
        else
            throw ConfigError("no model given (use --preset, --model-json, or config \"model\")");
        model.validate();

        const Defaults dd = defaults_for(model);

        SchemeConfig scheme;
        scheme.h = pick(opt_h, h_val, sch, "h", dd.h);
        scheme.kind = scheme_kind_from_string(
            pick(opt_scheme, scheme_name, sch, "kind", std::string("projected-euler")));
        scheme.admissibility = admissibility_from_string(
            pick(opt_admiss, admiss_name, sch, "admissibility", std::string("warn")));
        scheme.validate();

        const std::uint64_t seed = pick(opt_seed, seed_val, cfg, "seed", std::uint64_t{0});
        const std::string out = pick(opt_out, out_dir, cfg, "out", std::string("."));
        const bool svg = svg_flag || cfg.value("svg", false);
        fs::create_directories(out);
        auto out_path = [&out](const char* name) { return (fs::path(out) / name).string(); };

        if (*sim) {
            const double t0 = pick(sim_opt_t0, sim_t0, exp, "t0", dd.sim_t0);
            const std::int64_t steps = pick(sim_opt_steps, sim_steps, exp, "steps", dd.sim_steps);
            const std::uint64_t stream =
                pick(sim_opt_stream, sim_stream, exp, "stream", std::uint64_t{0});
            const Vec xi = resolve_vec(sim_opt_xi, sim_xi, exp, "xi", dd.sim_xi, model.dim, "xi");
            if (steps < 1) throw ConfigError("simulate: steps must be >= 1");
            const BrownianPath path = path_for_run(model, scheme.h, t0, steps, seed, stream);
            const Trajectory traj = integrate(model, scheme, path, t0, steps, xi);
            write_trajectory_csv(traj, out_path("trajectory.csv"));
            if (svg) {
                SvgSeries s{"x_1", {}};
                for (std::int64_t j = 0; j <= traj.steps(); ++j)
                    s.points.emplace_back(traj.time_at(j), traj.states[j](0));
                write_line_svg(out_path("trajectory.svg"), "trajectory (" + model.id + ")", "t",
                               "x", {s}, false, false);
            }
            std::cout << "simulate: " << steps << " steps of h=" << scheme.h << ", terminal x_1="
                      << g17(traj.terminal()(0)) << ", wrote trajectory.csv\n";
            return 0;
        }

        if (*pb) {
            const double lo = pick(pb_opt_lo, pb_lo, exp, "t_lo", dd.pb_lo);
            const double hi = pick(pb_opt_hi, pb_hi, exp, "t_hi", dd.pb_hi);
            const int kmax = pick(pb_opt_kmax, pb_kmax, exp, "k_max", dd.pb_kmax);
            const double tol = pick(pb_opt_tol, pb_tol, exp, "tol", dd.pb_tol);
            const bool strict = pb_strict || exp.value("strict", false);
            const Vec xi = resolve_vec(pb_opt_xi, pb_xi, exp, "xi", dd.pb_xi, model.dim, "xi");
            const PullbackResult res =
                pullback_solve(model, scheme, seed, xi, lo, hi, kmax, tol);
            write_pullback_csv(res, out_path("pullback.csv"));
            std::cout << "pullback: converged=" << (res.converged ? "yes" : "no")
                      << " k_used=" << res.k_used
                      << (res.cauchy_gaps.empty()
                              ? std::string()
                              : " last_gap=" + g17(res.cauchy_gaps.back()))
                      << " tol=" << g17(res.tolerance) << ", wrote pullback.csv\n";
            if (!res.converged && strict) return 4;
            return 0;
        }

        if (*con) {
            const double t0 = pick(con_opt_t0, con_t0, exp, "t0", dd.con_t0);
            const double T = pick(con_opt_T, con_T, exp, "T", dd.con_T);
            const int paths = pick(con_opt_paths, con_paths, exp, "paths", dd.con_paths);
            const Vec xi = resolve_vec(con_opt_xi, con_xi, exp, "xi", dd.con_xi, model.dim, "xi");
            const Vec eta =
                resolve_vec(con_opt_eta, con_eta, exp, "eta", dd.con_eta, model.dim, "eta");
            const GapSeries series = contraction_gap(model, scheme, seed, paths, xi, eta, t0, T);
            write_gap_csv(series, out_path("gap.csv"));
            if (svg) {
                SvgSeries s{"mean squared gap", {}};
                for (std::size_t j = 0; j < series.times.size(); ++j)
                    s.points.emplace_back(series.times[j], series.gaps_sq[j]);
                write_line_svg(out_path("gap.svg"), "contraction (" + model.id + ")", "t",
                               "E||X-Y||^2", {s}, false, true);
            }
            std::cout << "contract: M=" << paths << " terminal mean_sq_gap="
                      << g17(series.gaps_sq.back()) << ", wrote gap.csv\n";
            return 0;
        }

        if (*per) {
            const double t0 = pick(per_opt_t0, per_t0, exp, "t0", dd.per_t0);
            const double a = pick(per_opt_a, per_a, exp, "a", dd.per_a);
            const double b = pick(per_opt_b, per_b, exp, "b", dd.per_b);
            const int shift_periods =
                pick(per_opt_shift, per_shift, exp, "shift_periods", dd.per_shift);
            const Vec xi = resolve_vec(per_opt_xi, per_xi, exp, "xi", dd.per_xi, model.dim, "xi");
            const GapSeries series =
                periodicity_gap(model, scheme, seed, xi, t0, a, b, shift_periods);
            double sup_sq = 0.0;
            for (double g : series.gaps_sq) sup_sq = std::max(sup_sq, g);
            write_gap_csv(series, out_path("gap.csv"));
            if (svg) {
                SvgSeries s{"squared gap", {}};
                for (std::size_t j = 0; j < series.times.size(); ++j)
                    s.points.emplace_back(series.times[j], series.gaps_sq[j]);
                write_line_svg(out_path("gap.svg"), "periodicity (" + model.id + ")", "t",
                               "gap^2", {s}, false, false);
            }
            std::cout << "periodicity: shift=" << shift_periods << " periods, sup gap = "
                      << g17(std::sqrt(sup_sq)) << ", wrote gap.csv\n";
            return 0;
        }

        if (*cv) {
            const double t0 = pick(cv_opt_t0, cv_t0, exp, "t0", dd.cv_t0);
            const double T = pick(cv_opt_T, cv_T, exp, "T", dd.cv_T);
            const int ref = pick(cv_opt_ref, cv_ref, exp, "ref_levels", dd.cv_ref);
            const std::vector<int> expo =
                pick(cv_opt_expo, cv_expo, exp, "test_exponents", dd.cv_expo);
            const int paths = pick(cv_opt_paths, cv_paths, exp, "paths", dd.cv_paths);
            const Vec xi = resolve_vec(cv_opt_xi, cv_xi, exp, "xi", dd.cv_xi, model.dim, "xi");
            const ConvergenceReport report =
                mse_convergence(model, t0, T, ref, expo, paths, seed, xi);
            write_convergence_csv(report, out_path("convergence.csv"));
            {
                auto out_rate = open_csv(out_path("rate.txt"));
                out_rate << "kappa " << g17(report.kappa) << "\nlog_c " << g17(report.log_c)
                         << "\nresidual " << g17(report.residual) << '\n';
            }
            if (svg) {
                SvgSeries pts{"rms error", {}};
                SvgSeries fitline{"fit", {}};
                for (const auto& p : report.points) {
                    pts.points.emplace_back(p.h, std::sqrt(p.mse));
                    fitline.points.emplace_back(
                        p.h, std::exp(report.log_c + report.kappa * std::log(p.h)));
                }
                write_line_svg(out_path("convergence.svg"), "strong convergence (" + model.id + ")",
                               "h", "rms terminal error", {pts, fitline}, true, true);
            }
            std::cout << "converge: kappa=" << g17(report.kappa)
                      << " residual=" << g17(report.residual) << " M=" << report.m_paths
                      << " ref_h=" << g17(report.ref_h)
                      << ", wrote convergence.csv and rate.txt\n";
            return 0;
        }

        if (*mo) {
            const double t0 = pick(mo_opt_t0, mo_t0, exp, "t0", dd.mo_t0);
            const std::int64_t steps = pick(mo_opt_steps, mo_steps, exp, "steps", dd.mo_steps);
            const int paths = pick(mo_opt_paths, mo_paths, exp, "paths", dd.mo_paths);
            const Vec xi = resolve_vec(mo_opt_xi, mo_xi, exp, "xi", dd.mo_xi, model.dim, "xi");
            const MomentTrace trace =
                moment_monitor(model, scheme, t0, steps, paths, seed, xi);
            write_moments_csv(trace, out_path("moments.csv"));
            if (svg) {
                SvgSeries s{"E||X||^2", {}};
                for (std::size_t j = 0; j < trace.times.size(); ++j)
                    s.points.emplace_back(trace.times[j], trace.mean_sq[j]);
                write_line_svg(out_path("moments.svg"), "second moments (" + model.id + ")", "t",
                               "E||X||^2", {s}, false, false);
            }
            std::cout << "moments: M=" << paths << " max mean_sq=" << g17(trace.max_over_run)
                      << ", wrote moments.csv\n";
            return 0;
        }

        if (*ck) {
            const double gap = model.lambda_min() - model.alpha1;
            const double eps = pick(ck_opt_eps, ck_eps, exp, "epsilon", gap / 2.0);
            const double p2 = pick(ck_opt_p2, ck_p2, exp, "p2", (1.0 + model.p1) / 2.0);
            const SchemeConstants c = scheme_constants(model, eps, p2);
            const double agap = model.lambda_min() - model.one_sided_constant();
            const double bound = admissible_step_bound(model, c, agap / 2.0, 1.0);
            const double probe = probe_monotonicity(model, ck_radius, ck_samples, seed);

            // Sampled periodicity of the coefficients: exact zero expected.  Times
            // are drawn on a fine lattice so t + tau is exactly representable.
            std::mt19937_64 eng(seed);
            double worst_dev = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const double u = static_cast<double>(eng() >> 11) * 0x1p-53;
                const double t =
                    std::ldexp(std::nearbyint(std::ldexp(u * 2.0 * model.period, 20)), -20);
                Vec x(model.dim);
                for (int k = 0; k < model.dim; ++k)
                    x(k) = 4.0 * (static_cast<double>(eng() >> 11) * 0x1p-53) - 2.0;
                worst_dev = std::max(worst_dev,
                                     (model.drift(t + model.period, x) - model.drift(t, x)).norm());
                worst_dev = std::max(
                    worst_dev,
                    (model.diffusion(t + model.period, x) - model.diffusion(t, x)).norm());
            }

            std::cout << "model '" << model.id << "': invariants ok\n"
                      << "  dim=" << model.dim << " noise_dim=" << model.noise_dim
                      << " period=" << g17(model.period) << " gamma=" << model.gamma
                      << " p1=" << model.p1 << (model.additive ? " (additive)" : "") << '\n'
                      << "  lambda_min=" << g17(model.lambda_min())
                      << " lambda_max=" << g17(model.lambda_max())
                      << " one_sided_constant=" << g17(model.one_sided_constant()) << '\n'
                      << "  L1=" << g17(c.l1) << " L2=" << g17(c.l2) << " alpha2=" << g17(c.alpha2)
                      << " c0=" << g17(c.c0) << " (epsilon=" << g17(c.epsilon)
                      << ", p2=" << g17(c.p2) << ")\n"
                      << "  admissible step bound (default deltas): " << g17(bound) << '\n'
                      << "  monotonicity probe (radius " << ck_radius << ", " << ck_samples
                      << " samples): " << g17(probe)
                      << (probe > model.alpha1 + 1e-9
                              ? "  [exceeds alpha1: coupled one-sided condition not satisfied "
                                "in this ball]"
                              : "  [within alpha1]")
                      << '\n'
                      << "  periodic-coefficient deviation over 1000 samples: " << g17(worst_dev)
                      << '\n';
            return 0;
        }

        throw ConfigError("no subcommand dispatched");  // unreachable with require_subcommand
    } catch (const BlowUpError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("rps");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rps
