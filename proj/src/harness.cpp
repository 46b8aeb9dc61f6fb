#include "rps/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "rps/csv.hpp"
#include "rps/parallel.hpp"

namespace rps {

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    const std::size_t n = points.size();
    if (n < 2) throw ConfigError("fit_rate: need at least two points");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
            throw ConfigError("fit_rate: coordinates must be positive");
        lx[i] = std::log(points[i].first);
        ly[i] = std::log(points[i].second);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_rate: need at least two distinct step sizes");

    RateFit fit;
    fit.kappa = sxy / sxx;
    fit.log_c = my - fit.kappa * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.log_c + fit.kappa * lx[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss);
    return fit;
}

ConvergenceReport mse_convergence(const SdeModel& model, double t0, double T,
                                  int ref_levels, const std::vector<int>& test_exponents,
                                  int m_paths, std::uint64_t seed, const Vec& xi) {
    model.validate();
    if (!(T > t0)) throw ConfigError("mse_convergence: need T > t0");
    if (m_paths < 1) throw ConfigError("mse_convergence: m_paths must be >= 1");
    if (test_exponents.empty()) throw ConfigError("mse_convergence: no test exponents");

    GridSpec grid;
    grid.t0 = t0;
    grid.span = T - t0;
    grid.levels = ref_levels;
    grid.validate();
    const double h_ref = grid.h_fine();

    struct TestLevel {
        int exponent;
        double h;
        std::int64_t factor;
        std::int64_t steps;
    };
    std::vector<TestLevel> tests;
    for (int i : test_exponents) {
        if (i < 0 || i > ref_levels)
            throw ConfigError("mse_convergence: test exponents must lie in [0, ref_levels]");
        TestLevel tl;
        tl.exponent = i;
        tl.h = std::ldexp(grid.span, -i);
        tl.factor = std::int64_t{1} << (ref_levels - i);
        tl.steps = std::int64_t{1} << i;
        tests.push_back(tl);
    }

    // One admissibility warning per step size, not per stream.
    const double bound = admissible_step_default(model);
    for (const TestLevel& tl : tests)
        if (tl.h > bound)
            std::cerr << "warning: test step h=" << tl.h << " exceeds the admissible bound "
                      << bound << " for model '" << model.id << "'\n";

    SchemeConfig ref_cfg;
    ref_cfg.h = h_ref;
    ref_cfg.kind = SchemeKind::ProjectedEuler;
    ref_cfg.admissibility = Admissibility::Off;

    // sq_err(row = stream, col = test level)
    Eigen::MatrixXd sq_err(m_paths, tests.size());
    parallel_streams(m_paths, [&](std::int64_t s) {
        try {
            const BrownianPath path =
                BrownianPath::generate(grid, model.noise_dim, seed, static_cast<std::uint64_t>(s));
            const Trajectory ref = integrate(model, ref_cfg, path, t0, grid.step_count(), xi);
            for (std::size_t i = 0; i < tests.size(); ++i) {
                SchemeConfig cfg = ref_cfg;
                cfg.h = tests[i].h;
                const Trajectory test = integrate(model, cfg, path, t0, tests[i].steps, xi);
                sq_err(s, static_cast<Eigen::Index>(i)) =
                    (test.terminal() - ref.terminal()).squaredNorm();
            }
        } catch (const BlowUpError& e) {
            throw e.with_stream(s);
        }
    });

    ConvergenceReport report;
    report.m_paths = m_paths;
    report.ref_h = h_ref;
    const double m = static_cast<double>(m_paths);
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const auto col = sq_err.col(static_cast<Eigen::Index>(i));
        ConvergencePoint pt;
        pt.h = tests[i].h;
        pt.mse = col.sum() / m;
        double var = 0.0;
        if (m_paths > 1) var = (col.array() - pt.mse).square().sum() / (m - 1.0);
        pt.sem = std::sqrt(var / m);
        report.points.push_back(pt);
    }
    std::sort(report.points.begin(), report.points.end(),
              [](const ConvergencePoint& a, const ConvergencePoint& b) { return a.h < b.h; });

    bool fittable = report.points.size() >= 2;
    for (const ConvergencePoint& pt : report.points)
        if (!(pt.mse > 0.0)) fittable = false;
    if (fittable) {
        std::vector<std::pair<double, double>> pts;
        for (const ConvergencePoint& pt : report.points)
            pts.emplace_back(pt.h, std::sqrt(pt.mse));
        const RateFit fit = fit_rate(pts);
        report.kappa = fit.kappa;
        report.log_c = fit.log_c;
        report.residual = fit.residual;
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        report.kappa = report.log_c = report.residual = nan;
    }
    return report;
}

MomentTrace moment_monitor(const SdeModel& model, const SchemeConfig& config,
                           double t0, std::int64_t steps, int m_paths,
                           std::uint64_t seed, const Vec& xi) {
    model.validate();
    const SchemeConfig cfg = check_admissibility_once(model, config);
    if (m_paths < 1) throw ConfigError("moment_monitor: m_paths must be >= 1");
    if (steps < 1) throw ConfigError("moment_monitor: steps must be >= 1");

    GridSpec grid;
    grid.t0 = t0;
    grid.levels = 0;
    while (grid.step_count() < steps) ++grid.levels;
    grid.span = std::ldexp(cfg.h, grid.levels);
    grid.validate();

    const std::size_t nodes = static_cast<std::size_t>(steps) + 1;
    Eigen::MatrixXd sq(m_paths, nodes);
    parallel_streams(m_paths, [&](std::int64_t s) {
        try {
            const BrownianPath path =
                BrownianPath::generate(grid, model.noise_dim, seed, static_cast<std::uint64_t>(s));
            const Trajectory traj = integrate(model, cfg, path, t0, steps, xi);
            for (std::size_t j = 0; j < nodes; ++j)
                sq(s, static_cast<Eigen::Index>(j)) = traj.states[j].squaredNorm();
        } catch (const BlowUpError& e) {
            throw e.with_stream(s);
        }
    });

    MomentTrace trace;
    trace.times.reserve(nodes);
    trace.mean_sq.reserve(nodes);
    const double m = static_cast<double>(m_paths);
    for (std::size_t j = 0; j < nodes; ++j) {
        trace.times.push_back(t0 + static_cast<double>(j) * cfg.h);
        const double mean = sq.col(static_cast<Eigen::Index>(j)).sum() / m;
        trace.mean_sq.push_back(mean);
        trace.max_over_run = std::max(trace.max_over_run, mean);
    }
    return trace;
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& file) {
    auto out = open_csv(file);
    out << "h,mse,sem\n";
    for (const ConvergencePoint& pt : report.points)
        out << g17(pt.h) << ',' << g17(pt.mse) << ',' << g17(pt.sem) << '\n';
}

void write_moments_csv(const MomentTrace& trace, const std::string& file) {
    auto out = open_csv(file);
    out << "t,mean_sq\n";
    for (std::size_t j = 0; j < trace.times.size(); ++j)
        out << g17(trace.times[j]) << ',' << g17(trace.mean_sq[j]) << '\n';
}

}  // namespace rps
