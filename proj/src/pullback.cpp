#include "rps/pullback.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "rps/csv.hpp"
#include "rps/parallel.hpp"

namespace rps {

namespace {

int ceil_log2(std::int64_t n) {
    int levels = 0;
    while ((std::int64_t{1} << levels) < n) ++levels;
    return levels;
}

// t must sit (within 1e-9 h) on the lattice origin + j h; returns j.
std::int64_t lattice_index(double t, double origin, double h, const char* what) {
    const std::int64_t j = std::llround((t - origin) / h);
    if (std::fabs((t - origin) - static_cast<double>(j) * h) > 1e-9 * h)
        throw ConfigError(std::string(what) + " must be a whole number of steps from " +
                          std::to_string(origin));
    return j;
}

GridSpec grid_for(double t0, double h, std::int64_t steps) {
    GridSpec g;
    g.t0 = t0;
    g.levels = ceil_log2(std::max<std::int64_t>(steps, 1));
    g.span = std::ldexp(h, g.levels);  // exact: h * 2^levels
    return g;
}

}  // namespace

SchemeConfig check_admissibility_once(const SdeModel& model, SchemeConfig config) {
    config.validate();
    if (config.admissibility != Admissibility::Off) {
        const double bound = admissible_step_default(model);
        if (config.h > bound) {
            if (config.admissibility == Admissibility::Strict)
                throw ConfigError("h=" + std::to_string(config.h) +
                                  " exceeds the admissible bound " + std::to_string(bound));
            std::cerr << "warning: h=" << config.h << " exceeds the admissible step bound "
                      << bound << " for model '" << model.id << "'\n";
        }
    }
    config.admissibility = Admissibility::Off;
    return config;
}

PullbackResult pullback_solve(const SdeModel& model, const SchemeConfig& config,
                              std::uint64_t seed, const Vec& xi, double t_lo,
                              double t_hi, int k_max, double tol) {
    model.validate();
    const SchemeConfig cfg = check_admissibility_once(model, config);
    if (k_max < 1) throw ConfigError("pullback: k_max must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("pullback: tol must be > 0");
    if (!(t_hi >= t_lo)) throw ConfigError("pullback: window must satisfy t_lo <= t_hi");
    if (t_lo < -model.period)
        throw ConfigError("pullback: the window must be covered by the k=1 run (t_lo >= -tau)");

    const double h = cfg.h;
    const std::int64_t per_period = lattice_index(model.period, 0.0, h, "pullback: tau");
    if (per_period < 1) throw ConfigError("pullback: tau must be at least one step");

    const double anchor = -static_cast<double>(k_max) * model.period;
    const std::int64_t n_lo = lattice_index(t_lo, anchor, h, "pullback: t_lo");
    const std::int64_t n_hi = lattice_index(t_hi, anchor, h, "pullback: t_hi");

    const GridSpec grid = grid_for(anchor, h, n_hi);
    const BrownianPath path = BrownianPath::generate(grid, model.noise_dim, seed, 0);

    PullbackResult res;
    res.tolerance = tol;
    for (std::int64_t j = n_lo; j <= n_hi; ++j) res.window_times.push_back(grid.time_at(j));

    const std::vector<Vec>* prev = nullptr;
    for (int k = 1; k <= k_max; ++k) {
        const std::int64_t start = static_cast<std::int64_t>(k_max - k) * per_period;
        const double t0 = -static_cast<double>(k) * model.period;
        const Trajectory traj = integrate(model, cfg, path, t0, n_hi - start, xi);

        std::vector<Vec> window;
        window.reserve(static_cast<std::size_t>(n_hi - n_lo) + 1);
        for (std::int64_t j = n_lo; j <= n_hi; ++j)
            window.push_back(traj.states[static_cast<std::size_t>(j - start)]);

        res.k_used = k;
        if (prev) {
            double gap = 0.0;
            for (std::size_t j = 0; j < window.size(); ++j)
                gap = std::max(gap, (window[j] - (*prev)[j]).norm());
            res.cauchy_gaps.push_back(gap);
            if (gap <= tol) {
                res.terminal_states.emplace(k, std::move(window));
                res.converged = true;
                break;
            }
        }
        prev = &res.terminal_states.emplace(k, std::move(window)).first->second;
    }
    return res;
}

ContractionStats contraction_stats(const SdeModel& model, const SchemeConfig& config,
                                   std::uint64_t seed, int m_streams, const Vec& xi,
                                   const Vec& eta, double t0, double T) {
    model.validate();
    const SchemeConfig cfg = check_admissibility_once(model, config);
    if (m_streams < 1) throw ConfigError("contraction: m_streams must be >= 1");
    const std::int64_t steps = lattice_index(T, t0, cfg.h, "contraction: T - t0");
    if (steps < 1) throw ConfigError("contraction: need at least one step");

    const GridSpec grid = grid_for(t0, cfg.h, steps);
    const std::size_t nodes = static_cast<std::size_t>(steps) + 1;

    // Row s holds the squared gaps of stream s; reduced in stream order below.
    Eigen::MatrixXd sq(m_streams, nodes);
    parallel_streams(m_streams, [&](std::int64_t s) {
        try {
            const BrownianPath path =
                BrownianPath::generate(grid, model.noise_dim, seed, static_cast<std::uint64_t>(s));
            const Trajectory a = integrate(model, cfg, path, t0, steps, xi);
            const Trajectory b = integrate(model, cfg, path, t0, steps, eta);
            for (std::size_t j = 0; j < nodes; ++j)
                sq(s, static_cast<Eigen::Index>(j)) = (a.states[j] - b.states[j]).squaredNorm();
        } catch (const BlowUpError& e) {
            throw e.with_stream(s);
        }
    });

    const double m = static_cast<double>(m_streams);
    ContractionStats st;
    st.times.reserve(nodes);
    for (std::size_t j = 0; j < nodes; ++j) st.times.push_back(grid.time_at(static_cast<std::int64_t>(j)));

    st.mean_sq.resize(nodes);
    st.sem.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const auto col = sq.col(static_cast<Eigen::Index>(j));
        const double mean = col.sum() / m;
        st.mean_sq[j] = mean;
        double var = 0.0;
        if (m_streams > 1) {
            var = (col.array() - mean).square().sum() / (m - 1.0);
        }
        st.sem[j] = std::sqrt(var / m);
    }

    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const auto a = sq.col(static_cast<Eigen::Index>(j + 1));
        const auto b = sq.col(static_cast<Eigen::Index>(j));
        const double dmean = (a - b).sum() / m;
        double dvar = 0.0;
        if (m_streams > 1) dvar = ((a - b).array() - dmean).square().sum() / (m - 1.0);
        st.diff_mean.push_back(dmean);
        st.diff_sem.push_back(std::sqrt(dvar / m));

        const double mb = st.mean_sq[j];
        if (mb > 0.0) {
            const double r = st.mean_sq[j + 1] / mb;
            double rvar = 0.0;
            if (m_streams > 1) rvar = (a.array() - r * b.array()).square().sum() / (m - 1.0);
            st.ratio.push_back(r);
            st.ratio_sem.push_back(std::sqrt(rvar / m) / mb);
        } else {
            st.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
            st.ratio_sem.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return st;
}

GapSeries contraction_gap(const SdeModel& model, const SchemeConfig& config,
                          std::uint64_t seed, int m_streams, const Vec& xi,
                          const Vec& eta, double t0, double T) {
    ContractionStats st = contraction_stats(model, config, seed, m_streams, xi, eta, t0, T);
    return {std::move(st.times), std::move(st.mean_sq)};
}

GapSeries periodicity_gap(const SdeModel& model, const SchemeConfig& config,
                          std::uint64_t seed, const Vec& xi, double t0, double a,
                          double b, int shift_periods) {
    model.validate();
    const SchemeConfig cfg = check_admissibility_once(model, config);
    if (shift_periods < 0) throw ConfigError("periodicity: shift_periods must be >= 0");
    if (!(a >= t0)) throw ConfigError("periodicity: window start must be >= t0");
    if (!(b >= a)) throw ConfigError("periodicity: window must satisfy a <= b");

    const double h = cfg.h;
    const std::int64_t per_period = lattice_index(model.period, 0.0, h, "periodicity: tau");
    const std::int64_t na = lattice_index(a, t0, h, "periodicity: a");
    const std::int64_t nb = lattice_index(b, t0, h, "periodicity: b");
    const std::int64_t delta = static_cast<std::int64_t>(shift_periods) * per_period;

    const GridSpec grid = grid_for(t0, h, nb + delta);
    const BrownianPath omega = BrownianPath::generate(grid, model.noise_dim, seed, 0);

    const Trajectory plain = integrate(model, cfg, omega, t0, nb, xi);
    const BrownianPath shifted = shift(omega, -delta);
    const Trajectory moved = integrate(model, cfg, shifted, t0, nb + delta, xi);

    GapSeries series;
    for (std::int64_t j = na; j <= nb; ++j) {
        series.times.push_back(grid.time_at(j + delta));
        series.gaps_sq.push_back(
            (plain.states[static_cast<std::size_t>(j)] -
             moved.states[static_cast<std::size_t>(j + delta)]).squaredNorm());
    }
    return series;
}

double periodicity_check(const SdeModel& model, const SchemeConfig& config,
                         std::uint64_t seed, const Vec& xi, double t0, double a,
                         double b, int shift_periods) {
    const GapSeries series = periodicity_gap(model, config, seed, xi, t0, a, b, shift_periods);
    double worst = 0.0;
    for (double g : series.gaps_sq) worst = std::max(worst, g);
    return std::sqrt(worst);
}

void write_pullback_csv(const PullbackResult& result, const std::string& file) {
    auto out = open_csv(file);
    out << "k,cauchy_gap\n";
    for (std::size_t i = 0; i < result.cauchy_gaps.size(); ++i)
        out << (i + 2) << ',' << g17(result.cauchy_gaps[i]) << '\n';
}

void write_gap_csv(const GapSeries& series, const std::string& file) {
    auto out = open_csv(file);
    out << "t,gap_sq\n";
    for (std::size_t i = 0; i < series.times.size(); ++i)
        out << g17(series.times[i]) << ',' << g17(series.gaps_sq[i]) << '\n';
}

}  // namespace rps
