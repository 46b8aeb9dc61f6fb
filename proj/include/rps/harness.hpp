#pragma once

// Strong-convergence measurement against a fine-step reference on coupled
// noise, power-law rate fitting, and second-moment monitoring.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rps/pullback.hpp"
#include "rps/scheme.hpp"

namespace rps {

struct ConvergencePoint {
    double h = 0.0;
    double mse = 0.0;  // mean over streams of the squared terminal gap
    double sem = 0.0;  // sample standard deviation of the squared gaps / sqrt(M)
};

struct RateFit {
    double kappa = 0.0;    // least-squares slope of log e against log h
    double log_c = 0.0;    // intercept
    double residual = 0.0; // Euclidean norm of the log-space residual vector
};

// Ordinary least squares on (log h, log e).  Requires >= 2 points, positive
// coordinates, and at least two distinct h.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;  // sorted by h ascending
    double kappa = 0.0;     // fitted on (h, sqrt(mse)), i.e. on RMS errors
    double log_c = 0.0;
    double residual = 0.0;
    int m_paths = 0;
    double ref_h = 0.0;
};

// For every stream: one fine path on [t0, T] at span/2^ref_levels, a projected
// Euler reference on it, and one projected Euler run per test exponent i at
// h = span 2^-i on the coarsened same path.  Records squared terminal-time
// gaps; the rate is fitted on RMS errors (skipped if some error vanishes).
ConvergenceReport mse_convergence(const SdeModel& model, double t0, double T,
                                  int ref_levels, const std::vector<int>& test_exponents,
                                  int m_paths, std::uint64_t seed, const Vec& xi);

struct MomentTrace {
    std::vector<double> times;
    std::vector<double> mean_sq;  // MC mean of ||X_j||^2
    double max_over_run = 0.0;
};

// Monte Carlo second moments along the trajectory; blow-ups propagate with the
// stream id attached.
MomentTrace moment_monitor(const SdeModel& model, const SchemeConfig& config,
                           double t0, std::int64_t steps, int m_paths,
                           std::uint64_t seed, const Vec& xi);

// convergence.csv: "h,mse,sem".
void write_convergence_csv(const ConvergenceReport& report, const std::string& file);
// moments.csv: "t,mean_sq".
void write_moments_csv(const MomentTrace& trace, const std::string& file);

}  // namespace rps
