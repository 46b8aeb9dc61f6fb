#pragma once

// Pull-back experiments: approach to the random periodic solution from
// progressively earlier start times, two-trajectory contraction statistics,
// and the Wiener-shift periodicity gap.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rps/scheme.hpp"

namespace rps {

// One admissibility check up front (warn or strict per config), then an
// Off-policy copy for the inner integration loops.
SchemeConfig check_admissibility_once(const SdeModel& model, SchemeConfig config);

struct PullbackResult {
    int k_used = 0;              // periods pulled back when the loop stopped
    bool converged = false;
    double tolerance = 0.0;
    std::vector<double> window_times;                 // observation nodes [t_lo, t_hi]
    std::map<int, std::vector<Vec>> terminal_states;  // k -> states on the window
    std::vector<double> cauchy_gaps;                  // sup gap between depths k-1 and k
};

// Integrate from -k tau (k = 1..k_max) with the *same* noise realization --
// increments are keyed to absolute nodes of one grid anchored at -k_max tau --
// restarting from xi each time, and stop at the first consecutive-depth sup gap
// over the window at or below tol.  Non-convergence at k_max is a result state.
PullbackResult pullback_solve(const SdeModel& model, const SchemeConfig& config,
                              std::uint64_t seed, const Vec& xi, double t_lo,
                              double t_hi, int k_max, double tol);

struct GapSeries {
    std::vector<double> times;
    std::vector<double> gaps_sq;
};

// Monte Carlo statistics of the squared gap between two trajectories driven by
// the same noise from different initial values.
struct ContractionStats {
    std::vector<double> times;     // nodes t0 + j h
    std::vector<double> mean_sq;   // mean over streams of ||X_j - Y_j||^2
    std::vector<double> sem;       // standard error of mean_sq
    std::vector<double> diff_mean; // entry j: mean of per-stream sq[j+1]-sq[j]
    std::vector<double> diff_sem;
    std::vector<double> ratio;     // mean_sq[j+1] / mean_sq[j]
    std::vector<double> ratio_sem; // delta-method standard error
};

ContractionStats contraction_stats(const SdeModel& model, const SchemeConfig& config,
                                   std::uint64_t seed, int m_streams, const Vec& xi,
                                   const Vec& eta, double t0, double T);

// times + mean_sq of contraction_stats.
GapSeries contraction_gap(const SdeModel& model, const SchemeConfig& config,
                          std::uint64_t seed, int m_streams, const Vec& xi,
                          const Vec& eta, double t0, double T);

// Squared gap between the unshifted trajectory at t - Delta and the trajectory
// driven by the Wiener shift theta_{-Delta} at t, for comparison nodes
// t in [a + Delta, b + Delta], Delta = shift_periods * tau.  Both runs start
// from xi at t0; [a, b] is the observation window of the unshifted process.
GapSeries periodicity_gap(const SdeModel& model, const SchemeConfig& config,
                          std::uint64_t seed, const Vec& xi, double t0, double a,
                          double b, int shift_periods);

// sup over the comparison window of the (unsquared) gap norm.
double periodicity_check(const SdeModel& model, const SchemeConfig& config,
                         std::uint64_t seed, const Vec& xi, double t0, double a,
                         double b, int shift_periods);

// pullback.csv: "k,cauchy_gap" (depths 2..).
void write_pullback_csv(const PullbackResult& result, const std::string& file);
// gap.csv: "t,gap_sq".
void write_gap_csv(const GapSeries& series, const std::string& file);

}  // namespace rps
