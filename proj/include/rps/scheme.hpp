#pragma once

// One-step maps and path integration for the projected Euler and classical
// Euler-Maruyama schemes.

#include <cstdint>
#include <string>
#include <vector>

#include "rps/model.hpp"
#include "rps/wiener.hpp"

namespace rps {

enum class SchemeKind { ProjectedEuler, EulerMaruyama };

enum class Admissibility { Strict, Warn, Off };

SchemeKind scheme_kind_from_string(const std::string& s);
Admissibility admissibility_from_string(const std::string& s);

struct SchemeConfig {
    double h = 0.01;
    SchemeKind kind = SchemeKind::ProjectedEuler;
    Admissibility admissibility = Admissibility::Warn;

    void validate() const;
};

// Radial clamp onto the ball of radius h^(-1/(2 gamma)):
//   Phi(x) = min{1, h^(-1/(2 gamma)) / ||x||} x,  Phi(0) = 0.
// Inside the ball (boundary included) the input is returned unchanged, so the
// map is idempotent bit for bit; outside, the result is rescaled until its
// computed norm does not exceed the radius.
Vec project(const Vec& x, double h, double gamma);

// X' = Phi(X) + h A Phi(X) + h f(t mod tau, Phi(X)) + g(t mod tau, Phi(X)) dW,
// with A = diag(-lambda).
Vec pe_step(const SdeModel& model, double t, const Vec& x, double h, const Vec& dW);

// Same increment map without the projection.
Vec em_step(const SdeModel& model, double t, const Vec& x, double h, const Vec& dW);

struct Trajectory {
    double t0 = 0.0;
    double h = 0.0;
    std::vector<Vec> states;  // states[j] at t0 + j h
    std::string model_id;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    std::int64_t steps() const { return static_cast<std::int64_t>(states.size()) - 1; }
    double time_at(std::int64_t j) const { return t0 + static_cast<double>(j) * h; }
    const Vec& terminal() const { return states.back(); }
};

// Node of `grid` whose time is t (within 1e-9 * h_fine), else ConfigError.
std::int64_t node_on_grid(const GridSpec& grid, double t, const char* what);

// Drive `steps` steps of size config.h from t0, consuming path increments in
// blocks of config.h / h_fine (which must be an exact power of two).  Non-finite
// states raise BlowUpError with the offending node.
Trajectory integrate(const SdeModel& model, const SchemeConfig& config,
                     const BrownianPath& path, double t0, std::int64_t steps,
                     const Vec& xi);

// trajectory.csv: header "t,x_1,...,x_d", 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& file);

}  // namespace rps
