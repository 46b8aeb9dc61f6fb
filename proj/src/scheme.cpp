#include "rps/scheme.hpp"

#include <cmath>
#include <iostream>

#include "rps/csv.hpp"

namespace rps {

SchemeKind scheme_kind_from_string(const std::string& s) {
    if (s == "projected-euler" || s == "pe") return SchemeKind::ProjectedEuler;
    if (s == "euler-maruyama" || s == "em") return SchemeKind::EulerMaruyama;
    throw ConfigError("unknown scheme '" + s + "' (valid: projected-euler, euler-maruyama)");
}

Admissibility admissibility_from_string(const std::string& s) {
    if (s == "strict") return Admissibility::Strict;
    if (s == "warn") return Admissibility::Warn;
    if (s == "off") return Admissibility::Off;
    throw ConfigError("unknown admissibility policy '" + s + "' (valid: strict, warn, off)");
}

void SchemeConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("scheme: h must be positive and finite");
    if (admissibility != Admissibility::Off && h > 1.0)
        throw ConfigError("scheme: h > 1 requires admissibility=off");
}

Vec project(const Vec& x, double h, double gamma) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("project: h must be positive and finite");
    if (!(gamma >= 1.0)) throw ConfigError("project: gamma must be >= 1");
    const double radius = std::pow(h, -1.0 / (2.0 * gamma));
    const double n = x.norm();
    if (!(n > radius)) return x;  // boundary counts as inside; keeps the map idempotent
    Vec y = (radius / n) * x;
    // Rounding can leave the computed norm a few ulps above the radius; pull it
    // back so that a second application is the identity.
    double ny = y.norm();
    for (int guard = 0; ny > radius && guard < 4; ++guard) {
        y *= radius / ny;
        ny = y.norm();
    }
    return y;
}

namespace {

Vec step_core(const SdeModel& model, double t, const Vec& y, double h, const Vec& dW) {
    const double tr = reduce_period(t, model.period);
    const Vec ay = (-(model.lambda.array() * y.array())).matrix();
    const Vec fx = model.drift(tr, y);
    const Vec gw = model.diffusion(tr, y) * dW;
    Vec out = y + h * ay + h * fx + gw;
    if (!out.allFinite()) throw BlowUpError(t, -1);
    return out;
}

}  // namespace

Vec pe_step(const SdeModel& model, double t, const Vec& x, double h, const Vec& dW) {
    return step_core(model, t, project(x, h, model.gamma), h, dW);
}

Vec em_step(const SdeModel& model, double t, const Vec& x, double h, const Vec& dW) {
    return step_core(model, t, x, h, dW);
}

std::int64_t node_on_grid(const GridSpec& grid, double t, const char* what) {
    const double hf = grid.h_fine();
    const double offset = (t - grid.t0) / hf;
    const std::int64_t idx = std::llround(offset);
    if (idx < 0 || idx > grid.step_count() ||
        std::fabs((t - grid.t0) - static_cast<double>(idx) * hf) > 1e-9 * hf)
        throw ConfigError(std::string(what) + ": time " + std::to_string(t) +
                          " does not lie on the path grid");
    return idx;
}

Trajectory integrate(const SdeModel& model, const SchemeConfig& config,
                     const BrownianPath& path, double t0, std::int64_t steps,
                     const Vec& xi) {
    model.validate();
    config.validate();
    if (steps < 0) throw ConfigError("integrate: steps must be >= 0");
    if (xi.size() != model.dim) throw ConfigError("integrate: xi has wrong dimension");
    if (path.noise_dim() != model.noise_dim)
        throw ConfigError("integrate: path noise_dim does not match the model");

    // config.h must be h_fine scaled by an exact power of two.
    const double hf = path.h_fine();
    std::int64_t factor = std::llround(config.h / hf);
    if (factor < 1 || (factor & (factor - 1)) != 0 || hf * static_cast<double>(factor) != config.h)
        throw ConfigError("integrate: h must equal path h_fine times a power of two");

    const std::int64_t start = node_on_grid(path.grid(), t0, "integrate");
    if (start + steps * factor > path.increment_count())
        throw ConfigError("integrate: requested steps run past the end of the path");

    if (config.admissibility != Admissibility::Off) {
        const double bound = admissible_step_default(model);
        if (config.h > bound) {
            if (config.admissibility == Admissibility::Strict)
                throw ConfigError("integrate: h=" + std::to_string(config.h) +
                                  " exceeds the admissible bound " + std::to_string(bound));
            std::cerr << "warning: h=" << config.h << " exceeds the admissible step bound "
                      << bound << " for model '" << model.id << "'\n";
        }
    }

    Trajectory traj;
    traj.t0 = t0;
    traj.h = config.h;
    traj.model_id = model.id;
    traj.seed = path.seed();
    traj.stream_id = path.stream_id();
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(xi);
    if (!xi.allFinite()) throw BlowUpError(t0, 0);

    Vec x = xi;
    for (std::int64_t j = 0; j < steps; ++j) {
        const double t = traj.time_at(j);
        const Vec dW = path.increment_sum(start + j * factor, factor);
        try {
            x = (config.kind == SchemeKind::ProjectedEuler) ? pe_step(model, t, x, config.h, dW)
                                                            : em_step(model, t, x, config.h, dW);
        } catch (const BlowUpError&) {
            throw BlowUpError(traj.time_at(j + 1), j + 1);
        }
        traj.states.push_back(x);
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& file) {
    auto out = open_csv(file);
    const int d = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
    out << "t";
    for (int i = 1; i <= d; ++i) out << ",x_" << i;
    out << '\n';
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        out << g17(traj.time_at(static_cast<std::int64_t>(j)));
        for (int i = 0; i < d; ++i) out << ',' << g17(traj.states[j](i));
        out << '\n';
    }
}

}  // namespace rps
