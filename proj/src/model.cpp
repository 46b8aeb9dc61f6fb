#include "rps/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace rps {

double reduce_period(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    if (r == period) r = 0.0;  // tiny negative remainders can round up to period
    return r;
}

void SdeModel::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("model: " + what); };
    if (dim < 1) fail("dim must be >= 1");
    if (noise_dim < 1) fail("noise_dim must be >= 1");
    if (lambda.size() != dim) fail("lambda must have exactly dim entries");
    for (int i = 0; i < dim; ++i) {
        if (!(lambda(i) > 0.0)) fail("lambda entries must be positive");
        if (i > 0 && lambda(i) < lambda(i - 1)) fail("lambda must be ascending");
    }
    if (!drift) fail("drift function missing");
    if (!diffusion) fail("diffusion function missing");
    if (!(period > 0.0) || !std::isfinite(period)) fail("period must be positive and finite");
    if (!(gamma >= 1.0)) fail("gamma must be >= 1");
    if (!(p1 > 1.0)) fail("p1 must be > 1");
    if (!(gamma < (p1 + 1.0) / 2.0)) fail("gamma must be < (p1+1)/2");
    if (!(alpha1 < lambda_min())) fail("alpha1 must be < lambda_min");
    if (growth_c1 < 0.0 || growth_c2 < 0.0) fail("growth constants must be >= 0");
    if (additive) {
        if (!(c_f < lambda_min())) fail("additive mode requires c_f < lambda_min");
        if (c_g < 0.0) fail("additive mode requires c_g >= 0");
    }
}

CoercivityResult derive_coercivity(double alpha1, double epsilon, double p1,
                                   double p2, double f0_norm, double g0_norm) {
    if (!(epsilon > 0.0)) throw ConfigError("derive_coercivity: epsilon must be > 0");
    if (!(p1 > 1.0)) throw ConfigError("derive_coercivity: p1 must be > 1");
    if (!(p2 >= 1.0 && p2 < p1))
        throw ConfigError("derive_coercivity: p2 must lie in [1, p1)");
    if (f0_norm < 0.0 || g0_norm < 0.0)
        throw ConfigError("derive_coercivity: norms must be >= 0");
    CoercivityResult r;
    r.alpha2 = alpha1 + epsilon;
    const double q = 2.0 * p1 - 1.0;
    r.c0 = f0_norm * f0_norm / (2.0 * epsilon) +
           q * q / (4.0 * (p1 - p2)) * g0_norm * g0_norm +
           q / 2.0 * g0_norm * g0_norm;
    return r;
}

SchemeConstants scheme_constants(const SdeModel& model, double epsilon, double p2) {
    model.validate();
    if (!(epsilon > 0.0) || !(epsilon < model.lambda_min() - model.alpha1))
        throw ConfigError("scheme_constants: epsilon must lie in (0, lambda_min - alpha1)");

    const Vec origin = Vec::Zero(model.dim);
    double f0 = 0.0, g0 = 0.0;
    for (int i = 0; i < kSupSampleCount; ++i) {
        const double t = model.period * static_cast<double>(i) / kSupSampleCount;
        f0 = std::max(f0, model.drift(t, origin).norm());
        g0 = std::max(g0, model.diffusion(t, origin).norm());
    }

    SchemeConstants c;
    c.l1 = 2.0 * model.growth_c2;
    c.l2 = 3.0 * model.growth_c1;
    c.epsilon = epsilon;
    c.p2 = p2;
    const CoercivityResult cr = derive_coercivity(model.alpha1, epsilon, model.p1, p2, f0, g0);
    c.alpha2 = cr.alpha2;
    c.c0 = cr.c0;
    return c;
}

double admissible_step_bound(const SdeModel& model, const SchemeConstants& constants,
                             double delta1, double delta2) {
    const double a = model.one_sided_constant();
    const double gap = model.lambda_min() - a;
    if (!(gap > 0.0)) throw ConfigError("admissible_step_bound: lambda_min - a must be > 0");
    if (!(delta1 >= 0.0 && delta1 < gap))
        throw ConfigError("admissible_step_bound: delta1 must lie in [0, lambda_min - a)");
    if (!(delta2 >= 0.0)) throw ConfigError("admissible_step_bound: delta2 must be >= 0");
    const double e = (model.p1 + 1.0) / 2.0;
    const double denom = model.lambda_max() + constants.l2;
    const double term1 = std::pow(gap, e) / (std::pow(1.0 + delta2, e) * std::pow(denom, model.p1 + 1.0));
    const double term2 = 1.0 / (gap - delta1);
    return std::min({term1, term2, 1.0});
}

double admissible_step_default(const SdeModel& model) {
    const double gap = model.lambda_min() - model.alpha1;
    const SchemeConstants c = scheme_constants(model, gap / 2.0, (1.0 + model.p1) / 2.0);
    const double agap = model.lambda_min() - model.one_sided_constant();
    return admissible_step_bound(model, c, agap / 2.0, 1.0);
}

double probe_monotonicity(const SdeModel& model, double radius, int samples,
                          std::uint64_t seed) {
    model.validate();
    if (!(radius > 0.0)) throw ConfigError("probe: radius must be > 0");
    if (samples < 1) throw ConfigError("probe: samples must be >= 1");

    std::mt19937_64 eng(seed);
    auto unit = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1p-53; };
    auto in_ball = [&](Vec& v) {
        do {
            for (int i = 0; i < model.dim; ++i) v(i) = 2.0 * unit() - 1.0;
        } while (v.squaredNorm() > 1.0);
        v *= radius;
    };

    const double weight = (2.0 * model.p1 - 1.0) / 2.0;
    Vec x(model.dim), y(model.dim);
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const double t = unit() * model.period;
        in_ball(x);
        do { in_ball(y); } while ((x - y).squaredNorm() == 0.0);
        const Vec d = x - y;
        const Vec df = model.drift(t, x) - model.drift(t, y);
        const Mat dg = model.diffusion(t, x) - model.diffusion(t, y);
        const double q = (d.dot(df) + weight * dg.squaredNorm()) / d.squaredNorm();
        worst = std::max(worst, q);
    }
    return worst;
}

// --- componentwise coefficients and construction ----------------------------

double ScalarCoefficient::eval(double t, double period, double u) const {
    double v = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) v = v * u + *it;
    if (!cos_terms.empty() || !sin_terms.empty()) {
        const double base = 2.0 * std::numbers::pi * reduce_period(t, period) / period;
        for (const auto& [k, amp] : cos_terms) v += amp * std::cos(k * base);
        for (const auto& [k, amp] : sin_terms) v += amp * std::sin(k * base);
    }
    return v;
}

bool ScalarCoefficient::depends_on_state() const {
    for (std::size_t k = 1; k < poly.size(); ++k)
        if (poly[k] != 0.0) return true;
    return false;
}

SdeModel make_componentwise_model(const Vec& lambda, const ScalarCoefficient& drift,
                                  const ScalarCoefficient& diffusion, double period) {
    SdeModel m;
    m.dim = static_cast<int>(lambda.size());
    m.noise_dim = m.dim;
    m.lambda = lambda;
    m.period = period;
    const int d = m.dim;
    m.drift = [drift, period, d](double t, const Vec& x) {
        Vec out(d);
        for (int i = 0; i < d; ++i) out(i) = drift.eval(t, period, x(i));
        return out;
    };
    m.diffusion = [diffusion, period, d](double t, const Vec& x) {
        Mat out = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i) out(i, i) = diffusion.eval(t, period, x(i));
        return out;
    };
    return m;
}

namespace {

ScalarCoefficient coefficient_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_object()) throw ConfigError("model: " + what + " must be an object");
    ScalarCoefficient c;
    if (j.contains("poly")) c.poly = j.at("poly").get<std::vector<double>>();
    auto read_terms = [&](const char* key, std::vector<std::pair<int, double>>& dst) {
        if (!j.contains(key)) return;
        for (const auto& term : j.at(key)) {
            const int k = term.at("harmonic").get<int>();
            if (k < 0) throw ConfigError("model: " + what + ": harmonic must be >= 0");
            dst.emplace_back(k, term.at("amplitude").get<double>());
        }
    };
    read_terms("cos", c.cos_terms);
    read_terms("sin", c.sin_terms);
    return c;
}

SdeModel inline_model_from_json(const nlohmann::json& j) {
    const auto lam = j.at("lambda").get<std::vector<double>>();
    const int dim = j.value("dim", static_cast<int>(lam.size()));
    if (dim != static_cast<int>(lam.size()))
        throw ConfigError("model: dim disagrees with the lambda entry count");
    const int noise_dim = j.value("noise_dim", dim);
    if (noise_dim != dim)
        throw ConfigError("model: inline models are componentwise; noise_dim must equal dim");
    Vec lambda = Eigen::Map<const Vec>(lam.data(), static_cast<Eigen::Index>(lam.size()));
    const double period = j.at("period").get<double>();

    SdeModel m = make_componentwise_model(
        lambda, coefficient_from_json(j.at("drift"), "drift"),
        coefficient_from_json(j.at("diffusion"), "diffusion"), period);
    m.gamma = j.at("gamma").get<double>();
    m.alpha1 = j.at("alpha1").get<double>();
    m.p1 = j.at("p1").get<double>();
    m.growth_c1 = j.at("growth_c1").get<double>();
    m.growth_c2 = j.at("growth_c2").get<double>();
    m.additive = j.value("additive", false);
    m.c_f = j.value("c_f", 0.0);
    m.c_g = j.value("c_g", 0.0);
    m.id = j.value("id", std::string("inline"));
    m.validate();
    return m;
}

}  // namespace

SdeModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.is_string()) return preset_model(j.get<std::string>());
        if (j.is_object() && j.contains("preset"))
            return preset_model(j.at("preset").get<std::string>());
        return inline_model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model JSON: ") + e.what());
    }
}

SdeModel preset_model(const std::string& name) {
    using std::numbers::pi;
    if (name == "example1-multiplicative") {
        // dX = (-2 pi X + X - X^3 + cos(pi t)) dt + (1 + X^2 + cos(pi t)) dW, tau = 2
        ScalarCoefficient f{{0.0, 1.0, 0.0, -1.0}, {{1, 1.0}}, {}};
        ScalarCoefficient g{{1.0, 0.0, 1.0}, {{1, 1.0}}, {}};
        SdeModel m = make_componentwise_model(Vec::Constant(1, 2.0 * pi), f, g, 2.0);
        m.gamma = 3.0;
        m.alpha1 = 1.0;   // one-sided constant of the drift alone
        m.p1 = 6.0;
        m.growth_c1 = 1.5;
        m.growth_c2 = 2.0;
        m.id = name;
        m.validate();
        return m;
    }
    if (name == "example2-additive") {
        // dX = (-pi X - X^3 + sin(2 pi t)) dt + dW, tau = 1
        ScalarCoefficient f{{0.0, 0.0, 0.0, -1.0}, {}, {{1, 1.0}}};
        ScalarCoefficient g{{1.0}, {}, {}};
        SdeModel m = make_componentwise_model(Vec::Constant(1, pi), f, g, 1.0);
        m.gamma = 3.0;
        m.alpha1 = 0.0;
        m.p1 = 6.0;
        m.growth_c1 = 1.5;
        m.growth_c2 = 1.0;
        m.additive = true;
        m.c_f = 0.0;
        m.c_g = 1.0;
        m.id = name;
        m.validate();
        return m;
    }
    std::ostringstream msg;
    msg << "unknown preset '" << name << "' (valid:";
    for (const auto& p : preset_names()) msg << ' ' << p;
    msg << ')';
    throw ConfigError(msg.str());
}

std::vector<std::string> preset_names() {
    return {"example1-multiplicative", "example2-additive"};
}

}  // namespace rps
