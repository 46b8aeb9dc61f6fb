#pragma once

// Semi-linear SDE models  dX = (A X + f(t, X)) dt + g(t, X) dW  with
// time-periodic coefficients, plus the derived constants used by the
// step-size and coercivity analysis.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "rps/errors.hpp"

namespace rps {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Reduce t to [0, period).  fmod is exact, so periodic coefficients evaluated
// through this reduction agree bit for bit at t and t + period whenever both
// times are exactly representable.
double reduce_period(double t, double period);

struct SdeModel {
    int dim = 1;
    int noise_dim = 1;
    Vec lambda;  // spectrum of -A, ascending, all positive
    std::function<Vec(double, const Vec&)> drift;       // f(t, x)
    std::function<Mat(double, const Vec&)> diffusion;   // g(t, x), dim x noise_dim
    double period = 1.0;   // tau: f, g are tau-periodic in t
    double gamma = 1.0;    // polynomial growth degree of f; projection radius h^(-1/(2 gamma))
    double alpha1 = 0.0;   // one-sided (monotonicity) constant, alpha1 < lambda_min
    double p1 = 2.0;       // moment exponent, p1 > 1 and gamma < (p1+1)/2
    double growth_c1 = 0.0;  // C1: local Lipschitz-growth constant of (f, g)
    double growth_c2 = 0.0;  // C2: growth constant, ||f(t,x)|| <= C2 (1 + ||x||^gamma)
    bool additive = false;   // g independent of x
    double c_f = 0.0;        // additive mode: drift one-sided constant, c_f < lambda_min
    double c_g = 0.0;        // additive mode: sup-norm bound of g
    std::string id;          // provenance tag carried into outputs

    double lambda_min() const { return lambda(0); }
    double lambda_max() const { return lambda(lambda.size() - 1); }
    // Constant whose distance to lambda_min drives contraction: alpha1, or c_f
    // in additive mode.
    double one_sided_constant() const { return additive ? c_f : alpha1; }

    void validate() const;  // throws ConfigError listing the violated invariant
};

struct CoercivityResult {
    double alpha2;  // alpha1 + epsilon
    double c0;      // additive constant absorbing f(t,0), g(t,0)
};

// Appendix-style coercivity split: alpha2 = alpha1 + epsilon and
// c0 = f0^2/(2 eps) + (2 p1 - 1)^2 / (4 (p1 - p2)) g0^2 + (2 p1 - 1)/2 g0^2.
CoercivityResult derive_coercivity(double alpha1, double epsilon, double p1,
                                   double p2, double f0_norm, double g0_norm);

struct SchemeConstants {
    double l1 = 0.0;      // 2 * growth_c2: projected drift bound L1 h^{-1/2}
    double l2 = 0.0;      // 3 * growth_c1: Lipschitz constant inside the projection ball
    double alpha2 = 0.0;
    double c0 = 0.0;
    double epsilon = 0.0;
    double p2 = 1.0;
};

// Number of time samples used for sup-norm estimates of f(t,0), g(t,0).
inline constexpr int kSupSampleCount = 10000;

SchemeConstants scheme_constants(const SdeModel& model, double epsilon, double p2);

// Largest admissible step size
//   min{ (lambda1-a)^((p1+1)/2) / ((1+delta2)^((p1+1)/2) (lambda_d + L2)^(p1+1)),
//        1/(lambda1 - a - delta1), 1 }
// with a = alpha1 (multiplicative) or c_f (additive).  delta1 = delta2 = 0
// reproduces the plain mean-square contraction window.
double admissible_step_bound(const SdeModel& model, const SchemeConstants& constants,
                             double delta1, double delta2);

// Bound with the default auxiliary choices delta1 = (lambda1 - a)/2, delta2 = 1.
double admissible_step_default(const SdeModel& model);

// Empirical check of the coupled one-sided condition: maximum over random
// triples (t, x, y) in the radius ball of
//   [ <x-y, f(t,x)-f(t,y)> + (2 p1 - 1)/2 ||g(t,x)-g(t,y)||_F^2 ] / ||x-y||^2.
// A result above alpha1 flags a violated monotonicity condition in that region.
// Deterministic in (model, radius, samples, seed).
double probe_monotonicity(const SdeModel& model, double radius, int samples,
                          std::uint64_t seed);

// --- construction -----------------------------------------------------------

// Componentwise coefficient c(t, u) = sum_k poly[k] u^k
//   + sum_j cos_amp[j] cos(2 pi cos_harm[j] t / period)
//   + sum_j sin_amp[j] sin(2 pi sin_harm[j] t / period).
// Integer harmonics make the period exact by construction.
struct ScalarCoefficient {
    std::vector<double> poly;
    std::vector<std::pair<int, double>> cos_terms;  // (harmonic, amplitude)
    std::vector<std::pair<int, double>> sin_terms;

    double eval(double t, double period, double u) const;
    bool depends_on_state() const;
};

// Assemble a model whose drift and diffusion act componentwise through scalar
// coefficients (diffusion diagonal, so noise_dim == dim).
SdeModel make_componentwise_model(const Vec& lambda, const ScalarCoefficient& drift,
                                  const ScalarCoefficient& diffusion, double period);

// Parse a model from JSON (either an inline object or {"preset": name}).
SdeModel model_from_json(const nlohmann::json& j);

// Named built-in models.
SdeModel preset_model(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace rps
