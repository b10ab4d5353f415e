#ifndef FIGBO_ACQUISITION_HPP
#define FIGBO_ACQUISITION_HPP

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "figbo/errors.hpp"

namespace figbo {

// All scores follow the minimization convention: larger score means a more attractive query
// for driving the objective down. Improvement is (f_star - f(x))^+.

inline double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

enum class BaseAcquisition { EI, UCB, PI };

inline std::string_view to_string(BaseAcquisition b)
{
    switch (b) {
    case BaseAcquisition::EI: return "ei";
    case BaseAcquisition::UCB: return "ucb";
    case BaseAcquisition::PI: return "pi";
    }
    return "?";
}

struct AcquisitionSpec {
    BaseAcquisition base = BaseAcquisition::EI;
    bool figbo_enabled = false;
    double eta = 1.0;        // decay hyperparameter of lambda = eta / n
    int mc_samples = 100;    // L
    double ucb_delta = 0.1;
    double pi_xi = 0.0;
    bool gamma_normalize = false; // divide Gamma by sf2

    void validate() const
    {
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw InputError("acquisition: eta must be positive");
        if (mc_samples < 1)
            throw InputError("acquisition: L must be >= 1");
        if (!(ucb_delta > 0.0 && ucb_delta < 1.0))
            throw InputError("acquisition: ucb_delta must lie in (0, 1)");
        if (!(pi_xi >= 0.0))
            throw InputError("acquisition: pi_xi must be nonnegative");
    }

    /// Variant id as used by the CLI and in file names, e.g. "figbo-ei".
    std::string variant() const
    {
        return (figbo_enabled ? std::string("figbo-") : std::string()) + std::string(to_string(base));
    }
};

/// Parses "ei", "ucb", "pi" and their "figbo-" prefixed forms.
inline AcquisitionSpec parse_variant(std::string_view id)
{
    AcquisitionSpec spec;
    std::string_view rest = id;
    if (rest.starts_with("figbo-")) {
        spec.figbo_enabled = true;
        rest.remove_prefix(6);
    }
    if (rest == "ei")
        spec.base = BaseAcquisition::EI;
    else if (rest == "ucb")
        spec.base = BaseAcquisition::UCB;
    else if (rest == "pi")
        spec.base = BaseAcquisition::PI;
    else
        throw InputError("unknown acquisition variant '" + std::string(id) + "'");
    return spec;
}

struct IncumbentInfo {
    double f_star = 0.0; // best observed value so far
    int n = 1;           // iteration counter
};

inline double ei_score(double mean, double sd, double f_star)
{
    if (!(sd > 0.0))
        return std::max(f_star - mean, 0.0);
    const double z = (f_star - mean) / sd;
    return std::max(sd * (z * normal_cdf(z) + normal_pdf(z)), 0.0);
}

/// Lower-confidence-bound score -mu + sqrt(beta) s, maximized by the optimizer.
inline double ucb_score(double mean, double sd, double beta)
{
    return -mean + std::sqrt(beta) * sd;
}

/// beta_n = 2 log(n^(d/2 + 2) pi^2 / (3 delta)).
inline double beta_schedule(int n, int d, double delta)
{
    if (n < 1)
        throw InputError("beta_schedule: n must be >= 1");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 2.0 * ((0.5 * d + 2.0) * std::log(static_cast<double>(n)) + std::log(pi2 / (3.0 * delta)));
}

inline double pi_score(double mean, double sd, double f_star, double xi)
{
    if (!(sd > 0.0))
        return mean + xi < f_star ? 1.0 : 0.0;
    return normal_cdf((f_star - mean - xi) / sd);
}

inline double lambda_coeff(double eta, int n)
{
    if (n < 1)
        throw InputError("lambda_coeff: n must be >= 1");
    return eta / static_cast<double>(n);
}

inline double figbo_score(double base_value, double lambda, double gamma)
{
    if (lambda == 0.0)
        return base_value;
    return base_value + lambda * gamma;
}

/// y - y_star elementwise; the minimum of the result is 0 when y_star = min(y).
inline Eigen::VectorXd figbo_variant_shift(const Eigen::Ref<const Eigen::VectorXd>& y, double y_star)
{
    if (y.size() == 0)
        throw InputError("figbo_variant_shift: empty observations");
    return (y.array() - y_star).matrix();
}

/// Base score from posterior mean and variance.
inline double base_score(const AcquisitionSpec& spec, double mean, double variance, double f_star,
                         double beta)
{
    const double sd = std::sqrt(std::max(variance, 0.0));
    switch (spec.base) {
    case BaseAcquisition::EI: return ei_score(mean, sd, f_star);
    case BaseAcquisition::UCB: return ucb_score(mean, sd, beta);
    case BaseAcquisition::PI: return pi_score(mean, sd, f_star, spec.pi_xi);
    }
    return 0.0;
}

} // namespace figbo

#endif // FIGBO_ACQUISITION_HPP
