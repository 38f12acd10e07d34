#pragma once

#include <cmath>
#include <string>

namespace gampi {

/// Exponential-family GLM with canonical link. The cumulant A(theta), the
/// inverse link phi(theta) = A'(theta), and the curvature A''(theta) fully
/// determine the likelihood up to data-independent constants.
enum class Family { Gaussian, Bernoulli, Poisson };

// Linear predictors for Bernoulli/Poisson are clamped to this range inside the
// solvers to guard against overflow under separation.
inline constexpr double kLinkClamp = 30.0;

inline double clamp_eta(Family f, double eta) {
    if (f == Family::Gaussian) return eta;
    if (eta > kLinkClamp) return kLinkClamp;
    if (eta < -kLinkClamp) return -kLinkClamp;
    return eta;
}

inline double cumulant(Family f, double theta) {
    switch (f) {
        case Family::Gaussian: return 0.5 * theta * theta;
        case Family::Bernoulli:
            // log(1+e^t), stable for both tails
            return theta > 0 ? theta + std::log1p(std::exp(-theta))
                             : std::log1p(std::exp(theta));
        case Family::Poisson: return std::exp(theta);
    }
    return 0.0;
}

/// Inverse link phi = A'.
inline double inv_link(Family f, double theta) {
    switch (f) {
        case Family::Gaussian: return theta;
        case Family::Bernoulli: return 1.0 / (1.0 + std::exp(-theta));
        case Family::Poisson: return std::exp(theta);
    }
    return 0.0;
}

/// Curvature A'' (IRLS working weight).
inline double curvature(Family f, double theta) {
    switch (f) {
        case Family::Gaussian: return 1.0;
        case Family::Bernoulli: {
            const double mu = 1.0 / (1.0 + std::exp(-theta));
            return mu * (1.0 - mu);
        }
        case Family::Poisson: return std::exp(theta);
    }
    return 0.0;
}

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Gaussian: return "gaussian";
        case Family::Bernoulli: return "bernoulli";
        case Family::Poisson: return "poisson";
    }
    return "?";
}

}  // namespace gampi
