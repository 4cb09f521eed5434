#include "multistage/step_law.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace multistage {

namespace {

void check_params(double lambda, double q) {
    if (!std::isfinite(lambda) || !(lambda > 0.0))
        throw std::invalid_argument("StepLaw: rate lambda must be positive and finite");
    if (!std::isfinite(q) || !(q > -1.0))
        throw std::invalid_argument("StepLaw: power q must be finite and > -1");
}

void check_age(double t) {
    if (!(t >= 0.0)) throw std::domain_error("StepLaw: age must be >= 0");
}

}  // namespace

StepLaw StepLaw::power_law_cdf(double lambda, double q) {
    check_params(lambda, q);
    return {StepLawKind::PowerLawCdf, lambda, q};
}

StepLaw StepLaw::exponential(double lambda) {
    check_params(lambda, 0.0);
    return {StepLawKind::Exponential, lambda, 0.0};
}

StepLaw StepLaw::weibull(double lambda, double q) {
    check_params(lambda, q);
    return {StepLawKind::Weibull, lambda, q};
}

double StepLaw::cdf(double t) const {
    check_age(t);
    switch (kind) {
        case StepLawKind::PowerLawCdf:
            return std::min(lambda * std::pow(t, q + 1.0), 1.0);
        case StepLawKind::Exponential:
            return -std::expm1(-lambda * t);
        case StepLawKind::Weibull:
            return -std::expm1(-lambda * std::pow(t, q + 1.0));
    }
    return 0.0;
}

double StepLaw::pdf(double t) const {
    check_age(t);
    const double p = q + 1.0;
    switch (kind) {
        case StepLawKind::PowerLawCdf:
            if (t > support_end()) return 0.0;
            if (t == 0.0) {
                if (q > 0.0) return 0.0;
                if (q == 0.0) return lambda;
                return std::numeric_limits<double>::infinity();
            }
            return lambda * p * std::pow(t, q);
        case StepLawKind::Exponential:
            return lambda * std::exp(-lambda * t);
        case StepLawKind::Weibull: {
            if (t == 0.0) {
                if (q > 0.0) return 0.0;
                if (q == 0.0) return lambda;
                return std::numeric_limits<double>::infinity();
            }
            const double cum = lambda * std::pow(t, p);
            return lambda * p * std::pow(t, q) * std::exp(-cum);
        }
    }
    return 0.0;
}

double StepLaw::survival(double t) const {
    check_age(t);
    switch (kind) {
        case StepLawKind::PowerLawCdf:
            return std::max(1.0 - lambda * std::pow(t, q + 1.0), 0.0);
        case StepLawKind::Exponential:
            return std::exp(-lambda * t);
        case StepLawKind::Weibull:
            return std::exp(-lambda * std::pow(t, q + 1.0));
    }
    return 1.0;
}

double StepLaw::quantile(double u) const {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("StepLaw::quantile: requires u in (0,1)");
    const double p = q + 1.0;
    switch (kind) {
        case StepLawKind::PowerLawCdf:
            return std::pow(u / lambda, 1.0 / p);
        case StepLawKind::Exponential:
            return -std::log1p(-u) / lambda;
        case StepLawKind::Weibull:
            return std::pow(-std::log1p(-u) / lambda, 1.0 / p);
    }
    return 0.0;
}

double StepLaw::support_end() const {
    if (kind == StepLawKind::PowerLawCdf)
        return std::pow(1.0 / lambda, 1.0 / (q + 1.0));
    return std::numeric_limits<double>::infinity();
}

}  // namespace multistage
