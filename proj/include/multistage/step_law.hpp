#pragma once

namespace multistage {

enum class StepLawKind { PowerLawCdf, Exponential, Weibull };

/// Parametric waiting-time law for one stage of a disease process.
///
/// PowerLawCdf:  F(t) = min(lambda * t^(q+1), 1), a proper cdf on
///               [0, (1/lambda)^(1/(q+1))].
/// Exponential:  F(t) = 1 - exp(-lambda * t), q fixed at 0 by convention.
/// Weibull:      F(t) = 1 - exp(-lambda * t^(q+1)).
struct StepLaw {
    StepLawKind kind = StepLawKind::Exponential;
    double lambda = 1.0;  // rate, > 0
    double q = 0.0;       // power, > -1 (unused for Exponential)

    static StepLaw power_law_cdf(double lambda, double q);
    static StepLaw exponential(double lambda);
    static StepLaw weibull(double lambda, double q);

    double cdf(double t) const;
    double pdf(double t) const;
    double survival(double t) const;

    /// Inverse cdf for u in (0,1).
    double quantile(double u) const;

    /// Age at which the cdf reaches 1 (finite only for PowerLawCdf).
    double support_end() const;
};

}  // namespace multistage
