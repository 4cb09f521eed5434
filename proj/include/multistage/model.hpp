#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multistage/numeric.hpp"
#include "multistage/step_law.hpp"

namespace multistage {

/// Diseases that all require one shared first step before their own
/// (independent) second steps can run.
struct SharedStepModel {
    StepLaw first;
    std::vector<std::pair<std::string, StepLaw>> diseases;

    SharedStepModel(StepLaw first_step,
                    std::vector<std::pair<std::string, StepLaw>> disease_laws);

    std::size_t index_of(std::string_view name) const;
    const StepLaw& disease_law(std::string_view name) const;
};

/// Diseases with private two-step chains and no shared state.
struct IndependentModel {
    struct Chain {
        std::string name;
        StepLaw first;
        StepLaw second;
    };
    std::vector<Chain> diseases;

    explicit IndependentModel(std::vector<Chain> chains);
};

/// Independent counterpart with the same per-disease marginal laws.
IndependentModel independent_from_shared(const SharedStepModel& model);

struct MomentReport {
    double t = 0.0;
    double expected_n = 0.0;
    double variance_n = 0.0;
    double prob_zero = 1.0;
    double expected_n_given_positive = 0.0;
};

// Closed-form coefficients for power-law step cdfs, evaluated through
// log_gamma so non-integer powers are supported.
//   coeff_c(q0, qa)        = G(q0+2) G(qa+2) / G(q0+qa+3)
//   coeff_c_joint(q0,qj,qk) = G(q0+2) G(qj+qk+3) / G(q0+qj+qk+4)
double coeff_c(double q0, double qa);
double coeff_c_joint(double q0, double qj, double qk);

struct KappaCoefficients {
    double kappa_j;   // c_jk / c_j
    double kappa_k;   // c_jk / c_k
    double kappa_jk;  // c_j c_k / c_jk
};
KappaCoefficients coeff_kappa(double q0, double qj, double qk);

/// Power-law closed form lambda0*lambdaj*c_j*t^(q0+qj+2), clamped to [0,1].
/// Throws if either law is not PowerLawCdf.
double disease_cdf_closed(const SharedStepModel& model, std::string_view disease,
                          double t);

/// Convolution integral of first-step pdf with second-step cdf.
double disease_cdf_numeric(const StepLaw& first, const StepLaw& second, double t,
                           const QuadratureSpec& spec = {});

/// Marginal disease cdf; closed form when exact, numeric otherwise.
double disease_cdf(const SharedStepModel& model, std::string_view disease, double t,
                   const QuadratureSpec& spec = {});

/// Probability that both diseases j and k occurred by t (shared first step).
double joint_cdf_closed(const SharedStepModel& model, std::string_view j,
                        std::string_view k, double t);
double joint_cdf_numeric(const StepLaw& first, const StepLaw& second_j,
                         const StepLaw& second_k, double t,
                         const QuadratureSpec& spec = {});
double joint_cdf(const SharedStepModel& model, std::string_view j, std::string_view k,
                 double t, const QuadratureSpec& spec = {});

/// F_target-and-given / F_given; throws when F_given(t) = 0.
double conditional_cdf(const SharedStepModel& model, std::string_view target,
                       std::string_view given, double t,
                       const QuadratureSpec& spec = {});

/// F_j F_k / F_jk; its log-log slope in t is q0+1 for power laws.
double first_step_ratio(const SharedStepModel& model, std::string_view j,
                        std::string_view k, double t, const QuadratureSpec& spec = {});

/// Moment generating function G(s) at horizon t; G(0) = 1.
double generating_function(const SharedStepModel& model, double s, double t,
                           const QuadratureSpec& spec = {});

double expected_n(const SharedStepModel& model, double t,
                  const QuadratureSpec& spec = {});
double expected_n(const IndependentModel& model, double t,
                  const QuadratureSpec& spec = {});

double variance_n(const SharedStepModel& model, double t,
                  const QuadratureSpec& spec = {});
double variance_n_indep(const IndependentModel& model, double t,
                        const QuadratureSpec& spec = {});

double prob_zero(const SharedStepModel& model, double t,
                 const QuadratureSpec& spec = {});
double prob_zero_indep(const IndependentModel& model, double t,
                       const QuadratureSpec& spec = {});

double expected_n_given_positive(const SharedStepModel& model, double t,
                                 const QuadratureSpec& spec = {});
double expected_n_given_positive_indep(const IndependentModel& model, double t,
                                       const QuadratureSpec& spec = {});

MomentReport moment_report(const SharedStepModel& model, double t,
                           const QuadratureSpec& spec = {});

}  // namespace multistage
