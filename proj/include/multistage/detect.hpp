#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "multistage/event_table.hpp"
#include "multistage/survival.hpp"

namespace multistage {

enum class Verdict { SharedStep, ProportionalShift, Independent, Inconclusive };

std::string_view verdict_name(Verdict verdict);

/// Outcome of comparing a disease-free fit against a conditional
/// (after-other-disease) fit. Recovered first-step parameters are populated
/// only when the verdict is SharedStep.
struct DetectionReport {
    FitResult fit_free;
    FitResult fit_cond;
    double slope_diff = 0.0;  // q_free - q_cond
    double z = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    double reference_age = 1.0;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> recovered_q0;
    std::optional<double> recovered_lambda0;
    std::optional<double> recovered_se_q0;
    std::optional<double> recovered_se_log_lambda0;
};

/// Two-sided z-test on the fitted powers plus a one-sided elevation check of
/// the conditional cumulative hazard at reference_age.
///   SharedStep:        slope significantly decreased and level elevated
///   ProportionalShift: slopes equal within noise, levels differ
///   Independent:       both equal within noise
///   Inconclusive:      slope changed without the shared-step signature
DetectionReport slope_change_test(const FitResult& fit_free, const FitResult& fit_cond,
                                  double alpha, double reference_age);

/// Power-law description of the ratio F_j F_k / F_jk, built from the three
/// Nelson-Aalen cdf estimates on a shared age grid (deciles of the joint
/// event ages) and fitted by generalized least squares in log-log space.
/// The returned q estimates the hidden first step's power q0.
FitResult fit_first_step_ratio(const EventTable& table, std::string_view j,
                               std::string_view k, int grid_points = 9);

struct HiddenStepEstimate {
    double q0 = 0.0;
    double lambda0 = 0.0;
    double se_q0 = 0.0;
    double se_log_lambda0 = 0.0;
};

/// Inverts the power-law algebra: q0 from the ratio fit's slope, then
/// lambda0 = ratio level / kappa_jk(q0, qj, qk) with qj, qk backed out of the
/// two disease-free fits. Standard errors by the delta method.
HiddenStepEstimate recover_hidden_step(const FitResult& fit_j_free,
                                       const FitResult& fit_k_free,
                                       const FitResult& ratio_fit);

/// Cross-check route: q0 = (q_free - q_cond) - 1, with its propagated SE.
struct SlopeGapEstimate {
    double q0 = 0.0;
    double se_q0 = 0.0;
};
SlopeGapEstimate recover_q0_from_slopes(const FitResult& fit_free,
                                        const FitResult& fit_cond);

/// Full pipeline: disease-free fit of j, conditional fit of j after k,
/// slope-change test, and (on a SharedStep verdict) hidden-step recovery.
DetectionReport detect_shared_step(const EventTable& table, std::string_view j,
                                   std::string_view k, double alpha = 0.05);

/// Human-readable multi-line summary.
std::string detection_summary(const DetectionReport& report);

}  // namespace multistage
