#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "multistage/event_table.hpp"

namespace multistage {

/// Left-truncated, right-censored Nelson-Aalen cumulative hazard curve.
struct CumHazardCurve {
    struct Point {
        double age = 0.0;
        double cum_hazard = 0.0;
        double variance = 0.0;
    };
    std::string disease;
    std::vector<Point> points;

    /// Step-function value at the given age (0 before the first event age).
    double eval(double age) const;
    double variance_at(double age) const;
};

/// Risk sets count records with entry_age < t <= exit_age; increments are
/// d(t)/n(t) with variance accumulated as d/n^2. Zero-exposure records
/// (exit == entry) are dropped with a warning on stderr.
CumHazardCurve nelson_aalen(const EventTable& table, std::string_view disease);

struct LogLogPoints {
    std::vector<std::array<double, 2>> points;  // (log age, log H)
    int dropped = 0;
};
LogLogPoints loglog_points(const CumHazardCurve& curve);

/// Maximum-likelihood fit of the power-law hazard h(t) = lambda (q+1) t^q,
/// cumulative Lambda(t) = lambda t^(q+1), on left-truncated, right-censored
/// records. Standard errors come from the observed information in
/// (q, log lambda) coordinates.
struct FitResult {
    double q = 0.0;
    double lambda = 0.0;
    double se_q = 0.0;
    double se_log_lambda = 0.0;
    double cov_q_log_lambda = 0.0;
    double log_likelihood = 0.0;
    std::int64_t n_events = 0;
    std::int64_t n_at_risk = 0;
};

FitResult fit_power_law_mle(const EventTable& table, std::string_view disease);

/// Log-likelihood and score of the same model at arbitrary parameters,
/// exposed for diagnostics and gradient checks.
double power_law_log_likelihood(const EventTable& table, std::string_view disease,
                                double q, double lambda);

struct ScoreVector {
    double d_q = 0.0;
    double d_log_lambda = 0.0;
};
ScoreVector power_law_score(const EventTable& table, std::string_view disease, double q,
                            double lambda);

void write_curve_csv(const CumHazardCurve& curve, const std::filesystem::path& path);

}  // namespace multistage
