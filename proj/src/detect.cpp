#include "multistage/detect.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "multistage/model.hpp"
#include "multistage/simulate.hpp"

namespace multistage {

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

void check_fit(const FitResult& fit, const char* which) {
    if (!std::isfinite(fit.q) || !std::isfinite(fit.se_q) || !(fit.se_q >= 0.0) ||
        !std::isfinite(fit.se_log_lambda) || !(fit.lambda > 0.0))
        throw std::invalid_argument(std::string("slope_change_test: ") + which +
                                    " fit is not converged/finite");
}

// Variance of log H(t) = log lambda + (q+1) log t under a fit's covariance.
double log_level_variance(const FitResult& fit, double log_age) {
    return fit.se_log_lambda * fit.se_log_lambda +
           log_age * log_age * fit.se_q * fit.se_q +
           2.0 * log_age * fit.cov_q_log_lambda;
}

// Solves the small SPD system M x = b in place (Cholesky).
std::vector<double> solve_spd(std::vector<std::vector<double>> m, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= m[i][k] * m[j][k];
            if (i == j) {
                if (!(sum > 0.0))
                    throw std::runtime_error("fit_first_step_ratio: covariance not positive definite");
                m[i][i] = std::sqrt(sum);
            } else {
                m[i][j] = sum / m[j][j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= m[i][k] * b[k];
        b[i] = sum / m[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= m[k][i] * b[k];
        b[i] = sum / m[i][i];
    }
    return b;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double idx = prob * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

double log_kappa_jk(double q0, double qj, double qk) {
    return std::log(coeff_kappa(q0, qj, qk).kappa_jk);
}

}  // namespace

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::SharedStep: return "shared-step";
        case Verdict::ProportionalShift: return "proportional-shift";
        case Verdict::Independent: return "independent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DetectionReport slope_change_test(const FitResult& fit_free, const FitResult& fit_cond,
                                  double alpha, double reference_age) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("slope_change_test: alpha must lie in (0,1)");
    if (!(reference_age > 0.0))
        throw std::invalid_argument("slope_change_test: reference_age must be positive");
    check_fit(fit_free, "free");
    check_fit(fit_cond, "conditional");

    DetectionReport report;
    report.fit_free = fit_free;
    report.fit_cond = fit_cond;
    report.alpha = alpha;
    report.reference_age = reference_age;

    report.slope_diff = fit_free.q - fit_cond.q;
    const double se_diff =
        std::sqrt(fit_free.se_q * fit_free.se_q + fit_cond.se_q * fit_cond.se_q);
    report.z = se_diff > 0.0 ? report.slope_diff / se_diff : 0.0;
    report.p_value = 2.0 * normal_sf(std::abs(report.z));

    const double log_age = std::log(reference_age);
    const double level_diff =
        (std::log(fit_cond.lambda) + (fit_cond.q + 1.0) * log_age) -
        (std::log(fit_free.lambda) + (fit_free.q + 1.0) * log_age);
    const double level_var =
        log_level_variance(fit_cond, log_age) + log_level_variance(fit_free, log_age);
    const double z_level = level_var > 0.0 ? level_diff / std::sqrt(level_var) : 0.0;
    const double p_level_two = 2.0 * normal_sf(std::abs(z_level));
    const bool elevated = level_diff > 0.0 && normal_sf(z_level) < alpha;

    const bool slope_changed = report.p_value < alpha;
    const bool level_changed = p_level_two < alpha;

    if (slope_changed && report.slope_diff > 0.0 && elevated)
        report.verdict = Verdict::SharedStep;
    else if (slope_changed)
        report.verdict = Verdict::Inconclusive;
    else if (level_changed)
        report.verdict = Verdict::ProportionalShift;
    else
        report.verdict = Verdict::Independent;
    return report;
}

FitResult fit_first_step_ratio(const EventTable& table, std::string_view j,
                               std::string_view k, int grid_points) {
    if (j == k) throw std::invalid_argument("fit_first_step_ratio: diseases must differ");
    if (grid_points < 3)
        throw std::invalid_argument("fit_first_step_ratio: needs at least 3 grid points");

    // Composite "both diseases" process: event at max of the two onset ages,
    // censored at the earliest censoring age otherwise.
    std::map<std::int64_t, std::pair<const EventRecord*, const EventRecord*>> per_subject;
    for (const auto& record : table.records) {
        if (record.disease == j) per_subject[record.subject_id].first = &record;
        else if (record.disease == k) per_subject[record.subject_id].second = &record;
    }

    EventTable both;
    std::int64_t n_subjects = 0;
    for (const auto& [sid, pair] : per_subject) {
        const auto* rj = pair.first;
        const auto* rk = pair.second;
        if (rj == nullptr || rk == nullptr) continue;
        ++n_subjects;
        EventRecord rec;
        rec.subject_id = sid;
        rec.disease = "both";
        rec.entry_age = 0.0;
        if (rj->event && rk->event) {
            rec.exit_age = std::max(rj->exit_age, rk->exit_age);
            rec.event = true;
        } else {
            const double cj = rj->event ? std::numeric_limits<double>::infinity() : rj->exit_age;
            const double ck = rk->event ? std::numeric_limits<double>::infinity() : rk->exit_age;
            rec.exit_age = std::min(cj, ck);
            rec.event = false;
        }
        both.records.push_back(std::move(rec));
    }

    const CumHazardCurve curve_j = nelson_aalen(table, j);
    const CumHazardCurve curve_k = nelson_aalen(table, k);
    const CumHazardCurve curve_both = nelson_aalen(both, "both");

    std::vector<double> joint_ages;
    for (const auto& record : both.records)
        if (record.event) joint_ages.push_back(record.exit_age);
    std::sort(joint_ages.begin(), joint_ages.end());
    if (joint_ages.size() < 3)
        throw std::invalid_argument("fit_first_step_ratio: too few joint events (" +
                                    std::to_string(joint_ages.size()) + ")");

    std::vector<double> grid;
    for (int g = 1; g <= grid_points; ++g)
        grid.push_back(quantile_sorted(joint_ages,
                                       static_cast<double>(g) / (grid_points + 1.0)));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::size_t n = grid.size();
    if (n < 3)
        throw std::invalid_argument("fit_first_step_ratio: joint event ages too tied for a grid");

    struct CurveAtGrid {
        std::vector<double> log_f;
        std::vector<double> dlog;   // d log F / d H = e^-H / F
        std::vector<double> var_h;  // cumulative hazard variance at grid ages
    };
    auto tabulate = [&](const CumHazardCurve& curve) {
        CurveAtGrid out;
        for (double age : grid) {
            const double h = curve.eval(age);
            if (!(h > 0.0))
                throw std::runtime_error("fit_first_step_ratio: zero hazard estimate at grid age");
            const double f = -std::expm1(-h);
            out.log_f.push_back(std::log(f));
            out.dlog.push_back(std::exp(-h) / f);
            out.var_h.push_back(curve.variance_at(age));
        }
        return out;
    };
    const CurveAtGrid gj = tabulate(curve_j);
    const CurveAtGrid gk = tabulate(curve_k);
    const CurveAtGrid gb = tabulate(curve_both);

    std::vector<double> x(n), y(n);
    for (std::size_t g = 0; g < n; ++g) {
        x[g] = std::log(grid[g]);
        y[g] = gj.log_f[g] + gk.log_f[g] - gb.log_f[g];
    }

    // Covariance of y across the grid. Each Nelson-Aalen curve has independent
    // increments, so within one curve cov(H_g, H_h) = var(H_min(g,h)); the
    // three curves are treated as independent, which overstates the variance
    // of the ratio (the dominant neglected covariances enter negatively).
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    auto accumulate_curve = [&](const CurveAtGrid& c) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                cov[a][b] += c.dlog[a] * c.dlog[b] * c.var_h[std::min(a, b)];
    };
    accumulate_curve(gj);
    accumulate_curve(gk);
    accumulate_curve(gb);
    for (std::size_t a = 0; a < n; ++a) cov[a][a] *= 1.0 + 1e-12;

    // GLS for y = intercept + slope * x.
    std::vector<double> w_y = solve_spd(cov, y);
    std::vector<double> ones(n, 1.0);
    std::vector<double> w_1 = solve_spd(cov, ones);
    std::vector<double> w_x = solve_spd(cov, x);

    double s11 = 0.0, s1x = 0.0, sxx = 0.0, s1y = 0.0, sxy = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
        s11 += w_1[g];
        s1x += w_1[g] * x[g];
        sxx += w_x[g] * x[g];
        s1y += w_y[g];
        sxy += w_y[g] * x[g];
    }
    const double det = s11 * sxx - s1x * s1x;
    if (!(det > 0.0))
        throw std::runtime_error("fit_first_step_ratio: degenerate grid design");
    const double slope = (s11 * sxy - s1x * s1y) / det;
    const double intercept = (sxx * s1y - s1x * sxy) / det;
    const double var_slope = s11 / det;
    const double var_intercept = sxx / det;
    const double cov_si = -s1x / det;

    FitResult fit;
    fit.q = slope - 1.0;
    fit.lambda = std::exp(intercept);
    fit.se_q = std::sqrt(var_slope);
    fit.se_log_lambda = std::sqrt(var_intercept);
    fit.cov_q_log_lambda = cov_si;
    fit.log_likelihood = std::numeric_limits<double>::quiet_NaN();
    fit.n_events = static_cast<std::int64_t>(joint_ages.size());
    fit.n_at_risk = n_subjects;
    return fit;
}

HiddenStepEstimate recover_hidden_step(const FitResult& fit_j_free,
                                       const FitResult& fit_k_free,
                                       const FitResult& ratio_fit) {
    const double q0 = ratio_fit.q;
    const double qj = fit_j_free.q - 1.0 - q0;
    const double qk = fit_k_free.q - 1.0 - q0;
    if (!(q0 > -1.0) || !(qj > -1.0) || !(qk > -1.0))
        throw std::domain_error(
            "recover_hidden_step: recovered powers leave the kappa domain (must be > -1)");

    const double log_kappa = log_kappa_jk(q0, qj, qk);

    HiddenStepEstimate est;
    est.q0 = q0;
    est.lambda0 = ratio_fit.lambda * std::exp(-log_kappa);
    est.se_q0 = ratio_fit.se_q;

    // Delta method for log lambda0 = log lambda_R - log kappa_jk(q0, qj, qk)
    // with q0 = q_R, qj = q_jfree - 1 - q_R, qk = q_kfree - 1 - q_R.
    const double h = 1e-5;
    const double d_q0 = (log_kappa_jk(q0 + h, qj, qk) - log_kappa_jk(q0 - h, qj, qk)) / (2 * h);
    const double d_qj = (log_kappa_jk(q0, qj + h, qk) - log_kappa_jk(q0, qj - h, qk)) / (2 * h);
    const double d_qk = (log_kappa_jk(q0, qj, qk + h) - log_kappa_jk(q0, qj, qk - h)) / (2 * h);

    const double g_qr = -(d_q0 - d_qj - d_qk);  // d log lambda0 / d q_R
    const double g_jf = -d_qj;                  // d log lambda0 / d q_jfree
    const double g_kf = -d_qk;

    const double var = ratio_fit.se_log_lambda * ratio_fit.se_log_lambda +
                       g_qr * g_qr * ratio_fit.se_q * ratio_fit.se_q +
                       2.0 * g_qr * ratio_fit.cov_q_log_lambda +
                       g_jf * g_jf * fit_j_free.se_q * fit_j_free.se_q +
                       g_kf * g_kf * fit_k_free.se_q * fit_k_free.se_q;
    est.se_log_lambda0 = std::sqrt(std::max(var, 0.0));
    return est;
}

SlopeGapEstimate recover_q0_from_slopes(const FitResult& fit_free,
                                        const FitResult& fit_cond) {
    SlopeGapEstimate est;
    est.q0 = fit_free.q - fit_cond.q - 1.0;
    est.se_q0 =
        std::sqrt(fit_free.se_q * fit_free.se_q + fit_cond.se_q * fit_cond.se_q);
    return est;
}

DetectionReport detect_shared_step(const EventTable& table, std::string_view j,
                                   std::string_view k, double alpha) {
    const FitResult fit_free = fit_power_law_mle(table, j);
    const EventTable view = conditional_view(table, j, k);
    const FitResult fit_cond = fit_power_law_mle(view, j);

    std::vector<double> cond_event_ages;
    for (const auto& record : view.records)
        if (record.event) cond_event_ages.push_back(record.exit_age);
    std::sort(cond_event_ages.begin(), cond_event_ages.end());
    const double reference_age = quantile_sorted(cond_event_ages, 0.5);

    DetectionReport report = slope_change_test(fit_free, fit_cond, alpha, reference_age);

    if (report.verdict == Verdict::SharedStep) {
        try {
            const FitResult fit_k_free = fit_power_law_mle(table, k);
            const FitResult ratio = fit_first_step_ratio(table, j, k);
            const HiddenStepEstimate est = recover_hidden_step(fit_free, fit_k_free, ratio);
            report.recovered_q0 = est.q0;
            report.recovered_lambda0 = est.lambda0;
            report.recovered_se_q0 = est.se_q0;
            report.recovered_se_log_lambda0 = est.se_log_lambda0;
        } catch (const std::exception& err) {
            std::cerr << "warning: hidden-step recovery failed: " << err.what() << '\n';
        }
    }
    return report;
}

std::string detection_summary(const DetectionReport& report) {
    std::ostringstream out;
    out << "slope-change test (alpha = " << report.alpha << ")\n";
    out << "  free fit:        q = " << report.fit_free.q << " +/- " << report.fit_free.se_q
        << "  (events: " << report.fit_free.n_events << ")\n";
    out << "  conditional fit: q = " << report.fit_cond.q << " +/- " << report.fit_cond.se_q
        << "  (events: " << report.fit_cond.n_events << ")\n";
    out << "  slope difference = " << report.slope_diff << ", z = " << report.z
        << ", p = " << report.p_value << "\n";
    out << "  verdict: " << verdict_name(report.verdict) << "\n";
    if (report.recovered_q0) {
        out << "  recovered first step: q0 = " << *report.recovered_q0 << " +/- "
            << *report.recovered_se_q0 << ", lambda0 = " << *report.recovered_lambda0
            << " (se of log lambda0: " << *report.recovered_se_log_lambda0 << ")\n";
    }
    return out.str();
}

}  // namespace multistage
