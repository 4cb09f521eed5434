#include "multistage/survival.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace multistage {

namespace {

// Kahan-compensated accumulation in extended precision; the MLE gradient is
// a near-complete cancellation of O(n)-sized sums, so naive double summation
// cannot reach the 1e-8 gradient-norm stopping rule on large cohorts.
struct Accumulator {
    long double sum = 0.0L;
    long double carry = 0.0L;

    void add(long double value) {
        const long double y = value - carry;
        const long double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return static_cast<double>(sum); }
};

struct Exposure {
    std::vector<double> log_entry;  // log(entry/T), -inf when entry == 0
    std::vector<double> log_exit;   // log(exit/T)
    std::vector<double> log_event_age;
    double time_scale = 1.0;
    std::int64_t n_events = 0;
    std::int64_t n_used = 0;
};

std::vector<const EventRecord*> select_disease(const EventTable& table,
                                               std::string_view disease) {
    std::vector<const EventRecord*> out;
    for (const auto& record : table.records)
        if (record.disease == disease) out.push_back(&record);
    return out;
}

Exposure prepare_exposure(const std::vector<const EventRecord*>& records,
                          std::string_view disease) {
    Exposure exp;
    std::size_t dropped = 0;
    double max_exit = 0.0;
    for (const auto* record : records) {
        if (!(record->exit_age > record->entry_age)) {
            ++dropped;
            continue;
        }
        max_exit = std::max(max_exit, record->exit_age);
    }
    if (dropped > 0)
        std::cerr << "warning: dropped " << dropped << " zero-exposure record(s) for disease '"
                  << disease << "'\n";
    if (max_exit <= 0.0)
        throw std::invalid_argument("fit: no usable exposure for disease '" +
                                    std::string(disease) + "'");
    exp.time_scale = max_exit;

    for (const auto* record : records) {
        if (!(record->exit_age > record->entry_age)) continue;
        exp.log_exit.push_back(std::log(record->exit_age / max_exit));
        exp.log_entry.push_back(record->entry_age > 0.0
                                    ? std::log(record->entry_age / max_exit)
                                    : -std::numeric_limits<double>::infinity());
        if (record->event) {
            if (!(record->exit_age > 0.0))
                throw std::invalid_argument("fit: event ages must be positive");
            exp.log_event_age.push_back(std::log(record->exit_age / max_exit));
            ++exp.n_events;
        }
        ++exp.n_used;
    }
    return exp;
}

// A(p) = sum exit^p - entry^p, with first and second derivatives in p, all on
// the rescaled time axis (ages divided by time_scale).
struct ExposureMoments {
    double a = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

ExposureMoments exposure_moments(const Exposure& exp, double p) {
    Accumulator a, a1, a2;
    const std::size_t n = exp.log_exit.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = exp.log_exit[i];
        const long double ex = std::exp(static_cast<long double>(p) * lx);
        a.add(ex);
        a1.add(ex * lx);
        a2.add(ex * lx * lx);
        const double le = exp.log_entry[i];
        if (std::isfinite(le)) {
            const long double ee = std::exp(static_cast<long double>(p) * le);
            a.add(-ee);
            a1.add(-ee * le);
            a2.add(-ee * le * le);
        }
    }
    return {a.value(), a1.value(), a2.value()};
}

double sum_log_event_ages(const Exposure& exp) {
    Accumulator acc;
    for (double value : exp.log_event_age) acc.add(value);
    return acc.value();
}

// Ordinary least squares on (x, y); returns (slope, intercept).
std::pair<double, double> ols(const std::vector<std::array<double, 2>>& points) {
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) return {0.0, sy / n};
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

}  // namespace

double CumHazardCurve::eval(double age) const {
    double h = 0.0;
    for (const auto& point : points) {
        if (point.age > age) break;
        h = point.cum_hazard;
    }
    return h;
}

double CumHazardCurve::variance_at(double age) const {
    double v = 0.0;
    for (const auto& point : points) {
        if (point.age > age) break;
        v = point.variance;
    }
    return v;
}

CumHazardCurve nelson_aalen(const EventTable& table, std::string_view disease) {
    const auto records = select_disease(table, disease);
    if (records.empty())
        throw std::invalid_argument("nelson_aalen: no records for disease '" +
                                    std::string(disease) + "'");

    std::vector<double> entries, exits, event_ages;
    std::size_t dropped = 0;
    for (const auto* record : records) {
        if (!(record->exit_age > record->entry_age)) {
            ++dropped;
            continue;
        }
        entries.push_back(record->entry_age);
        exits.push_back(record->exit_age);
        if (record->event) event_ages.push_back(record->exit_age);
    }
    if (dropped > 0)
        std::cerr << "warning: dropped " << dropped << " zero-exposure record(s) for disease '"
                  << disease << "'\n";

    std::sort(entries.begin(), entries.end());
    std::sort(exits.begin(), exits.end());
    std::sort(event_ages.begin(), event_ages.end());

    CumHazardCurve curve;
    curve.disease = std::string(disease);

    double cum = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < event_ages.size();) {
        const double age = event_ages[i];
        std::size_t j = i;
        while (j < event_ages.size() && event_ages[j] == age) ++j;
        const double d = static_cast<double>(j - i);

        const auto n_entered = std::lower_bound(entries.begin(), entries.end(), age) -
                               entries.begin();
        const auto n_left = std::lower_bound(exits.begin(), exits.end(), age) - exits.begin();
        const double at_risk = static_cast<double>(n_entered - n_left);

        cum += d / at_risk;
        var += d / (at_risk * at_risk);
        curve.points.push_back({age, cum, var});
        i = j;
    }
    return curve;
}

LogLogPoints loglog_points(const CumHazardCurve& curve) {
    LogLogPoints out;
    for (const auto& point : curve.points) {
        if (point.age > 0.0 && point.cum_hazard > 0.0)
            out.points.push_back({std::log(point.age), std::log(point.cum_hazard)});
        else
            ++out.dropped;
    }
    return out;
}

FitResult fit_power_law_mle(const EventTable& table, std::string_view disease) {
    const auto records = select_disease(table, disease);
    if (records.empty())
        throw std::invalid_argument("fit_power_law_mle: no records for disease '" +
                                    std::string(disease) + "'");
    const Exposure exp = prepare_exposure(records, disease);
    const double events = static_cast<double>(exp.n_events);
    if (exp.n_events < 2)
        throw std::invalid_argument("fit_power_law_mle: needs at least 2 events, got " +
                                    std::to_string(exp.n_events));

    const double s_ev = sum_log_event_ages(exp);

    // Start from the log-log slope of the Nelson-Aalen curve when available.
    double q = 1.0;
    {
        const CumHazardCurve curve = nelson_aalen(table, disease);
        const LogLogPoints pts = loglog_points(curve);
        if (pts.points.size() >= 2) {
            const auto [slope, intercept] = ols(pts.points);
            (void)intercept;
            q = std::clamp(slope - 1.0, -0.9, 60.0);
        }
    }

    // Newton ascent on the profile likelihood in q; log lambda is profiled out
    // exactly each step, so the full gradient norm reduces to |dL/dq|.
    constexpr double kGradTol = 1e-8;
    constexpr int kMaxIter = 200;
    const double q_floor = -1.0 + 1e-9;

    auto profile_loglik = [&](double qq, const ExposureMoments& m) {
        return events * (std::log(events) - std::log(m.a)) +
               events * std::log(qq + 1.0) + qq * s_ev - events;
    };

    ExposureMoments m = exposure_moments(exp, q + 1.0);
    double loglik = profile_loglik(q, m);
    double grad = 0.0;
    bool converged = false;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double p = q + 1.0;
        grad = events / p + s_ev - events * (m.a1 / m.a);
        if (std::abs(grad) < kGradTol) {
            converged = true;
            break;
        }

        const double ratio1 = m.a1 / m.a;
        const double curvature = events / (p * p) + events * (m.a2 / m.a - ratio1 * ratio1);
        if (!(curvature > 0.0))
            throw std::runtime_error("fit_power_law_mle: non-positive curvature at q = " +
                                     std::to_string(q));

        double step = grad / curvature;
        step = std::clamp(step, -5.0, 5.0);
        while (q + step <= q_floor) step *= 0.5;

        double q_next = q + step;
        ExposureMoments m_next = exposure_moments(exp, q_next + 1.0);
        double loglik_next = profile_loglik(q_next, m_next);
        int halvings = 0;
        while (loglik_next < loglik - 1e-12 && halvings < 50) {
            step *= 0.5;
            q_next = q + step;
            m_next = exposure_moments(exp, q_next + 1.0);
            loglik_next = profile_loglik(q_next, m_next);
            ++halvings;
        }
        q = q_next;
        m = m_next;
        loglik = loglik_next;
    }

    if (!converged)
        throw std::runtime_error(
            "fit_power_law_mle: no convergence after " + std::to_string(kMaxIter) +
            " iterations (q = " + std::to_string(q) + ", |grad| = " + std::to_string(grad) +
            ", events = " + std::to_string(exp.n_events) + ")");

    // Observed information in (q, beta) with beta = log lambda (rescaled axis).
    const double p = q + 1.0;
    const double i_qq = events / (p * p) + events * (m.a2 / m.a);
    const double i_qb = events * (m.a1 / m.a);
    const double i_bb = events;
    const double det = i_qq * i_bb - i_qb * i_qb;
    if (!(det > 0.0))
        throw std::runtime_error("fit_power_law_mle: singular observed information");
    const double var_q = i_bb / det;
    const double var_b = i_qq / det;
    const double cov_qb = -i_qb / det;

    // Map back to the original time axis: log lambda = beta - (q+1) log T.
    const double log_t = std::log(exp.time_scale);
    const double beta = std::log(events) - std::log(m.a);

    FitResult fit;
    fit.q = q;
    fit.lambda = std::exp(beta - p * log_t);
    fit.se_q = std::sqrt(var_q);
    fit.se_log_lambda = std::sqrt(var_b - 2.0 * log_t * cov_qb + log_t * log_t * var_q);
    fit.cov_q_log_lambda = cov_qb - log_t * var_q;
    fit.log_likelihood = loglik - events * log_t;
    fit.n_events = exp.n_events;
    fit.n_at_risk = exp.n_used;
    return fit;
}

double power_law_log_likelihood(const EventTable& table, std::string_view disease,
                                double q, double lambda) {
    if (!(q > -1.0) || !(lambda > 0.0))
        throw std::domain_error("power_law_log_likelihood: requires q > -1 and lambda > 0");
    const auto records = select_disease(table, disease);
    if (records.empty())
        throw std::invalid_argument("power_law_log_likelihood: no records for disease '" +
                                    std::string(disease) + "'");
    const double p = q + 1.0;
    Accumulator acc;
    for (const auto* record : records) {
        if (!(record->exit_age > record->entry_age)) continue;
        acc.add(-static_cast<long double>(lambda) *
                (std::pow(static_cast<long double>(record->exit_age), p) -
                 std::pow(static_cast<long double>(record->entry_age), p)));
        if (record->event) {
            if (!(record->exit_age > 0.0))
                throw std::invalid_argument("power_law_log_likelihood: event age must be > 0");
            acc.add(std::log(lambda) + std::log(p) + q * std::log(record->exit_age));
        }
    }
    return acc.value();
}

ScoreVector power_law_score(const EventTable& table, std::string_view disease, double q,
                            double lambda) {
    if (!(q > -1.0) || !(lambda > 0.0))
        throw std::domain_error("power_law_score: requires q > -1 and lambda > 0");
    const auto records = select_disease(table, disease);
    const double p = q + 1.0;
    Accumulator d_q, d_beta;
    for (const auto* record : records) {
        if (!(record->exit_age > record->entry_age)) continue;
        const long double exit_p = std::pow(static_cast<long double>(record->exit_age), p);
        const long double entry_p =
            record->entry_age > 0.0 ? std::pow(static_cast<long double>(record->entry_age), p)
                                    : 0.0L;
        const long double exit_term = exit_p * std::log(record->exit_age);
        const long double entry_term =
            record->entry_age > 0.0 ? entry_p * std::log(record->entry_age) : 0.0L;
        d_q.add(-static_cast<long double>(lambda) * (exit_term - entry_term));
        d_beta.add(-static_cast<long double>(lambda) * (exit_p - entry_p));
        if (record->event) {
            d_q.add(1.0L / p + std::log(record->exit_age));
            d_beta.add(1.0L);
        }
    }
    return {d_q.value(), d_beta.value()};
}

void write_curve_csv(const CumHazardCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "age,H,var_H\n";
    for (const auto& point : curve.points)
        out << point.age << ',' << point.cum_hazard << ',' << point.variance << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace multistage
