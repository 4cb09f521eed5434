#include "multistage/model.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <set>
#include <stdexcept>

namespace multistage {

namespace {

void check_age(double t) {
    if (!(t >= 0.0)) throw std::domain_error("model: age must be >= 0");
}

void check_powers(std::initializer_list<double> powers) {
    for (double p : powers)
        if (!(p > -1.0)) throw std::domain_error("model: powers must be > -1");
}

// Integrates f0(s) * g(t - s) over [0, t], splitting at the support kinks of
// the clamped power-law cdfs so the adaptive rule only ever sees smooth pieces.
double convolve_with_first(const StepLaw& first, const std::function<double(double)>& g,
                           double t, const QuadratureSpec& spec,
                           const std::vector<double>& extra_breaks) {
    if (t == 0.0) return 0.0;

    std::vector<double> cuts{0.0, t};
    const double first_end = first.support_end();
    if (first_end > 0.0 && first_end < t) cuts.push_back(first_end);
    for (double b : extra_breaks)
        if (b > 0.0 && b < t) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto integrand = [&](double s) { return first.pdf(s) * g(t - s); };

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += integrate(integrand, cuts[i], cuts[i + 1], spec);
    return total;
}

std::vector<double> second_step_breaks(double t, std::initializer_list<const StepLaw*> seconds) {
    std::vector<double> breaks;
    for (const StepLaw* law : seconds) {
        const double end = law->support_end();
        if (std::isfinite(end) && t - end > 0.0) breaks.push_back(t - end);
    }
    return breaks;
}

bool closed_form_exact(const StepLaw& first, const StepLaw& second, double t) {
    return first.kind == StepLawKind::PowerLawCdf &&
           second.kind == StepLawKind::PowerLawCdf && t <= first.support_end() &&
           t <= second.support_end();
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

// Marginal cdf of a two-step chain; closed form where it is exact.
double two_step_cdf(const StepLaw& first, const StepLaw& second, double t,
                    const QuadratureSpec& spec) {
    check_age(t);
    if (t == 0.0) return 0.0;
    if (closed_form_exact(first, second, t)) {
        const double value = first.lambda * second.lambda * coeff_c(first.q, second.q) *
                             std::pow(t, first.q + second.q + 2.0);
        return clamp_probability(value);
    }
    return disease_cdf_numeric(first, second, t, spec);
}

}  // namespace

SharedStepModel::SharedStepModel(StepLaw first_step,
                                 std::vector<std::pair<std::string, StepLaw>> disease_laws)
    : first(first_step), diseases(std::move(disease_laws)) {
    std::set<std::string> names;
    for (const auto& [name, law] : diseases) {
        if (name.empty())
            throw std::invalid_argument("SharedStepModel: disease names must be non-empty");
        if (!names.insert(name).second)
            throw std::invalid_argument("SharedStepModel: duplicate disease name '" + name + "'");
    }
}

std::size_t SharedStepModel::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < diseases.size(); ++i)
        if (diseases[i].first == name) return i;
    throw std::invalid_argument("SharedStepModel: unknown disease '" + std::string(name) + "'");
}

const StepLaw& SharedStepModel::disease_law(std::string_view name) const {
    return diseases[index_of(name)].second;
}

IndependentModel::IndependentModel(std::vector<Chain> chains) : diseases(std::move(chains)) {
    std::set<std::string> names;
    for (const auto& chain : diseases) {
        if (chain.name.empty())
            throw std::invalid_argument("IndependentModel: disease names must be non-empty");
        if (!names.insert(chain.name).second)
            throw std::invalid_argument("IndependentModel: duplicate disease name '" +
                                        chain.name + "'");
    }
}

IndependentModel independent_from_shared(const SharedStepModel& model) {
    std::vector<IndependentModel::Chain> chains;
    chains.reserve(model.diseases.size());
    for (const auto& [name, law] : model.diseases)
        chains.push_back({name, model.first, law});
    return IndependentModel(std::move(chains));
}

double coeff_c(double q0, double qa) {
    check_powers({q0, qa});
    return std::exp(log_gamma(q0 + 2.0) + log_gamma(qa + 2.0) - log_gamma(q0 + qa + 3.0));
}

double coeff_c_joint(double q0, double qj, double qk) {
    check_powers({q0, qj, qk});
    return std::exp(log_gamma(q0 + 2.0) + log_gamma(qj + qk + 3.0) -
                    log_gamma(q0 + qj + qk + 4.0));
}

KappaCoefficients coeff_kappa(double q0, double qj, double qk) {
    check_powers({q0, qj, qk});
    const double log_cj = std::log(coeff_c(q0, qj));
    const double log_ck = std::log(coeff_c(q0, qk));
    const double log_cjk = std::log(coeff_c_joint(q0, qj, qk));
    return {std::exp(log_cjk - log_cj), std::exp(log_cjk - log_ck),
            std::exp(log_cj + log_ck - log_cjk)};
}

double disease_cdf_closed(const SharedStepModel& model, std::string_view disease, double t) {
    check_age(t);
    const StepLaw& second = model.disease_law(disease);
    if (model.first.kind != StepLawKind::PowerLawCdf ||
        second.kind != StepLawKind::PowerLawCdf)
        throw std::invalid_argument(
            "disease_cdf_closed: closed form requires PowerLawCdf laws; "
            "use disease_cdf_numeric instead");
    const double value = model.first.lambda * second.lambda *
                         coeff_c(model.first.q, second.q) *
                         std::pow(t, model.first.q + second.q + 2.0);
    return clamp_probability(value);
}

double disease_cdf_numeric(const StepLaw& first, const StepLaw& second, double t,
                           const QuadratureSpec& spec) {
    check_age(t);
    if (t == 0.0) return 0.0;
    auto g = [&](double u) { return second.cdf(u); };
    const double value =
        convolve_with_first(first, g, t, spec, second_step_breaks(t, {&second}));
    return clamp_probability(value);
}

double disease_cdf(const SharedStepModel& model, std::string_view disease, double t,
                   const QuadratureSpec& spec) {
    return two_step_cdf(model.first, model.disease_law(disease), t, spec);
}

double joint_cdf_closed(const SharedStepModel& model, std::string_view j,
                        std::string_view k, double t) {
    check_age(t);
    if (j == k) throw std::invalid_argument("joint_cdf: diseases j and k must differ");
    const StepLaw& sj = model.disease_law(j);
    const StepLaw& sk = model.disease_law(k);
    if (model.first.kind != StepLawKind::PowerLawCdf ||
        sj.kind != StepLawKind::PowerLawCdf || sk.kind != StepLawKind::PowerLawCdf)
        throw std::invalid_argument(
            "joint_cdf_closed: closed form requires PowerLawCdf laws; "
            "use joint_cdf_numeric instead");
    const double value = model.first.lambda * sj.lambda * sk.lambda *
                         coeff_c_joint(model.first.q, sj.q, sk.q) *
                         std::pow(t, model.first.q + sj.q + sk.q + 3.0);
    return clamp_probability(value);
}

double joint_cdf_numeric(const StepLaw& first, const StepLaw& second_j,
                         const StepLaw& second_k, double t, const QuadratureSpec& spec) {
    check_age(t);
    if (t == 0.0) return 0.0;
    auto g = [&](double u) { return second_j.cdf(u) * second_k.cdf(u); };
    const double value = convolve_with_first(first, g, t, spec,
                                             second_step_breaks(t, {&second_j, &second_k}));
    return clamp_probability(value);
}

double joint_cdf(const SharedStepModel& model, std::string_view j, std::string_view k,
                 double t, const QuadratureSpec& spec) {
    check_age(t);
    if (j == k) throw std::invalid_argument("joint_cdf: diseases j and k must differ");
    const StepLaw& sj = model.disease_law(j);
    const StepLaw& sk = model.disease_law(k);
    if (closed_form_exact(model.first, sj, t) && t <= sk.support_end() &&
        sk.kind == StepLawKind::PowerLawCdf)
        return joint_cdf_closed(model, j, k, t);
    return joint_cdf_numeric(model.first, sj, sk, t, spec);
}

double conditional_cdf(const SharedStepModel& model, std::string_view target,
                       std::string_view given, double t, const QuadratureSpec& spec) {
    const double denom = disease_cdf(model, given, t, spec);
    if (!(denom > 0.0))
        throw std::domain_error("conditional_cdf: undefined, F_given(t) = 0");
    return joint_cdf(model, target, given, t, spec) / denom;
}

double first_step_ratio(const SharedStepModel& model, std::string_view j,
                        std::string_view k, double t, const QuadratureSpec& spec) {
    const double denom = joint_cdf(model, j, k, t, spec);
    if (!(denom > 0.0))
        throw std::domain_error("first_step_ratio: undefined, F_jk(t) = 0");
    return disease_cdf(model, j, t, spec) * disease_cdf(model, k, t, spec) / denom;
}

double generating_function(const SharedStepModel& model, double s, double t,
                           const QuadratureSpec& spec) {
    check_age(t);
    const double es1 = std::expm1(s);  // e^s - 1
    auto g = [&](double u) {
        double prod = 1.0;
        for (const auto& [name, law] : model.diseases) prod *= 1.0 + es1 * law.cdf(u);
        return prod;
    };
    std::vector<double> breaks;
    for (const auto& [name, law] : model.diseases) {
        const double end = law.support_end();
        if (std::isfinite(end) && t - end > 0.0) breaks.push_back(t - end);
    }
    return model.first.survival(t) + convolve_with_first(model.first, g, t, spec, breaks);
}

double expected_n(const SharedStepModel& model, double t, const QuadratureSpec& spec) {
    check_age(t);
    double sum = 0.0;
    for (const auto& [name, law] : model.diseases)
        sum += two_step_cdf(model.first, law, t, spec);
    return sum;
}

double expected_n(const IndependentModel& model, double t, const QuadratureSpec& spec) {
    check_age(t);
    double sum = 0.0;
    for (const auto& chain : model.diseases)
        sum += two_step_cdf(chain.first, chain.second, t, spec);
    return sum;
}

double variance_n(const SharedStepModel& model, double t, const QuadratureSpec& spec) {
    check_age(t);
    const std::size_t m = model.diseases.size();
    std::vector<double> marginal(m);
    for (std::size_t i = 0; i < m; ++i)
        marginal[i] = two_step_cdf(model.first, model.diseases[i].second, t, spec);

    double var = 0.0;
    for (double f : marginal) var += f * (1.0 - f);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double fjk =
                joint_cdf(model, model.diseases[a].first, model.diseases[b].first, t, spec);
            var += 2.0 * (fjk - marginal[a] * marginal[b]);
        }
    }
    return var;
}

double variance_n_indep(const IndependentModel& model, double t,
                        const QuadratureSpec& spec) {
    check_age(t);
    double var = 0.0;
    for (const auto& chain : model.diseases) {
        const double f = two_step_cdf(chain.first, chain.second, t, spec);
        var += f * (1.0 - f);
    }
    return var;
}

double prob_zero(const SharedStepModel& model, double t, const QuadratureSpec& spec) {
    check_age(t);
    // Appendix form with the first-step pdf inside the integral:
    //   P(N=0) = S_0(t) + integral f_0(s) prod_j S_0j(t-s) ds.
    auto g = [&](double u) {
        double prod = 1.0;
        for (const auto& [name, law] : model.diseases) prod *= law.survival(u);
        return prod;
    };
    std::vector<double> breaks;
    for (const auto& [name, law] : model.diseases) {
        const double end = law.support_end();
        if (std::isfinite(end) && t - end > 0.0) breaks.push_back(t - end);
    }
    const double value =
        model.first.survival(t) + convolve_with_first(model.first, g, t, spec, breaks);
    return clamp_probability(value);
}

double prob_zero_indep(const IndependentModel& model, double t,
                       const QuadratureSpec& spec) {
    check_age(t);
    double prod = 1.0;
    for (const auto& chain : model.diseases)
        prod *= 1.0 - two_step_cdf(chain.first, chain.second, t, spec);
    return clamp_probability(prod);
}

double expected_n_given_positive(const SharedStepModel& model, double t,
                                 const QuadratureSpec& spec) {
    const double p0 = prob_zero(model, t, spec);
    if (!(p0 < 1.0))
        throw std::domain_error("expected_n_given_positive: P(N=0) = 1, undefined");
    return expected_n(model, t, spec) / (1.0 - p0);
}

double expected_n_given_positive_indep(const IndependentModel& model, double t,
                                       const QuadratureSpec& spec) {
    const double p0 = prob_zero_indep(model, t, spec);
    if (!(p0 < 1.0))
        throw std::domain_error("expected_n_given_positive: P(N=0) = 1, undefined");
    return expected_n(model, t, spec) / (1.0 - p0);
}

MomentReport moment_report(const SharedStepModel& model, double t,
                           const QuadratureSpec& spec) {
    MomentReport report;
    report.t = t;
    report.expected_n = expected_n(model, t, spec);
    report.variance_n = variance_n(model, t, spec);
    report.prob_zero = prob_zero(model, t, spec);
    report.expected_n_given_positive =
        report.prob_zero < 1.0 ? report.expected_n / (1.0 - report.prob_zero)
                               : std::numeric_limits<double>::quiet_NaN();
    return report;
}

}  // namespace multistage
