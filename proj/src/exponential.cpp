#include "multistage/exponential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multistage/numeric.hpp"

namespace multistage {

namespace {

void check_rate(double rate) {
    if (!std::isfinite(rate) || !(rate > 0.0))
        throw std::invalid_argument("ExpSharedModel: rates must be positive and finite");
}

void check_age(double t) {
    if (!(t >= 0.0)) throw std::domain_error("exponential model: age must be >= 0");
}

// F(t; a) = 1 - (e^(-a t) - a e^(-t)) / (1 - a) in rescaled units.
// Written as -expm1(-t) - t e^(-t) phi((1-a)t), phi(x) = (e^x-1)/x, which is
// exact at a = 1 and keeps full relative accuracy for t -> 0 where F ~ a t^2/2.
double chain_cdf_rescaled(double a, double t) {
    if (t == 0.0) return 0.0;
    const double x = (1.0 - a) * t;
    double value;
    if (std::abs(x) < 30.0) {
        value = -std::expm1(-t) - t * std::exp(-t) * expm1_over_x(x);
    } else {
        value = -std::expm1(-t) - (std::exp(-a * t) - std::exp(-t)) / (1.0 - a);
    }
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace

ExpSharedModel::ExpSharedModel(double first_rate, std::vector<double> second_rates)
    : lambda0(first_rate), lambdas(std::move(second_rates)) {
    check_rate(lambda0);
    if (lambdas.empty())
        throw std::invalid_argument("ExpSharedModel: needs at least one disease");
    for (double rate : lambdas) check_rate(rate);
}

double ExpSharedModel::mean_rate() const {
    double sum = 0.0;
    for (double rate : lambdas) sum += rate;
    return sum / static_cast<double>(lambdas.size());
}

double exp_disease_cdf(double lambda_j, double t) {
    check_rate(lambda_j);
    check_age(t);
    return chain_cdf_rescaled(lambda_j, t);
}

double exp_two_step_cdf(double lambda0, double lambda_j, double t) {
    check_rate(lambda0);
    check_rate(lambda_j);
    check_age(t);
    return chain_cdf_rescaled(lambda_j / lambda0, lambda0 * t);
}

double exp_prob_zero_shared(const ExpSharedModel& model, double t) {
    check_age(t);
    // P(0) = (e^(-m lbar t) - m lbar e^(-t)) / (1 - m lbar) in rescaled units,
    // which is the survival of a two-step chain with second rate m*lbar.
    const double m_lbar = static_cast<double>(model.size()) * model.mean_rate() / model.lambda0;
    return 1.0 - chain_cdf_rescaled(m_lbar, model.lambda0 * t);
}

double exp_prob_zero_indep(const ExpSharedModel& model, double t) {
    check_age(t);
    double log_prod = 0.0;
    for (double rate : model.lambdas)
        log_prod += std::log1p(-chain_cdf_rescaled(rate / model.lambda0, model.lambda0 * t));
    return std::exp(log_prod);
}

double exp_joint_cdf(double lambda0, double lambda_j, double lambda_k, double t) {
    const double value = exp_two_step_cdf(lambda0, lambda_j, t) +
                         exp_two_step_cdf(lambda0, lambda_k, t) -
                         exp_two_step_cdf(lambda0, lambda_j + lambda_k, t);
    return std::clamp(value, 0.0, 1.0);
}

double exp_conditional_cdf(double lambda0, double lambda_target, double lambda_given,
                           double t) {
    const double denom = exp_two_step_cdf(lambda0, lambda_given, t);
    if (!(denom > 0.0))
        throw std::domain_error("exp_conditional_cdf: undefined, F_given(t) = 0");
    return exp_joint_cdf(lambda0, lambda_target, lambda_given, t) / denom;
}

double exp_joint_small_t(double lambda0, double lambda_j, double lambda_k, double t) {
    check_age(t);
    return lambda0 * lambda_j * lambda_k * t * t * t / 3.0;
}

double exp_small_t_marginal(double lambda0, double lambda_j, double t) {
    check_age(t);
    return lambda0 * lambda_j * t * t / 2.0;
}

double exp_conditional_marginal_crossover(double lambda_k) {
    check_rate(lambda_k);
    return 1.5 / lambda_k;
}

double exp_expected_n(const ExpSharedModel& model, double t) {
    check_age(t);
    double sum = 0.0;
    for (double rate : model.lambdas)
        sum += chain_cdf_rescaled(rate / model.lambda0, model.lambda0 * t);
    return sum;
}

double exp_expected_n_given_positive_shared(const ExpSharedModel& model, double t) {
    const double m_lbar = static_cast<double>(model.size()) * model.mean_rate() / model.lambda0;
    const double denom = chain_cdf_rescaled(m_lbar, model.lambda0 * t);  // 1 - P(0)
    if (!(denom > 0.0))
        throw std::domain_error("exp_expected_n_given_positive_shared: P(N=0) = 1");
    return exp_expected_n(model, t) / denom;
}

double exp_expected_n_given_positive_indep(const ExpSharedModel& model, double t) {
    check_age(t);
    double log_prod = 0.0;
    for (double rate : model.lambdas)
        log_prod += std::log1p(-chain_cdf_rescaled(rate / model.lambda0, model.lambda0 * t));
    const double denom = -std::expm1(log_prod);  // 1 - prod S_j
    if (!(denom > 0.0))
        throw std::domain_error("exp_expected_n_given_positive_indep: P(N=0) = 1");
    return exp_expected_n(model, t) / denom;
}

}  // namespace multistage
