#pragma once

#include <vector>

namespace multistage {

/// Constant-hazard shared-step model: first step with rate lambda0, second
/// steps with rates lambdas[j]. Operations rescale internally to units where
/// the first-step rate is 1 (t -> lambda0*t, lambda_j -> lambda_j/lambda0).
struct ExpSharedModel {
    double lambda0;
    std::vector<double> lambdas;

    ExpSharedModel(double first_rate, std::vector<double> second_rates);

    std::size_t size() const { return lambdas.size(); }
    double mean_rate() const;  // (1/m) sum lambda_j, original units
};

/// Two-step cdf in rescaled units (first-step rate 1):
///   F(t) = 1 - (e^(-a t) - a e^(-t)) / (1 - a)
/// evaluated in a form that is stable across the removable singularity a = 1.
double exp_disease_cdf(double lambda_j, double t);

/// Same cdf in original units, first-step rate lambda0.
double exp_two_step_cdf(double lambda0, double lambda_j, double t);

double exp_prob_zero_shared(const ExpSharedModel& model, double t);
double exp_prob_zero_indep(const ExpSharedModel& model, double t);

/// P(both j and k by t) = F_{lj} + F_{lk} - F_{lj+lk}, original units.
double exp_joint_cdf(double lambda0, double lambda_j, double lambda_k, double t);

/// exp_joint_cdf divided by the marginal cdf of the conditioning disease.
double exp_conditional_cdf(double lambda0, double lambda_target, double lambda_given,
                           double t);

/// Leading-order expansions for small t (valid while t*max rate << 1).
double exp_joint_small_t(double lambda0, double lambda_j, double lambda_k, double t);
double exp_small_t_marginal(double lambda0, double lambda_j, double t);

/// Age where the leading-order ratio joint/marginal reaches 1 (= 3/(2 lambda_k)).
/// Only meaningful while the small-t expansions still hold at that age.
double exp_conditional_marginal_crossover(double lambda_k);

double exp_expected_n(const ExpSharedModel& model, double t);
double exp_expected_n_given_positive_shared(const ExpSharedModel& model, double t);
double exp_expected_n_given_positive_indep(const ExpSharedModel& model, double t);

}  // namespace multistage
