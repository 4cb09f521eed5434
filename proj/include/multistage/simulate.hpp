#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "multistage/event_table.hpp"
#include "multistage/model.hpp"

namespace multistage {

/// Cohort simulation request. Identical specs produce bit-identical event
/// tables regardless of how many worker threads are used.
struct CohortSpec {
    std::int64_t n_subjects = 0;
    double follow_up = 0.0;
    std::uint64_t seed = 0;
    std::variant<SharedStepModel, IndependentModel> model;

    CohortSpec(std::int64_t subjects, double follow_up_age, std::uint64_t rng_seed,
               std::variant<SharedStepModel, IndependentModel> cohort_model);
};

/// Inverse-cdf draw from a step law; u must lie in (0,1).
double sample_step_time(const StepLaw& law, double u);

/// Raw cohort: one record per (subject, disease), entry_age 0, censored at
/// follow_up. n_threads <= 0 picks the hardware concurrency.
EventTable simulate(const CohortSpec& spec, int n_threads = 0);

/// Restriction to subjects with an observed `given` event: each target record
/// is left-truncated at the `given` onset age, and subjects whose target event
/// precedes (or ties) the `given` event are excluded.
EventTable conditional_view(const EventTable& table, std::string_view target,
                            std::string_view given);

namespace detail {
/// Deterministic substream uniform in (0,1). Every draw is a pure function of
/// (seed, subject, purpose), so parallel generation is order-independent.
double substream_uniform(std::uint64_t seed, std::uint64_t subject, std::uint64_t purpose);
}  // namespace detail

}  // namespace multistage
