#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "multistage/model.hpp"

namespace multistage {

/// Slope-recovery demonstration grid: for q0 = 0..5 with q0 + qj = 6, fit the
/// conditional power of disease j after disease k on cohorts simulated from a
/// shared-step model and from its independent counterpart. Shared cohorts
/// should recover q = 6 - q0, independent cohorts q = 7 with larger errors.
struct Fig2Config {
    std::int64_t subjects = 1'000'000;
    double follow_up = 70.0;
    std::uint64_t seed = 20260801;
    int threads = 0;
};

struct Fig2Cell {
    int q0 = 0;
    double q_shared = 0.0;
    double se_shared = 0.0;
    std::int64_t events_shared = 0;
    double q_indep = 0.0;
    double se_indep = 0.0;
    std::int64_t events_indep = 0;
};

/// Cell model: shared first step reaching cdf 0.95 at follow_up, disease j
/// with power qj = 6 - q0 reaching 0.9, and an exponential companion disease
/// k with rate 2/follow_up. Rates are tuned so the q0 = 5 cell still has
/// well over 500 joint events per million subjects.
SharedStepModel fig2_shared_model(int q0, double follow_up);

std::vector<Fig2Cell> run_fig2(const Fig2Config& config,
                               const std::function<void(const std::string&)>& progress = {});

}  // namespace multistage
