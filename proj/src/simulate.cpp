#include "multistage/simulate.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace multistage {

namespace {

inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::size_t model_size(const CohortSpec& spec) {
    if (const auto* shared = std::get_if<SharedStepModel>(&spec.model))
        return shared->diseases.size();
    return std::get<IndependentModel>(spec.model).diseases.size();
}

}  // namespace

namespace detail {

double substream_uniform(std::uint64_t seed, std::uint64_t subject, std::uint64_t purpose) {
    const std::uint64_t z = mix64(mix64(mix64(seed) ^ subject) ^ purpose);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

CohortSpec::CohortSpec(std::int64_t subjects, double follow_up_age, std::uint64_t rng_seed,
                       std::variant<SharedStepModel, IndependentModel> cohort_model)
    : n_subjects(subjects), follow_up(follow_up_age), seed(rng_seed),
      model(std::move(cohort_model)) {
    if (n_subjects <= 0)
        throw std::invalid_argument("CohortSpec: n_subjects must be positive");
    if (!(follow_up >= 0.0))
        throw std::invalid_argument("CohortSpec: follow_up must be >= 0");
}

double sample_step_time(const StepLaw& law, double u) {
    return law.quantile(u);
}

EventTable simulate(const CohortSpec& spec, int n_threads) {
    const std::size_t m = model_size(spec);
    const std::int64_t n = spec.n_subjects;

    EventTable table;
    table.records.resize(static_cast<std::size_t>(n) * m);

    auto fill_range = [&](std::int64_t begin, std::int64_t end) {
        const double horizon = spec.follow_up;
        if (const auto* shared = std::get_if<SharedStepModel>(&spec.model)) {
            for (std::int64_t sid = begin; sid < end; ++sid) {
                const double t0 = sample_step_time(
                    shared->first, detail::substream_uniform(spec.seed, sid, 0));
                for (std::size_t d = 0; d < m; ++d) {
                    const double onset =
                        t0 + sample_step_time(shared->diseases[d].second,
                                              detail::substream_uniform(spec.seed, sid, 1 + d));
                    EventRecord& rec = table.records[static_cast<std::size_t>(sid) * m + d];
                    rec.subject_id = sid;
                    rec.disease = shared->diseases[d].first;
                    rec.entry_age = 0.0;
                    if (onset <= horizon) {
                        rec.exit_age = onset;
                        rec.event = true;
                    } else {
                        rec.exit_age = horizon;
                        rec.event = false;
                    }
                }
            }
        } else {
            const auto& indep = std::get<IndependentModel>(spec.model);
            for (std::int64_t sid = begin; sid < end; ++sid) {
                for (std::size_t d = 0; d < m; ++d) {
                    const auto& chain = indep.diseases[d];
                    const double onset =
                        sample_step_time(chain.first,
                                         detail::substream_uniform(spec.seed, sid, 1 + 2 * d)) +
                        sample_step_time(chain.second,
                                         detail::substream_uniform(spec.seed, sid, 2 + 2 * d));
                    EventRecord& rec = table.records[static_cast<std::size_t>(sid) * m + d];
                    rec.subject_id = sid;
                    rec.disease = chain.name;
                    rec.entry_age = 0.0;
                    if (onset <= horizon) {
                        rec.exit_age = onset;
                        rec.event = true;
                    } else {
                        rec.exit_age = horizon;
                        rec.event = false;
                    }
                }
            }
        }
    };

    int workers = n_threads;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, n));

    if (workers == 1) {
        fill_range(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::int64_t chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t begin = w * chunk;
            const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
            if (begin >= end) break;
            pool.emplace_back(fill_range, begin, end);
        }
        for (auto& worker : pool) worker.join();
    }

    return table;
}

EventTable conditional_view(const EventTable& table, std::string_view target,
                            std::string_view given) {
    if (target == given)
        throw std::invalid_argument("conditional_view: target and given must differ");

    std::unordered_map<std::int64_t, double> given_onset;
    for (const auto& record : table.records)
        if (record.disease == given && record.event)
            given_onset.emplace(record.subject_id, record.exit_age);

    EventTable view;
    for (const auto& record : table.records) {
        if (record.disease != target) continue;
        const auto it = given_onset.find(record.subject_id);
        if (it == given_onset.end()) continue;
        const double onset_given = it->second;
        if (record.event && record.exit_age <= onset_given) continue;  // target first
        EventRecord out = record;
        out.entry_age = onset_given;
        view.records.push_back(std::move(out));
    }
    return view;
}

}  // namespace multistage
