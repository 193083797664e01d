#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "apter/survival.hpp"
#include "oracles.hpp"

namespace fixtures {

// Dataset from times, events and covariate rows.
inline apter::SurvivalDataset make(const std::vector<double>& times, const std::vector<int>& events,
                                   const std::vector<std::vector<double>>& rows) {
    std::vector<apter::SurvivalRecord> records;
    for (std::size_t i = 0; i < times.size(); ++i) records.push_back({rows[i], times[i], events[i] == 1});
    return apter::SurvivalDataset(std::move(records), rows.front().size());
}

// Single covariate equal to `feature`.
inline apter::SurvivalDataset make1(const std::vector<double>& times, const std::vector<int>& events,
                                    const std::vector<double>& feature) {
    std::vector<std::vector<double>> rows;
    for (double v : feature) rows.push_back({v});
    return make(times, events, rows);
}

inline apter::SurvivalDataset make1(const std::vector<double>& times, const std::vector<int>& events) {
    return make1(times, events, std::vector<double>(times.size(), 0.0));
}

inline std::vector<oracle::Subject> subjects(const apter::SurvivalDataset& d) {
    std::vector<oracle::Subject> s;
    for (const auto& r : d.records()) s.push_back({r.time, r.event});
    return s;
}

// Random instance with deliberate ties: times and covariates drawn from
// small integer grids, censoring with probability `censor`.
inline apter::SurvivalDataset random_instance(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                              double censor = 0.3) {
    std::uniform_int_distribution<int> time_grid(1, static_cast<int>(n));
    std::uniform_int_distribution<int> value_grid(-4, 4);
    std::bernoulli_distribution censored(censor);
    std::vector<apter::SurvivalRecord> records(n);
    for (auto& r : records) {
        r.time = time_grid(rng) * 0.5;
        r.event = !censored(rng);
        r.covariates.resize(d);
        for (double& v : r.covariates) v = value_grid(rng) * 0.25;
    }
    return apter::SurvivalDataset(std::move(records), d);
}

}  // namespace fixtures
