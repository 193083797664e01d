#include "apter/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "apter/apter.hpp"
#include "apter/error.hpp"

namespace apter {

std::vector<double> marginal_utilities(const SurvivalDataset& data, std::span<const double> response) {
    if (response.size() != data.size()) {
        throw ArgumentError("response has length " + std::to_string(response.size()) + ", dataset has " +
                            std::to_string(data.size()) + " subjects");
    }
    std::vector<double> m(data.dim(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& x = data[i].covariates;
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += response[i] * x[j];
    }
    return m;
}

ScreeningResult sis(const SurvivalDataset& data, std::span<const double> response, std::size_t count) {
    std::vector<std::size_t> all(data.dim());
    std::iota(all.begin(), all.end(), 0);
    if (count > data.dim()) {
        throw ArgumentError("screening count " + std::to_string(count) + " exceeds dimension " +
                            std::to_string(data.dim()));
    }
    return sis(data, response, count, all);
}

ScreeningResult sis(const SurvivalDataset& data, std::span<const double> response, std::size_t count,
                    std::span<const std::size_t> candidates) {
    if (count < 1) throw ArgumentError("screening count must be >= 1");
    if (count > candidates.size()) {
        throw ArgumentError("screening count " + std::to_string(count) + " exceeds the " +
                            std::to_string(candidates.size()) + " candidate features");
    }
    for (std::size_t f : candidates) {
        if (f >= data.dim()) throw ArgumentError("candidate feature out of range");
    }
    const auto m = marginal_utilities(data, response);

    std::vector<std::size_t> order(candidates.begin(), candidates.end());
    auto by_magnitude = [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(m[a]), mb = std::abs(m[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), by_magnitude);
    order.resize(count);

    ScreeningResult out;
    out.retained = std::move(order);
    out.scores.reserve(count);
    for (std::size_t f : out.retained) out.scores.push_back(std::abs(m[f]));
    out.iterations = 1;
    return out;
}

NuChooser theoretical_nu_chooser() {
    return [](const ExpertBank& bank, const SurvivalDataset& train) {
        // A single signed expert has no theoretical rate; any nu gives p = 1.
        return bank.size() < 2 ? 1.0 : theoretical_nu(bank.size(), train.size());
    };
}

ScreeningResult isis(const SurvivalDataset& data, std::size_t per_step, std::size_t target,
                     const NuChooser& nu_policy) {
    if (per_step < 1) throw ArgumentError("isis: per-step count must be >= 1");
    if (per_step > target) throw ArgumentError("isis: per-step count exceeds target");
    if (target > data.dim()) throw ArgumentError("isis: target exceeds dimension");

    const auto times = data.times();
    ScreeningResult out = sis(data, times, per_step);

    std::vector<bool> taken(data.dim(), false);
    for (std::size_t f : out.retained) taken[f] = true;

    while (out.retained.size() < target && out.iterations < kMaxIsisIterations) {
        auto bank = build_signed(data, out.retained);
        auto model = train(bank, data, nu_policy(bank, data));
        const auto semi_response = predict(model, data);

        std::vector<std::size_t> remaining;
        for (std::size_t f = 0; f < data.dim(); ++f) {
            if (!taken[f]) remaining.push_back(f);
        }
        const std::size_t count = std::min(per_step, remaining.size());
        auto step = sis(data, semi_response, count, remaining);
        ++out.iterations;

        std::size_t added = 0;
        for (std::size_t i = 0; i < step.retained.size(); ++i) {
            const std::size_t f = step.retained[i];
            if (taken[f]) continue;
            taken[f] = true;
            out.retained.push_back(f);
            out.scores.push_back(step.scores[i]);
            ++added;
        }
        if (added == 0) break;
    }
    if (out.retained.size() > target) {
        out.retained.resize(target);
        out.scores.resize(target);
    }
    return out;
}

SurvivalDataset standardize_columns(const SurvivalDataset& data) {
    std::vector<Standardization> stats(data.dim());
    for (std::size_t j = 0; j < data.dim(); ++j) stats[j] = fit_standardization(data, j);
    std::vector<SurvivalRecord> records = data.records();
    for (auto& r : records) {
        for (std::size_t j = 0; j < data.dim(); ++j) r.covariates[j] = (r.covariates[j] - stats[j].mean) / stats[j].sd;
    }
    return SurvivalDataset(std::move(records), data.dim());
}

}  // namespace apter
