#include "apter/apter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "apter/error.hpp"

namespace apter {

bool WeightVector::on_simplex(double tol) const {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

WeightVector WeightVector::uniform(std::size_t m) {
    return {std::vector<double>(m, 1.0 / static_cast<double>(m))};
}

void LossLedger::add(std::span<const double> round) {
    if (round.size() != cumulative.size()) throw ArgumentError("loss ledger: round has wrong length");
    for (std::size_t i = 0; i < round.size(); ++i) cumulative[i] += round[i];
    ++rounds;
}

namespace {

void require_sorted(const SurvivalDataset& data) {
    if (!is_time_sorted(data)) throw ArgumentError("dataset must be sorted by time (see sort_by_time)");
}

void require_nu(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ArgumentError("nu must be a positive finite number");
}

}  // namespace

RoundLoss round_loss(const ExpertBank& bank, const SurvivalDataset& sorted, std::size_t k) {
    require_sorted(sorted);
    if (k >= sorted.size()) throw ArgumentError("round index out of range");
    const auto past = past_event_set(sorted, sorted.time(k));
    RoundLoss out{std::vector<double>(bank.size(), 0.0), past.empty()};
    if (out.omitted) return out;

    const auto& xk = sorted[k].covariates;
    for (std::size_t j = 0; j < bank.size(); ++j) {
        const double fk = bank.score(j, xk);
        std::size_t hits = 0;
        for (std::size_t l : past) {
            if (fk <= bank.score(j, sorted[l].covariates)) ++hits;
        }
        out.losses[j] = static_cast<double>(hits) / static_cast<double>(past.size());
    }
    return out;
}

RoundLossMatrix round_losses(const ExpertBank& bank, const SurvivalDataset& sorted) {
    require_sorted(sorted);
    const std::size_t n = sorted.size();
    const std::size_t m = bank.size();
    const auto scores = bank.score_matrix(sorted);

    // Events in time order; the past event set of subject k is the prefix of
    // this list holding events strictly earlier than time_k.
    std::vector<std::size_t> events;
    std::vector<std::size_t> past_count(n);
    {
        std::size_t next = 0;
        for (std::size_t k = 0; k < n; ++k) {
            while (next < k && sorted.time(next) < sorted.time(k)) {
                if (sorted.event(next)) events.push_back(next);
                ++next;
            }
            past_count[k] = events.size();
        }
    }

    RoundLossMatrix out;
    out.rounds = n;
    out.experts = m;
    out.values.assign(n * m, 0.0);
    out.omitted.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.omitted[k] = past_count[k] == 0;

    std::vector<double> event_scores(events.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double* col = scores.data() + j * n;
        for (std::size_t q = 0; q < events.size(); ++q) event_scores[q] = col[events[q]];
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t c = past_count[k];
            if (c == 0) continue;
            const double fk = col[k];
            std::size_t hits = 0;
            for (std::size_t q = 0; q < c; ++q) hits += fk <= event_scores[q];
            out.values[k * m + j] = static_cast<double>(hits) / static_cast<double>(c);
        }
    }
    return out;
}

WeightVector reweight(const LossLedger& ledger, double nu) {
    require_nu(nu);
    const auto& L = ledger.cumulative;
    if (L.empty()) throw ArgumentError("loss ledger is empty");
    for (double v : L) {
        if (!std::isfinite(v)) throw ArgumentError("loss ledger has non-finite entries");
    }
    const double lo = *std::min_element(L.begin(), L.end());
    WeightVector p{std::vector<double>(L.size())};
    double sum = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        p.values[i] = std::exp(-nu * (L[i] - lo));
        sum += p.values[i];
    }
    for (double& v : p.values) v /= sum;
    return p;
}

ApterModel train(const ExpertBank& bank, const SurvivalDataset& data, double nu, const RoundObserver& observer) {
    require_nu(nu);
    if (data.dim() != bank.dim()) {
        throw DataError("dimension mismatch: dataset has " + std::to_string(data.dim()) +
                        " covariates, expert bank expects " + std::to_string(bank.dim()));
    }
    std::optional<SortedDataset> resorted;
    if (!is_time_sorted(data)) resorted = sort_by_time(data);
    const SurvivalDataset& sorted = resorted ? resorted->data : data;

    const std::size_t n = sorted.size();
    const std::size_t m = bank.size();
    const auto losses = round_losses(bank, sorted);

    LossLedger ledger(m);
    WeightVector p = WeightVector::uniform(m);
    std::vector<double> acc = p.values;
    if (observer) observer({0, nullptr, ledger, p});

    RoundLoss round;
    for (std::size_t k = 0; k < n; ++k) {
        auto row = losses.row(k);
        ledger.add(row);
        p = reweight(ledger, nu);
        if (observer) {
            round.losses.assign(row.begin(), row.end());
            round.omitted = losses.omitted[k];
            observer({k + 1, &round, ledger, p});
        }
        // p^n is not part of the average.
        if (k + 1 < n) {
            for (std::size_t i = 0; i < m; ++i) acc[i] += p.values[i];
        }
    }
    for (double& v : acc) v /= static_cast<double>(n);
    return ApterModel{bank, WeightVector{std::move(acc)}, nu, std::nullopt};
}

double theoretical_nu(std::size_t m, std::size_t n) {
    if (m < 2) throw ArgumentError("theoretical nu needs at least two experts");
    if (n < 1) throw ArgumentError("theoretical nu needs at least one subject");
    return std::sqrt(2.0 * std::log(static_cast<double>(m)) / static_cast<double>(n));
}

double predict(const ApterModel& model, std::span<const double> x) {
    const auto& bank = model.bank;
    if (x.size() != bank.dim()) {
        throw DataError("dimension mismatch: covariate vector has " + std::to_string(x.size()) +
                        " entries, model expects " + std::to_string(bank.dim()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < bank.size(); ++j) s += model.weights[j] * bank.score(j, x);
    return s;
}

std::vector<double> predict(const ApterModel& model, const SurvivalDataset& data) {
    if (data.dim() != model.bank.dim()) {
        throw DataError("dimension mismatch: dataset has " + std::to_string(data.dim()) +
                        " covariates, model expects " + std::to_string(model.bank.dim()));
    }
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(model, data[i].covariates);
    return out;
}

namespace {

RoundLossMatrix eval_losses(const ExpertBank& bank, const SurvivalDataset& eval) {
    if (eval.dim() != bank.dim()) throw DataError("dimension mismatch between evaluation set and expert bank");
    auto losses = is_time_sorted(eval) ? round_losses(bank, eval) : round_losses(bank, sort_by_time(eval).data);
    if (std::none_of(losses.omitted.begin(), losses.omitted.end(), [](bool o) { return !o; })) {
        throw DataError("no evaluation subject has a past event");
    }
    return losses;
}

}  // namespace

double expected_loss(const WeightVector& weights, const ExpertBank& bank, const SurvivalDataset& eval) {
    if (weights.size() != bank.size()) throw ArgumentError("weight vector does not match the expert bank");
    const auto losses = eval_losses(bank, eval);
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < losses.rounds; ++k) {
        if (losses.omitted[k]) continue;
        auto row = losses.row(k);
        double mix = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) mix += weights[i] * row[i];
        total += mix;
        ++used;
    }
    return total / static_cast<double>(used);
}

double expected_loss(std::size_t expert, const ExpertBank& bank, const SurvivalDataset& eval) {
    if (expert >= bank.size()) throw ArgumentError("expert index out of range");
    WeightVector w{std::vector<double>(bank.size(), 0.0)};
    w.values[expert] = 1.0;
    return expected_loss(w, bank, eval);
}

std::vector<double> expert_expected_losses(const ExpertBank& bank, const SurvivalDataset& eval) {
    const auto losses = eval_losses(bank, eval);
    std::vector<double> out(bank.size(), 0.0);
    std::size_t used = 0;
    for (std::size_t k = 0; k < losses.rounds; ++k) {
        if (losses.omitted[k]) continue;
        auto row = losses.row(k);
        for (std::size_t i = 0; i < row.size(); ++i) out[i] += row[i];
        ++used;
    }
    for (double& v : out) v /= static_cast<double>(used);
    return out;
}

}  // namespace apter
