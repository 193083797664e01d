#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "apter/experts.hpp"
#include "apter/survival.hpp"

namespace apter {

/// A point on the probability simplex over the m experts.
struct WeightVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    bool on_simplex(double tol = 1e-9) const;

    static WeightVector uniform(std::size_t m);
};

/// Cumulative per-expert losses L_k after `rounds` processed subjects.
struct LossLedger {
    std::vector<double> cumulative;
    std::size_t rounds = 0;

    explicit LossLedger(std::size_t m = 0) : cumulative(m, 0.0) {}
    void add(std::span<const double> round);
};

struct RoundLoss {
    std::vector<double> losses;  // one entry per expert, zero when omitted
    bool omitted = false;        // empty past event set
};

struct ApterModel {
    ExpertBank bank;
    WeightVector weights;  // aggregated p-hat
    double nu = 0.0;
    std::optional<std::vector<std::size_t>> screened_features;
};

/// Fraction of earlier failures that expert i scores at least as high as
/// subject k. `sorted` must be in sort_by_time() order.
RoundLoss round_loss(const ExpertBank& bank, const SurvivalDataset& sorted, std::size_t k);

/// All n round losses at once; row-major n x m, plus the omitted flags.
struct RoundLossMatrix {
    std::size_t rounds = 0;
    std::size_t experts = 0;
    std::vector<double> values;
    std::vector<bool> omitted;

    std::span<const double> row(std::size_t k) const { return {values.data() + k * experts, experts}; }
};
RoundLossMatrix round_losses(const ExpertBank& bank, const SurvivalDataset& sorted);

/// p_i proportional to exp(-nu * L_i), evaluated after shifting by min L.
WeightVector reweight(const LossLedger& ledger, double nu);

/// Per-round state handed to an observer during training: `k` subjects
/// processed, `weights` = p^k.
struct RoundState {
    std::size_t k;
    const RoundLoss* loss;  // null for k = 0
    const LossLedger& ledger;
    const WeightVector& weights;
};
using RoundObserver = std::function<void(const RoundState&)>;

/// Exponential reweighting over subjects in ascending time order; the
/// returned weights average p^0 .. p^{n-1}.
ApterModel train(const ExpertBank& bank, const SurvivalDataset& data, double nu,
                 const RoundObserver& observer = {});

/// sqrt(2 ln m / n).
double theoretical_nu(std::size_t m, std::size_t n);

/// Weighted sum of standardized expert scores; higher means later event.
double predict(const ApterModel& model, std::span<const double> x);
std::vector<double> predict(const ApterModel& model, const SurvivalDataset& data);

/// Mean over evaluation subjects (empty past event sets skipped) of the
/// weighted per-subject loss. Throws DataError if every subject is skipped.
double expected_loss(const WeightVector& weights, const ExpertBank& bank, const SurvivalDataset& eval);
double expected_loss(std::size_t expert, const ExpertBank& bank, const SurvivalDataset& eval);

/// expected_loss of every single expert, sharing one pass over the data.
std::vector<double> expert_expected_losses(const ExpertBank& bank, const SurvivalDataset& eval);

}  // namespace apter
