#include "apter/experts.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "apter/error.hpp"

namespace apter {

const char* to_string(BankMode mode) {
    return mode == BankMode::duplicated ? "duplicated" : "signed";
}

BankMode bank_mode_from_string(const std::string& s) {
    if (s == "duplicated") return BankMode::duplicated;
    if (s == "signed") return BankMode::signed_;
    throw DataError("unknown expert bank mode '" + s + "'");
}

ExpertBank::ExpertBank(BankMode mode, std::size_t dim, std::vector<Expert> experts,
                       std::vector<Standardization> standardization)
    : mode_(mode), dim_(dim), experts_(std::move(experts)), standardization_(std::move(standardization)) {
    if (experts_.empty()) throw ArgumentError("expert bank is empty");
    if (experts_.size() != standardization_.size()) {
        throw DataError("expert bank: standardization does not match experts");
    }
    for (std::size_t j = 0; j < experts_.size(); ++j) {
        if (experts_[j].feature >= dim_) throw DataError("expert bank: feature index out of range");
        if (experts_[j].sign != 1 && experts_[j].sign != -1) throw DataError("expert bank: sign must be +1 or -1");
        const auto& s = standardization_[j];
        if (!std::isfinite(s.mean) || !std::isfinite(s.sd) || s.sd <= 0.0) {
            throw DataError("expert bank: invalid standardization");
        }
    }
}

std::vector<double> ExpertBank::score(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw DataError("dimension mismatch: covariate vector has " + std::to_string(x.size()) +
                        " entries, expert bank expects " + std::to_string(dim_));
    }
    std::vector<double> out(experts_.size());
    for (std::size_t j = 0; j < experts_.size(); ++j) out[j] = score(j, x);
    return out;
}

std::vector<double> ExpertBank::score_matrix(const SurvivalDataset& data) const {
    if (data.dim() != dim_) {
        throw DataError("dimension mismatch: dataset has " + std::to_string(data.dim()) +
                        " covariates, expert bank expects " + std::to_string(dim_));
    }
    const std::size_t n = data.size();
    std::vector<double> out(experts_.size() * n);
    for (std::size_t j = 0; j < experts_.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) out[j * n + i] = score(j, data[i].covariates);
    }
    return out;
}

Standardization fit_standardization(const SurvivalDataset& data, std::size_t feature) {
    const double n = static_cast<double>(data.size());
    double mean = 0.0;
    for (const auto& r : data.records()) mean += r.covariates[feature];
    mean /= n;
    double ss = 0.0;
    for (const auto& r : data.records()) {
        double d = r.covariates[feature] - mean;
        ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) sd = 1.0;
    return {mean, sd};
}

namespace {

std::vector<std::size_t> all_features(const SurvivalDataset& data) {
    std::vector<std::size_t> f(data.dim());
    std::iota(f.begin(), f.end(), 0);
    return f;
}

void check_subset(const SurvivalDataset& data, std::span<const std::size_t> features) {
    if (features.empty()) throw ArgumentError("empty feature subset");
    for (std::size_t f : features) {
        if (f >= data.dim()) {
            throw ArgumentError("feature index " + std::to_string(f) + " outside [0, " + std::to_string(data.dim()) +
                                ")");
        }
    }
}

}  // namespace

ExpertBank build_duplicated(const SurvivalDataset& data) {
    auto f = all_features(data);
    return build_duplicated(data, f);
}

ExpertBank build_duplicated(const SurvivalDataset& data, std::span<const std::size_t> features) {
    check_subset(data, features);
    std::vector<Expert> experts;
    std::vector<Standardization> stats;
    experts.reserve(2 * features.size());
    stats.reserve(2 * features.size());
    for (std::size_t f : features) {
        auto s = fit_standardization(data, f);
        experts.push_back({f, +1});
        stats.push_back(s);
        experts.push_back({f, -1});
        stats.push_back(s);
    }
    return ExpertBank(BankMode::duplicated, data.dim(), std::move(experts), std::move(stats));
}

ExpertBank build_signed(const SurvivalDataset& data) {
    auto f = all_features(data);
    return build_signed(data, f);
}

ExpertBank build_signed(const SurvivalDataset& data, std::span<const std::size_t> features) {
    check_subset(data, features);
    std::vector<Expert> experts;
    std::vector<Standardization> stats;
    experts.reserve(features.size());
    stats.reserve(features.size());
    for (std::size_t f : features) {
        auto col = data.column(f);
        auto c = concordance(col, data);
        // c >= 0.5, compared on the integer counts.
        experts.push_back({f, 2 * c.concordant >= c.comparable_pairs ? +1 : -1});
        stats.push_back(fit_standardization(data, f));
    }
    return ExpertBank(BankMode::signed_, data.dim(), std::move(experts), std::move(stats));
}

}  // namespace apter
