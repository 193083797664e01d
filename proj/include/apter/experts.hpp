#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apter/survival.hpp"

namespace apter {

// duplicated: every feature contributes +x and -x (m = 2|features|).
// signed:     every feature contributes s*x with s fitted by concordance (m = |features|).
enum class BankMode { duplicated, signed_ };

const char* to_string(BankMode mode);
BankMode bank_mode_from_string(const std::string& s);

struct Expert {
    std::size_t feature = 0;
    int sign = 1;

    friend bool operator==(const Expert&, const Expert&) = default;
};

struct Standardization {
    double mean = 0.0;
    double sd = 1.0;

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

/// A set of univariate scoring rules f_j(x) = sign_j * (x[feature_j] - mean_j) / sd_j.
/// Standardization is stored per expert, so duplicated banks repeat each
/// feature's statistics twice.
class ExpertBank {
public:
    ExpertBank(BankMode mode, std::size_t dim, std::vector<Expert> experts,
               std::vector<Standardization> standardization);

    BankMode mode() const { return mode_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return experts_.size(); }
    const std::vector<Expert>& experts() const { return experts_; }
    const std::vector<Standardization>& standardization() const { return standardization_; }

    double score(std::size_t expert, std::span<const double> x) const {
        const auto& e = experts_[expert];
        const auto& s = standardization_[expert];
        return e.sign * ((x[e.feature] - s.mean) / s.sd);
    }

    /// All m expert scores for one subject.
    std::vector<double> score(std::span<const double> x) const;

    /// Expert-major score matrix: entry [j * n + i] is expert j on subject i.
    std::vector<double> score_matrix(const SurvivalDataset& data) const;

    friend bool operator==(const ExpertBank&, const ExpertBank&) = default;

private:
    BankMode mode_;
    std::size_t dim_;
    std::vector<Expert> experts_;
    std::vector<Standardization> standardization_;
};

/// z-score statistics of one column; a constant column gets sd = 1.
Standardization fit_standardization(const SurvivalDataset& data, std::size_t feature);

ExpertBank build_duplicated(const SurvivalDataset& data);
ExpertBank build_duplicated(const SurvivalDataset& data, std::span<const std::size_t> features);

/// Sign is +1 when the raw feature's concordance with the outcome is >= 0.5.
/// `data` must be the training set. Throws NoComparablePairs if the dataset
/// has no comparable pair.
ExpertBank build_signed(const SurvivalDataset& data);
ExpertBank build_signed(const SurvivalDataset& data, std::span<const std::size_t> features);

}  // namespace apter
