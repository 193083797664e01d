#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace apter {

/// One subject: covariates, observed time Y = min(T, C) and the event flag
/// (true = failure observed, false = right-censored).
struct SurvivalRecord {
    std::vector<double> covariates;
    double time = 0.0;
    bool event = false;
};

/// Ordered, non-empty collection of records sharing one covariate dimension.
class SurvivalDataset {
public:
    SurvivalDataset(std::vector<SurvivalRecord> records, std::size_t dim);

    std::size_t size() const { return records_.size(); }
    std::size_t dim() const { return dim_; }

    const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
    const std::vector<SurvivalRecord>& records() const { return records_; }

    double time(std::size_t i) const { return records_[i].time; }
    bool event(std::size_t i) const { return records_[i].event; }
    double value(std::size_t i, std::size_t feature) const { return records_[i].covariates[feature]; }

    std::vector<double> times() const;
    std::vector<double> column(std::size_t feature) const;
    std::size_t event_count() const;

    /// Rows `rows` of this dataset, in the given order.
    SurvivalDataset subset(std::span<const std::size_t> rows) const;

private:
    std::vector<SurvivalRecord> records_;
    std::size_t dim_;
};

/// Reads the `time,status,x1,...,xd` CSV format. Errors carry the 1-based
/// file line and column of the offending cell.
SurvivalDataset load_csv(const std::filesystem::path& path);
SurvivalDataset parse_csv(std::istream& in);

void write_csv(const SurvivalDataset& data, std::ostream& out);
void save_csv(const SurvivalDataset& data, const std::filesystem::path& path);

/// Indices i with time_i < t and event_i set, in row order.
std::vector<std::size_t> past_event_set(const SurvivalDataset& data, double t);

struct ConcordanceResult {
    double c_index = 0.0;
    std::uint64_t concordant = 0;        // numerator before division
    std::uint64_t comparable_pairs = 0;  // |eps|
};

/// Harrell-type concordance with strict inequalities: a pair (i, j) is
/// comparable when event_i and time_i < time_j, and concordant when
/// score_i < score_j. Throws NoComparablePairs when no pair is comparable.
ConcordanceResult concordance(std::span<const double> scores, const SurvivalDataset& data);

/// Same as concordance() but returns nullopt instead of throwing.
std::optional<ConcordanceResult> try_concordance(std::span<const double> scores,
                                                 const SurvivalDataset& data);

struct SortedDataset {
    SurvivalDataset data;
    std::vector<std::size_t> order;  // order[r] = original row of sorted row r
};

/// Ascending time; ties put events before censorings, then original index.
SortedDataset sort_by_time(const SurvivalDataset& data);

/// True when times are ascending under the same tie rule as sort_by_time().
bool is_time_sorted(const SurvivalDataset& data);

}  // namespace apter
