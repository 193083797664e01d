#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apter/apter.hpp"
#include "apter/experts.hpp"
#include "apter/survival.hpp"

namespace apter {

enum class Method { apter, apter_p, isis_apter_p };

const char* to_string(Method method);
Method method_from_string(const std::string& s);

struct NuPolicy {
    enum class Kind { theoretical, fixed, cv_grid };
    Kind kind = Kind::theoretical;
    double value = 0.0;        // fixed
    std::vector<double> grid;  // cv_grid; empty = default_nu_grid()
    std::size_t folds = 5;

    static NuPolicy theoretical() { return {}; }
    static NuPolicy fixed(double nu) { return {Kind::fixed, nu, {}, 5}; }
    static NuPolicy cv(std::vector<double> grid = {}, std::size_t folds = 5) {
        return {Kind::cv_grid, 0.0, std::move(grid), folds};
    }
};

std::string to_string(const NuPolicy& policy);

/// ISIS parameters; per_step == target gives plain SIS. Features are
/// z-scored on the training rows before screening unless `standardize` is
/// false.
struct ScreeningParams {
    std::size_t per_step = 0;
    std::size_t target = 0;
    bool standardize = true;
};

struct FitSpec {
    Method method = Method::apter_p;
    NuPolicy nu;
    std::optional<ScreeningParams> screening;
};

struct ExperimentSpec {
    FitSpec fit;
    std::size_t replications = 50;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

using BankBuilder = std::function<ExpertBank(const SurvivalDataset& train)>;

/// Expert bank for `method` restricted to `features` (all when empty).
BankBuilder bank_builder(Method method, std::vector<std::size_t> features = {});

/// theoretical_nu(m, n) times {1e-2, 1e-1, 1, 1e1, 1e2}.
std::vector<double> default_nu_grid(std::size_t m, std::size_t n);

/// k-fold cross-validated choice of nu by mean validation concordance.
/// Ties go to the smaller nu. Folds whose training part cannot build a bank
/// or whose validation part has no comparable pair are skipped; if every fold
/// is skipped a DataError is thrown.
double tune_nu(const SurvivalDataset& train, const BankBuilder& builder, std::span<const double> grid,
               std::size_t folds, std::uint64_t seed);

/// Fits `spec` on `train` only. `seed` feeds cross-validation.
ApterModel fit_method(const SurvivalDataset& train, const FitSpec& spec, std::uint64_t seed);

struct ReplicationResult {
    std::uint64_t seed = 0;
    std::optional<double> c_index;  // nullopt: test split had no comparable pair
    double nu = 0.0;
    double wall_ms = 0.0;
};

struct Summary {
    std::size_t defined = 0;
    std::size_t undefined = 0;
    std::optional<double> median;
    std::optional<double> variance;  // sample variance (n - 1)
    std::optional<double> q1;
    std::optional<double> q3;
};

struct ExperimentReport {
    std::vector<ReplicationResult> replications;
    Summary summary;
};

/// Training size of the random split: floor(2n/3).
std::size_t training_size(std::size_t n);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// The random train/test partition used by replication `seed`.
Split random_split(std::size_t n, std::uint64_t seed);

ExperimentReport run_experiment(const SurvivalDataset& data, const ExperimentSpec& spec);

Summary summarize(std::span<const ReplicationResult> rows);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Randomly reassigns the (time, status) pairs among subjects.
SurvivalDataset shuffle_phenotypes(const SurvivalDataset& data, std::uint64_t seed);

void write_replications_csv(const ExperimentReport& report, std::ostream& out, bool with_timing);
std::string summary_json(const ExperimentReport& report, const std::string& config_json);

struct RegretConfig {
    std::vector<std::size_t> n_list;
    std::vector<std::size_t> d_list;
    std::size_t replications = 50;
    std::uint64_t seed = 0;
    std::size_t k = 10;
    double censor_rate = 0.1;
    unsigned threads = 1;
};

struct RegretRow {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t m = 0;
    double c_err_median = 0.0;
    double c_err_mean = 0.0;
    double bound = 0.0;
    double loss_regret_mean = 0.0;  // expected_loss(p-hat) - min_i expected_loss(f_i)
    double loss_regret_se = 0.0;
    std::size_t used = 0;           // replications with a defined test concordance
};

/// For every (n, d): duplicated APTER with theoretical nu on a synthetic
/// draw, evaluated on an independent draw of the same size.
std::vector<RegretRow> regret_study(const RegretConfig& config);

void write_regret_csv(std::span<const RegretRow> rows, std::ostream& out);

}  // namespace apter
