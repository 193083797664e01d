#include "apter/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "apter/error.hpp"
#include "apter/model_io.hpp"
#include "apter/parallel.hpp"
#include "apter/random.hpp"
#include "apter/screening.hpp"
#include "apter/synthetic.hpp"
#include "json.hpp"

namespace apter {

const char* to_string(Method method) {
    switch (method) {
        case Method::apter: return "apter";
        case Method::apter_p: return "apter_p";
        case Method::isis_apter_p: return "isis_apter_p";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "apter") return Method::apter;
    if (s == "apter_p") return Method::apter_p;
    if (s == "isis_apter_p") return Method::isis_apter_p;
    throw ArgumentError("unknown method '" + s + "' (expected apter, apter_p or isis_apter_p)");
}

std::string to_string(const NuPolicy& policy) {
    switch (policy.kind) {
        case NuPolicy::Kind::theoretical: return "theoretical";
        case NuPolicy::Kind::fixed: return "fixed";
        case NuPolicy::Kind::cv_grid: return "cv";
    }
    return "?";
}

BankBuilder bank_builder(Method method, std::vector<std::size_t> features) {
    if (method == Method::apter) {
        return [features](const SurvivalDataset& data) {
            return features.empty() ? build_duplicated(data) : build_duplicated(data, features);
        };
    }
    return [features](const SurvivalDataset& data) {
        return features.empty() ? build_signed(data) : build_signed(data, features);
    };
}

std::vector<double> default_nu_grid(std::size_t m, std::size_t n) {
    const double base = m < 2 ? 1.0 : theoretical_nu(m, n);
    return {base * 1e-2, base * 1e-1, base, base * 1e1, base * 1e2};
}

double tune_nu(const SurvivalDataset& data, const BankBuilder& builder, std::span<const double> grid,
               std::size_t folds, std::uint64_t seed) {
    if (grid.empty()) throw ArgumentError("nu grid is empty");
    if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    if (folds > data.size()) throw ArgumentError("more folds than training subjects");
    for (double nu : grid) {
        if (!(nu > 0.0) || !std::isfinite(nu)) throw ArgumentError("nu grid values must be positive");
    }
    std::vector<double> candidates(grid.begin(), grid.end());
    std::sort(candidates.begin(), candidates.end());
    if (candidates.size() == 1) return candidates.front();

    Engine rng(seed);
    const auto perm = permutation(data.size(), rng);

    std::vector<double> total(candidates.size(), 0.0);
    std::size_t used = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_rows, val_rows;
        for (std::size_t p = 0; p < perm.size(); ++p) (p % folds == f ? val_rows : fit_rows).push_back(perm[p]);
        std::sort(fit_rows.begin(), fit_rows.end());
        std::sort(val_rows.begin(), val_rows.end());
        const auto fit = data.subset(fit_rows);
        const auto val = data.subset(val_rows);

        // Validation folds without a comparable pair cannot score any nu.
        {
            std::vector<double> probe(val.size(), 0.0);
            if (!try_concordance(probe, val)) continue;
        }
        std::optional<ExpertBank> bank;
        try {
            bank = builder(fit);
        } catch (const NoComparablePairs&) {
            continue;
        }
        for (std::size_t g = 0; g < candidates.size(); ++g) {
            const auto model = train(*bank, fit, candidates[g]);
            total[g] += concordance(predict(model, val), val).c_index;
        }
        ++used;
    }
    if (used == 0) throw DataError("cross-validation: every fold lacks comparable pairs");

    std::size_t best = 0;
    for (std::size_t g = 1; g < candidates.size(); ++g) {
        if (total[g] > total[best]) best = g;
    }
    return candidates[best];
}

namespace {

double resolve_nu(const NuPolicy& policy, const ExpertBank& bank, const SurvivalDataset& data,
                  const BankBuilder& builder, std::uint64_t seed) {
    switch (policy.kind) {
        case NuPolicy::Kind::fixed:
            if (!(policy.value > 0.0)) throw ArgumentError("fixed nu must be positive");
            return policy.value;
        case NuPolicy::Kind::theoretical:
            return bank.size() < 2 ? 1.0 : theoretical_nu(bank.size(), data.size());
        case NuPolicy::Kind::cv_grid: {
            auto grid = policy.grid.empty() ? default_nu_grid(bank.size(), data.size()) : policy.grid;
            return tune_nu(data, builder, grid, policy.folds, seed);
        }
    }
    throw ArgumentError("unknown nu policy");
}

}  // namespace

ApterModel fit_method(const SurvivalDataset& data, const FitSpec& spec, std::uint64_t seed) {
    std::vector<std::size_t> features;
    if (spec.method == Method::isis_apter_p && !spec.screening) {
        throw ArgumentError("isis_apter_p needs screening parameters (per-step and target)");
    }
    if (spec.screening) {
        const auto& sp = spec.screening;
        // Screening uses theoretical nu for its inner fits.
        auto result = sp->standardize ? isis(standardize_columns(data), sp->per_step, sp->target)
                                      : isis(data, sp->per_step, sp->target);
        features = std::move(result.retained);
        std::sort(features.begin(), features.end());
    }
    const auto builder = bank_builder(spec.method, features);
    const auto bank = builder(data);
    const double nu = resolve_nu(spec.nu, bank, data, builder, seed);
    auto model = train(bank, data, nu);
    if (spec.screening) model.screened_features = features;
    return model;
}

std::size_t training_size(std::size_t n) { return (2 * n) / 3; }

Split random_split(std::size_t n, std::uint64_t seed) {
    Engine rng(seed);
    auto perm = permutation(n, rng);
    const std::size_t nt = training_size(n);
    Split s{{perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nt)},
            {perm.begin() + static_cast<std::ptrdiff_t>(nt), perm.end()}};
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

ExperimentReport run_experiment(const SurvivalDataset& data, const ExperimentSpec& spec) {
    if (data.size() < 3) throw DataError("experiment needs at least 3 subjects");
    if (spec.replications < 1) throw ArgumentError("replications must be >= 1");

    ExperimentReport report;
    report.replications.resize(spec.replications);
    parallel_for(spec.replications, spec.threads, [&](std::size_t r) {
        const auto start = std::chrono::steady_clock::now();
        ReplicationResult& row = report.replications[r];
        row.seed = stream_seed(spec.seed, r);

        const auto split = random_split(data.size(), row.seed);
        const auto train_set = data.subset(split.train);
        const auto test_set = data.subset(split.test);
        try {
            const auto model = fit_method(train_set, spec.fit, stream_seed(row.seed, 1));
            row.nu = model.nu;
            const auto scores = predict(model, test_set);
            if (auto c = try_concordance(scores, test_set)) row.c_index = c->c_index;
        } catch (const NoComparablePairs&) {
            // training split too degenerate to fit signs; recorded as undefined
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });
    report.summary = summarize(report.replications);
    return report;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ArgumentError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(std::span<const ReplicationResult> rows) {
    Summary s;
    std::vector<double> values;
    for (const auto& r : rows) {
        if (r.c_index) {
            values.push_back(*r.c_index);
        } else {
            ++s.undefined;
        }
    }
    s.defined = values.size();
    if (values.empty()) return s;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.variance = values.size() > 1 ? ss / static_cast<double>(values.size() - 1) : 0.0;
    return s;
}

SurvivalDataset shuffle_phenotypes(const SurvivalDataset& data, std::uint64_t seed) {
    Engine rng(seed);
    const auto perm = permutation(data.size(), rng);
    std::vector<SurvivalRecord> records = data.records();
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].time = data.time(perm[i]);
        records[i].event = data.event(perm[i]);
    }
    return SurvivalDataset(std::move(records), data.dim());
}

namespace {

std::string format_double(double v) {
    // nlohmann's serializer emits the shortest round-trip form.
    return nlohmann::json(v).dump();
}

}  // namespace

void write_replications_csv(const ExperimentReport& report, std::ostream& out, bool with_timing) {
    out << "seed,c_index,nu,wall_ms\n";
    for (const auto& r : report.replications) {
        out << r.seed << ',' << (r.c_index ? format_double(*r.c_index) : "NA") << ',' << format_double(r.nu) << ',';
        if (with_timing) out << format_double(std::round(r.wall_ms * 1000.0) / 1000.0);
        out << '\n';
    }
}

std::string summary_json(const ExperimentReport& report, const std::string& config_json) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    const auto& s = report.summary;
    json j;
    j["schema"] = kSchemaVersion;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    j["replications"] = report.replications.size();
    j["defined"] = s.defined;
    j["undefined"] = s.undefined;
    j["median"] = opt(s.median);
    j["variance"] = opt(s.variance);
    j["iqr"] = {{"q1", opt(s.q1)}, {"q3", opt(s.q3)}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<RegretRow> regret_study(const RegretConfig& config) {
    if (config.n_list.empty() || config.d_list.empty()) throw ArgumentError("regret study: empty n or d list");
    if (config.replications < 1) throw ArgumentError("regret study: replications must be >= 1");

    std::vector<RegretRow> rows;
    for (std::size_t n : config.n_list) {
        for (std::size_t d : config.d_list) {
            if (config.k > d) throw ArgumentError("regret study: k exceeds d");
            struct Cell {
                std::optional<double> c_err;
                double loss_regret = 0.0;
            };
            std::vector<Cell> cells(config.replications);
            parallel_for(config.replications, config.threads, [&](std::size_t r) {
                const auto rep = stream_seed(config.seed, r);
                const auto train_draw = generate({n, d, config.k, config.censor_rate, stream_seed(rep, 0)});
                const auto test_draw = generate({n, d, config.k, config.censor_rate, stream_seed(rep, 1)});
                const auto& tr = train_draw.data;
                const auto& te = test_draw.data;

                const auto bank = build_duplicated(tr);
                const auto model = train(bank, tr, theoretical_nu(bank.size(), n));

                const auto aggregate = try_concordance(predict(model, te), te);
                if (aggregate) {
                    double best = 0.0;
                    for (std::size_t j = 0; j < d; ++j) best = std::max(best, concordance(te.column(j), te).c_index);
                    cells[r].c_err = best - aggregate->c_index;
                }
                const auto per_expert = expert_expected_losses(bank, te);
                cells[r].loss_regret = expected_loss(model.weights, bank, te) -
                                       *std::min_element(per_expert.begin(), per_expert.end());
            });

            RegretRow row;
            row.n = n;
            row.d = d;
            row.m = 2 * d;
            row.bound = theoretical_nu(row.m, n);
            std::vector<double> errs, regrets;
            for (const auto& c : cells) {
                if (c.c_err) errs.push_back(*c.c_err);
                regrets.push_back(c.loss_regret);
            }
            row.used = errs.size();
            if (!errs.empty()) {
                row.c_err_median = quantile(errs, 0.5);
                row.c_err_mean = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
            }
            const double mean =
                std::accumulate(regrets.begin(), regrets.end(), 0.0) / static_cast<double>(regrets.size());
            double ss = 0.0;
            for (double v : regrets) ss += (v - mean) * (v - mean);
            row.loss_regret_mean = mean;
            row.loss_regret_se = regrets.size() > 1
                                     ? std::sqrt(ss / static_cast<double>(regrets.size() - 1) /
                                                 static_cast<double>(regrets.size()))
                                     : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_regret_csv(std::span<const RegretRow> rows, std::ostream& out) {
    out << "n,d,m,c_err_median,c_err_mean,bound\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.d << ',' << r.m << ',' << format_double(r.c_err_median) << ','
            << format_double(r.c_err_mean) << ',' << format_double(r.bound) << '\n';
    }
}

}  // namespace apter
