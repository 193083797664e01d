#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "apter/error.hpp"
#include "apter/harness.hpp"
#include "apter/random.hpp"
#include "apter/synthetic.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace apter;

namespace {

SurvivalDataset synthetic(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
    return generate({n, d, k, 0.1, seed}).data;
}

ExperimentSpec spec_for(Method method, NuPolicy nu, std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
    ExperimentSpec s;
    s.fit.method = method;
    s.fit.nu = std::move(nu);
    s.replications = reps;
    s.seed = seed;
    s.threads = threads;
    return s;
}

std::string replications_csv(const ExperimentReport& r) {
    std::ostringstream out;
    write_replications_csv(r, out, false);
    return out.str();
}

}  // namespace

TEST_CASE("method and policy names") {
    for (auto m : {Method::apter, Method::apter_p, Method::isis_apter_p}) CHECK(method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(method_from_string("lasso"), ArgumentError);
    CHECK(to_string(NuPolicy::cv()) == std::string("cv"));
}

TEST_CASE("splits") {
    CHECK(training_size(100) == 66);
    CHECK(training_size(3) == 2);
    auto s = random_split(30, 7);
    CHECK(s.train.size() == 20);
    CHECK(s.test.size() == 10);
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(30);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    CHECK(random_split(30, 7).train == s.train);
    CHECK(random_split(30, 8).train != s.train);
}

TEST_CASE("quantile and summary") {
    CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({5}, 0.75) == 5.0);
    CHECK_THROWS_AS(quantile({}, 0.5), ArgumentError);

    std::vector<ReplicationResult> rows(5);
    const double values[] = {0.6, 0.7, 0.5, 0.9};
    for (std::size_t i = 0; i < 4; ++i) rows[i].c_index = values[i];
    auto s = summarize(rows);
    CHECK(s.defined == 4);
    CHECK(s.undefined == 1);
    CHECK(*s.median == doctest::Approx(0.65));
    // sample variance of {0.5, 0.6, 0.7, 0.9}: mean 0.675
    CHECK(*s.variance == doctest::Approx((0.175 * 0.175 + 0.075 * 0.075 + 0.025 * 0.025 + 0.225 * 0.225) / 3));
    CHECK(*s.q1 == doctest::Approx(0.575));
    CHECK(*s.q3 == doctest::Approx(0.75));

    std::vector<ReplicationResult> none(2);
    auto e = summarize(none);
    CHECK(e.defined == 0);
    CHECK(!e.median);
}

TEST_CASE("tune_nu") {
    auto d = synthetic(90, 20, 5, 3);
    auto builder = bank_builder(Method::apter_p);
    SUBCASE("single candidate") {
        std::vector<double> grid{0.3};
        CHECK(tune_nu(d, builder, grid, 5, 1) == 0.3);
    }
    SUBCASE("indistinguishable candidates resolve to the smaller") {
        // Every expert is the same feature, so every nu gives the same scores.
        auto same = bank_builder(Method::apter_p, {0});
        std::vector<double> grid{4.0, 0.5, 2.0};
        CHECK(tune_nu(d, same, grid, 5, 1) == 0.5);
    }
    SUBCASE("deterministic in the seed") {
        auto grid = default_nu_grid(20, 90);
        CHECK(tune_nu(d, builder, grid, 5, 9) == tune_nu(d, builder, grid, 5, 9));
    }
    SUBCASE("argument checks") {
        std::vector<double> empty, bad{0.0}, ok{1.0, 2.0};
        CHECK_THROWS_AS(tune_nu(d, builder, empty, 5, 1), ArgumentError);
        CHECK_THROWS_AS(tune_nu(d, builder, bad, 5, 1), ArgumentError);
        CHECK_THROWS_AS(tune_nu(d, builder, ok, 1, 1), ArgumentError);
    }
    SUBCASE("all folds without pairs") {
        auto censored = fixtures::make({1, 2, 3, 4}, {0, 0, 0, 0}, {{1}, {2}, {3}, {4}});
        std::vector<double> grid{1.0, 2.0};
        CHECK_THROWS_AS(tune_nu(censored, bank_builder(Method::apter), grid, 2, 1), DataError);
    }
}

TEST_CASE("default grid spans the theoretical value") {
    auto g = default_nu_grid(200, 100);
    const double t = theoretical_nu(200, 100);
    REQUIRE(g.size() == 5);
    CHECK(g[2] == t);
    CHECK(g[0] == doctest::Approx(t * 1e-2));
    CHECK(g[4] == doctest::Approx(t * 1e2));
}

TEST_CASE("fit_method") {
    auto d = synthetic(120, 30, 5, 17);
    SUBCASE("apter uses the duplicated bank") {
        auto m = fit_method(d, {Method::apter, NuPolicy::theoretical(), std::nullopt}, 1);
        CHECK(m.bank.size() == 60);
        CHECK(m.nu == doctest::Approx(theoretical_nu(60, 120)));
        CHECK(!m.screened_features);
    }
    SUBCASE("apter_p with fixed nu") {
        auto m = fit_method(d, {Method::apter_p, NuPolicy::fixed(0.25), std::nullopt}, 1);
        CHECK(m.bank.size() == 30);
        CHECK(m.nu == 0.25);
        CHECK(m.weights.on_simplex(1e-9));
    }
    SUBCASE("screened fit keeps sorted features") {
        auto m = fit_method(d, {Method::isis_apter_p, NuPolicy::theoretical(), ScreeningParams{4, 8, true}}, 1);
        REQUIRE(m.screened_features);
        CHECK(m.screened_features->size() == 8);
        CHECK(std::is_sorted(m.screened_features->begin(), m.screened_features->end()));
        CHECK(m.bank.size() == 8);
    }
    SUBCASE("isis without screening parameters") {
        CHECK_THROWS_AS(fit_method(d, {Method::isis_apter_p, NuPolicy::theoretical(), std::nullopt}, 1),
                        ArgumentError);
    }
    SUBCASE("fit uses only the rows it is given") {
        auto split = random_split(d.size(), 4);
        auto train_set = d.subset(split.train);
        FitSpec spec{Method::apter_p, NuPolicy::cv(), std::nullopt};
        auto a = fit_method(train_set, spec, 5);
        // Perturbing the held-out rows cannot change the fitted model.
        auto records = d.records();
        for (std::size_t i : split.test) {
            records[i].time = 1000.0 + static_cast<double>(i);
            for (double& v : records[i].covariates) v = -v;
        }
        SurvivalDataset perturbed(std::move(records), d.dim());
        auto b = fit_method(perturbed.subset(split.train), spec, 5);
        CHECK(a.weights.values == b.weights.values);
        CHECK(a.nu == b.nu);
    }
}

TEST_CASE("run_experiment") {
    auto d = synthetic(90, 20, 5, 23);
    SUBCASE("deterministic for a seed and thread count independent") {
        auto spec = spec_for(Method::apter_p, NuPolicy::cv(), 6, 77);
        auto a = run_experiment(d, spec);
        auto b = run_experiment(d, spec);
        spec.threads = 4;
        auto c = run_experiment(d, spec);
        CHECK(replications_csv(a) == replications_csv(b));
        CHECK(replications_csv(a) == replications_csv(c));
        for (std::size_t r = 0; r < 6; ++r) CHECK(a.replications[r].seed == stream_seed(77, r));
    }
    SUBCASE("summary recomputes from the rows") {
        auto rep = run_experiment(d, spec_for(Method::apter, NuPolicy::theoretical(), 8, 3));
        auto s = summarize(rep.replications);
        CHECK(s.median == rep.summary.median);
        CHECK(s.variance == rep.summary.variance);
        CHECK(rep.summary.defined + rep.summary.undefined == 8);
    }
    SUBCASE("a perfect single feature") {
        std::vector<std::vector<double>> rows;
        std::vector<double> times;
        std::vector<int> events;
        for (int i = 0; i < 60; ++i) {
            times.push_back(i + 1.0);
            events.push_back(1);
            rows.push_back({static_cast<double>(i), static_cast<double>((i * 7) % 11)});
        }
        auto perfect = fixtures::make(times, events, rows);
        auto rep = run_experiment(perfect, spec_for(Method::apter_p, NuPolicy::fixed(50.0), 10, 1));
        CHECK(*rep.summary.median == doctest::Approx(1.0));
    }
    SUBCASE("undefined replications are counted, not dropped") {
        auto censored = fixtures::make({1, 2, 3, 4, 5, 6}, {0, 0, 0, 0, 0, 0}, {{1}, {2}, {3}, {4}, {5}, {6}});
        auto rep = run_experiment(censored, spec_for(Method::apter, NuPolicy::theoretical(), 3, 1));
        CHECK(rep.summary.undefined == 3);
        CHECK(!rep.summary.median);
        CHECK(replications_csv(rep).find("NA") != std::string::npos);
    }
    SUBCASE("input checks") {
        auto tiny = fixtures::make({1, 2}, {1, 1}, {{1}, {2}});
        CHECK_THROWS_AS(run_experiment(tiny, spec_for(Method::apter, NuPolicy::theoretical(), 3, 1)), DataError);
        CHECK_THROWS_AS(run_experiment(d, spec_for(Method::apter, NuPolicy::theoretical(), 0, 1)), ArgumentError);
    }
}

TEST_CASE("synthetic signal is recovered out of sample") {
    auto d = synthetic(200, 100, 10, 1);
    auto rep = run_experiment(d, spec_for(Method::apter_p, NuPolicy::cv(), 20, 11));
    MESSAGE("median test C-index ", *rep.summary.median);
    CHECK(*rep.summary.median >= 0.60);
}

TEST_CASE("shuffled phenotypes keep covariates and the multiset of outcomes") {
    auto d = synthetic(50, 4, 2, 8);
    auto s = shuffle_phenotypes(d, 3);
    std::vector<std::pair<double, bool>> a, b;
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(s[i].covariates == d[i].covariates);
        a.emplace_back(d.time(i), d.event(i));
        b.emplace_back(s.time(i), s.event(i));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(s.times() != d.times());
}

TEST_CASE("report writers") {
    ExperimentReport rep;
    rep.replications = {{5, 0.75, 0.5, 12.3456}, {6, std::nullopt, 0.25, 1.0}};
    rep.summary = summarize(rep.replications);
    std::ostringstream plain, timed;
    write_replications_csv(rep, plain, false);
    write_replications_csv(rep, timed, true);
    CHECK(plain.str() == "seed,c_index,nu,wall_ms\n5,0.75,0.5,\n6,NA,0.25,\n");
    CHECK(timed.str() == "seed,c_index,nu,wall_ms\n5,0.75,0.5,12.346\n6,NA,0.25,1.0\n");

    const auto json = summary_json(rep, R"({"method":"apter"})");
    CHECK(json.find("\"defined\": 1") != std::string::npos);
    CHECK(json.find("\"undefined\": 1") != std::string::npos);
    CHECK(json.find("\"method\": \"apter\"") != std::string::npos);

    std::vector<RegretRow> rows{{100, 100, 200, 0.1, 0.125, 0.32552, 0, 0, 50}};
    std::ostringstream regret;
    write_regret_csv(rows, regret);
    CHECK(regret.str() == "n,d,m,c_err_median,c_err_mean,bound\n100,100,200,0.1,0.125,0.32552\n");
}

TEST_CASE("regret study") {
    RegretConfig cfg;
    cfg.n_list = {60};
    cfg.d_list = {15, 30};
    cfg.replications = 6;
    cfg.seed = 2;
    auto rows = regret_study(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].m == 30);
    CHECK(rows[1].m == 60);
    CHECK(rows[0].bound == doctest::Approx(std::sqrt(2 * std::log(30.0) / 60)));
    // sqrt(2 ln 200 / 100)
    CHECK(theoretical_nu(200, 100) == doctest::Approx(0.32552).epsilon(1e-4));
    for (const auto& r : rows) CHECK(r.used == 6);

    cfg.threads = 3;
    auto again = regret_study(cfg);
    CHECK(again[1].c_err_mean == rows[1].c_err_mean);
    CHECK(again[1].loss_regret_mean == rows[1].loss_regret_mean);

    cfg.k = 40;
    CHECK_THROWS_AS(regret_study(cfg), ArgumentError);
}

// Two identical experts: the aggregate is that expert, so the C-index gap
// to the best single expert is zero.
TEST_CASE("degenerate pair of identical experts") {
    auto draw = generate({400, 1, 1, 0.1, 5});
    const auto& d = draw.data;
    ExpertBank bank(BankMode::signed_, 1, {{0, 1}, {0, 1}}, {{0.0, 1.0}, {0.0, 1.0}});
    auto model = train(bank, d, theoretical_nu(2, d.size()));
    CHECK(model.weights[0] == doctest::Approx(0.5));
    const double best = concordance(d.column(0), d).c_index;
    CHECK(concordance(predict(model, d), d).c_index == doctest::Approx(best));
}
