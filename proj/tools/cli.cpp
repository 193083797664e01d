#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "apter/apter.hpp"
#include "apter/error.hpp"
#include "apter/harness.hpp"
#include "apter/model_io.hpp"
#include "apter/random.hpp"
#include "apter/screening.hpp"
#include "apter/synthetic.hpp"
#include "json.hpp"

namespace apter::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

// Sidecar holding the resolved configuration of commands whose primary
// output is a CSV.
void write_meta(const fs::path& out_path, const json& config) {
    json j;
    j["schema"] = kSchemaVersion;
    j["config"] = config;
    write_text(fs::path(out_path.string() + ".meta.json"), j.dump(2) + "\n");
}

NuPolicy parse_nu(const std::string& nu, const std::vector<double>& grid, std::size_t folds) {
    if (nu == "theoretical") return NuPolicy::theoretical();
    if (nu == "cv") {
        if (folds < 2) throw ArgumentError("--folds must be >= 2");
        return NuPolicy::cv(grid, folds);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(nu.data(), nu.data() + nu.size(), v);
    if (ec != std::errc() || ptr != nu.data() + nu.size() || !(v > 0.0)) {
        throw ArgumentError("--nu must be 'theoretical', 'cv' or a positive number, got '" + nu + "'");
    }
    return NuPolicy::fixed(v);
}

std::vector<double> read_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> scores;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "score") continue;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size()) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": not a number: '" + line + "'");
        }
        scores.push_back(v);
    }
    return scores;
}

std::string shortest(double v) { return json(v).dump(); }

struct FitFlags {
    std::string method = "apter_p";
    std::string nu = "theoretical";
    std::vector<double> grid;
    std::size_t folds = 5;
    std::optional<std::size_t> per_step;
    std::optional<std::size_t> target;
    bool no_standardize = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--method", method, "apter | apter_p | isis_apter_p")
            ->check(CLI::IsMember({"apter", "apter_p", "isis_apter_p"}))
            ->capture_default_str();
        cmd->add_option("--nu", nu, "theoretical | cv | <positive value>")->capture_default_str();
        cmd->add_option("--grid", grid, "nu grid for --nu cv (default: theoretical nu x 10^{-2..2})")->delimiter(',');
        cmd->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
        cmd->add_option("--per-step", per_step, "features added per screening step");
        cmd->add_option("--target", target, "number of screened features");
        cmd->add_flag("--no-standardize", no_standardize, "screen on raw feature scales");
    }

    FitSpec resolve() const {
        FitSpec spec;
        spec.method = method_from_string(method);
        spec.nu = parse_nu(nu, grid, folds);
        if (per_step || target) {
            if (!target) throw ArgumentError("--per-step needs --target");
            spec.screening = ScreeningParams{per_step.value_or(*target), *target, !no_standardize};
        }
        return spec;
    }

    json to_json() const {
        json j;
        j["method"] = method;
        j["nu"] = nu;
        j["grid"] = grid;
        j["folds"] = folds;
        j["per_step"] = per_step ? json(*per_step) : json(nullptr);
        j["target"] = target ? json(*target) : json(nullptr);
        j["standardize"] = !no_standardize;
        return j;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aggregated prognosis through exponential reweighting", "apter"};
    app.require_subcommand(1);

    // simulate
    SyntheticConfig sim;
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out, sim_truth;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic survival dataset");
    simulate->add_option("--n", sim.n, "subjects")->capture_default_str();
    simulate->add_option("--d", sim.d, "covariates")->capture_default_str();
    simulate->add_option("--k", sim.k, "informative covariates")->capture_default_str();
    simulate->add_option("--censor-rate", sim.censor_rate, "exponential censoring rate")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "random seed")->required();
    simulate->add_option("--out", sim_out, "output CSV")->required();
    simulate->add_option("--truth", sim_truth, "optional CSV of true failure and censoring times");

    // screen
    std::string scr_data, scr_mode = "sis", scr_out, scr_csv;
    std::optional<std::size_t> scr_count, scr_per_step, scr_target;
    bool scr_standardize = false;
    auto* screen = app.add_subcommand("screen", "SIS / ISIS feature screening");
    screen->add_option("--data", scr_data, "input CSV")->required();
    screen->add_option("--mode", scr_mode, "sis | isis")->check(CLI::IsMember({"sis", "isis"}))->capture_default_str();
    screen->add_option("--count", scr_count, "features kept by sis");
    screen->add_option("--per-step", scr_per_step, "features added per isis step");
    screen->add_option("--target", scr_target, "features kept by isis");
    screen->add_flag("--standardize", scr_standardize, "z-score features before screening");
    screen->add_option("--out", scr_out, "output JSON")->required();
    screen->add_option("--scores-csv", scr_csv, "optional CSV of (feature, |m|)");

    // train
    std::string tr_data, tr_out;
    std::optional<std::uint64_t> tr_seed;
    FitFlags tr_fit;
    auto* trn = app.add_subcommand("train", "fit a model on a CSV dataset");
    trn->add_option("--data", tr_data, "training CSV")->required();
    tr_fit.attach(trn);
    trn->add_option("--seed", tr_seed, "seed for cross-validation folds");
    trn->add_option("--out", tr_out, "output model JSON")->required();

    // predict
    std::string pr_model, pr_data, pr_out;
    auto* prd = app.add_subcommand("predict", "score subjects with a trained model");
    prd->add_option("--model", pr_model, "model JSON")->required();
    prd->add_option("--data", pr_data, "CSV dataset")->required();
    prd->add_option("--out", pr_out, "output scores CSV")->required();

    // evaluate
    std::string ev_scores, ev_data, ev_out;
    auto* evl = app.add_subcommand("evaluate", "concordance index of a score file");
    evl->add_option("--scores", ev_scores, "scores CSV")->required();
    evl->add_option("--data", ev_data, "CSV dataset")->required();
    evl->add_option("--out", ev_out, "optional output JSON (default: stdout)");

    // benchmark
    std::string bm_data, bm_out_dir;
    std::optional<std::uint64_t> bm_seed;
    std::size_t bm_reps = 50;
    unsigned bm_threads = 1;
    bool bm_shuffle = false, bm_timing = false;
    FitFlags bm_fit;
    auto* bench = app.add_subcommand("benchmark", "randomized train/test evaluation");
    bench->add_option("--data", bm_data, "CSV dataset")->required();
    bm_fit.attach(bench);
    bench->add_option("--replications", bm_reps, "random splits")->capture_default_str();
    bench->add_option("--seed", bm_seed, "master seed")->required();
    bench->add_option("--threads", bm_threads, "worker threads")->capture_default_str();
    bench->add_flag("--shuffle-phenotypes", bm_shuffle, "null experiment: permute (time, status) across subjects");
    bench->add_flag("--timing", bm_timing, "fill the wall_ms column of the replication CSV");
    bench->add_option("--out-dir", bm_out_dir, "output directory")->required();

    // regret
    RegretConfig rg;
    std::optional<std::uint64_t> rg_seed;
    std::string rg_out;
    auto* regret = app.add_subcommand("regret", "C-index regret study on synthetic data");
    regret->add_option("--n-list", rg.n_list, "training sizes")->delimiter(',')->required();
    regret->add_option("--d-list", rg.d_list, "dimensions")->delimiter(',')->required();
    regret->add_option("--replications", rg.replications, "replications per cell")->capture_default_str();
    regret->add_option("--k", rg.k, "informative covariates")->capture_default_str();
    regret->add_option("--seed", rg_seed, "master seed")->required();
    regret->add_option("--threads", rg.threads, "worker threads")->capture_default_str();
    regret->add_option("--out", rg_out, "output CSV")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            sim.seed = *sim_seed;
            auto draw = generate(sim);
            {
                auto f = open_out(sim_out);
                write_csv(draw.data, f);
            }
            if (!sim_truth.empty()) {
                auto f = open_out(sim_truth);
                f << "T,C\n";
                for (std::size_t i = 0; i < draw.failure_times.size(); ++i) {
                    f << shortest(draw.failure_times[i]) << ',' << shortest(draw.censor_times[i]) << '\n';
                }
            }
            write_meta(sim_out, {{"command", "simulate"},
                                 {"n", sim.n},
                                 {"d", sim.d},
                                 {"k", sim.k},
                                 {"censor_rate", sim.censor_rate},
                                 {"seed", sim.seed},
                                 {"random_stream_version", kRandomStreamVersion}});
        } else if (*screen) {
            auto data = load_csv(scr_data);
            if (scr_standardize) data = standardize_columns(data);
            ScreeningResult result;
            if (scr_mode == "sis") {
                if (!scr_count) throw ArgumentError("sis needs --count");
                result = sis(data, data.times(), *scr_count);
            } else {
                if (!scr_target) throw ArgumentError("isis needs --target");
                result = isis(data, scr_per_step.value_or(*scr_target), *scr_target);
            }
            json j;
            j["schema"] = kSchemaVersion;
            j["config"] = {{"command", "screen"},
                           {"data", scr_data},
                           {"mode", scr_mode},
                           {"count", scr_count ? json(*scr_count) : json(nullptr)},
                           {"per_step", scr_per_step ? json(*scr_per_step) : json(nullptr)},
                           {"target", scr_target ? json(*scr_target) : json(nullptr)},
                           {"standardize", scr_standardize}};
            j["retained"] = result.retained;
            j["iterations"] = result.iterations;
            write_text(scr_out, j.dump(2) + "\n");
            if (!scr_csv.empty()) {
                auto f = open_out(scr_csv);
                f << "feature,score\n";
                for (std::size_t i = 0; i < result.retained.size(); ++i) {
                    f << result.retained[i] << ',' << shortest(result.scores[i]) << '\n';
                }
            }
        } else if (*trn) {
            const auto spec = tr_fit.resolve();
            if (spec.nu.kind == NuPolicy::Kind::cv_grid && !tr_seed) {
                throw ArgumentError("--nu cv needs --seed");
            }
            const auto data = load_csv(tr_data);
            const auto model = fit_method(data, spec, tr_seed.value_or(0));
            json config = tr_fit.to_json();
            config["command"] = "train";
            config["data"] = tr_data;
            config["seed"] = tr_seed ? json(*tr_seed) : json(nullptr);
            save_model(model, tr_out, config.dump());
        } else if (*prd) {
            const auto model = load_model(pr_model);
            const auto data = load_csv(pr_data);
            const auto scores = predict(model, data);
            auto f = open_out(pr_out);
            f << "score\n";
            for (double s : scores) f << shortest(s) << '\n';
        } else if (*evl) {
            const auto scores = read_scores(ev_scores);
            const auto data = load_csv(ev_data);
            const auto c = concordance(scores, data);
            json j;
            j["schema"] = kSchemaVersion;
            j["config"] = {{"command", "evaluate"}, {"scores", ev_scores}, {"data", ev_data}};
            j["c_index"] = c.c_index;
            j["concordant"] = c.concordant;
            j["comparable_pairs"] = c.comparable_pairs;
            if (ev_out.empty()) {
                out << j.dump(2) << '\n';
            } else {
                write_text(ev_out, j.dump(2) + "\n");
            }
        } else if (*bench) {
            ExperimentSpec spec;
            spec.fit = bm_fit.resolve();
            spec.replications = bm_reps;
            spec.seed = *bm_seed;
            spec.threads = std::max(1u, bm_threads);
            auto data = load_csv(bm_data);
            if (bm_shuffle) data = shuffle_phenotypes(data, stream_seed(spec.seed, 0xFFFFFFFFULL));

            const auto report = run_experiment(data, spec);

            json config = bm_fit.to_json();
            config["command"] = "benchmark";
            config["data"] = bm_data;
            config["replications"] = bm_reps;
            config["seed"] = spec.seed;
            config["shuffle_phenotypes"] = bm_shuffle;
            config["random_stream_version"] = kRandomStreamVersion;

            const fs::path dir(bm_out_dir);
            {
                auto f = open_out(dir / "replications.csv");
                write_replications_csv(report, f, bm_timing);
            }
            write_text(dir / "summary.json", summary_json(report, config.dump()));
            {
                // Scheduling-dependent facts live only here.
                auto log = open_out(dir / "run.log");
                log << "threads=" << spec.threads << '\n';
                for (const auto& r : report.replications) log << "seed=" << r.seed << " wall_ms=" << r.wall_ms << '\n';
            }
            if (report.summary.undefined > 0) {
                err << "warning: " << report.summary.undefined
                    << " replication(s) had no comparable test pairs and were excluded\n";
            }
        } else if (*regret) {
            rg.seed = *rg_seed;
            rg.threads = std::max(1u, rg.threads);
            const auto rows = regret_study(rg);
            {
                auto f = open_out(rg_out);
                write_regret_csv(rows, f);
            }
            write_meta(rg_out, {{"command", "regret"},
                                {"n_list", rg.n_list},
                                {"d_list", rg.d_list},
                                {"replications", rg.replications},
                                {"k", rg.k},
                                {"seed", rg.seed},
                                {"random_stream_version", kRandomStreamVersion}});
        }
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace apter::cli
