#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apter/harness.hpp"
#include "apter/model_io.hpp"
#include "apter/survival.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using apter::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("apter-cli-" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("simulate, train, predict, evaluate") {
    TempDir t("pipeline");
    REQUIRE(call({"simulate", "--n", "150", "--d", "30", "--k", "5", "--seed", "7", "--out", t / "d.csv", "--truth",
                  t / "truth.csv"})
                .code == 0);
    CHECK(fs::exists(t / "d.csv.meta.json"));
    CHECK(slurp(t / "truth.csv").starts_with("T,C\n"));
    REQUIRE(call({"train", "--data", t / "d.csv", "--method", "apter_p", "--out", t / "m.json"}).code == 0);
    REQUIRE(call({"predict", "--model", t / "m.json", "--data", t / "d.csv", "--out", t / "s.csv"}).code == 0);
    auto r = call({"evaluate", "--scores", t / "s.csv", "--data", t / "d.csv"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const double c = j["c_index"];
    CHECK(c > 0.5);
    CHECK(c <= 1.0);

    // The CLI model is the library fit on the same rows.
    const auto data = apter::load_csv(t / "d.csv");
    const auto lib = apter::fit_method(data, {apter::Method::apter_p, apter::NuPolicy::theoretical(), std::nullopt}, 0);
    const auto cli_model = apter::load_model(t / "m.json");
    CHECK(cli_model.weights.values == lib.weights.values);
    CHECK(cli_model.nu == lib.nu);
    CHECK(apter::predict(cli_model, data) == apter::predict(lib, data));
}

TEST_CASE("train variants") {
    TempDir t("train");
    REQUIRE(call({"simulate", "--n", "90", "--d", "20", "--k", "3", "--seed", "1", "--out", t / "d.csv"}).code == 0);
    CHECK(call({"train", "--data", t / "d.csv", "--nu", "cv", "--out", t / "m.json"}).code == 1);
    CHECK(call({"train", "--data", t / "d.csv", "--nu", "cv", "--seed", "3", "--grid", "0.1,1,10", "--out",
                t / "m.json"})
              .code == 0);
    CHECK(call({"train", "--data", t / "d.csv", "--nu", "-2", "--out", t / "m.json"}).code == 1);
    CHECK(call({"train", "--data", t / "d.csv", "--method", "isis_apter_p", "--out", t / "m.json"}).code == 1);
    REQUIRE(call({"train", "--data", t / "d.csv", "--method", "isis_apter_p", "--per-step", "3", "--target", "6",
                  "--nu", "0.5", "--out", t / "m.json"})
                .code == 0);
    const auto j = nlohmann::json::parse(slurp(t / "m.json"));
    CHECK(j["screened_features"].size() == 6);
    CHECK(j["nu"] == 0.5);
    CHECK(j["config"]["method"] == "isis_apter_p");
}

TEST_CASE("screen") {
    TempDir t("screen");
    REQUIRE(call({"simulate", "--n", "80", "--d", "25", "--k", "3", "--seed", "2", "--out", t / "d.csv"}).code == 0);
    REQUIRE(call({"screen", "--data", t / "d.csv", "--count", "5", "--out", t / "s.json", "--scores-csv",
                  t / "s.csv"})
                .code == 0);
    const auto j = nlohmann::json::parse(slurp(t / "s.json"));
    CHECK(j["retained"].size() == 5);
    CHECK(slurp(t / "s.csv").starts_with("feature,score\n"));
    CHECK(call({"screen", "--data", t / "d.csv", "--mode", "isis", "--per-step", "2", "--target", "6", "--out",
                t / "i.json"})
              .code == 0);
    CHECK(nlohmann::json::parse(slurp(t / "i.json"))["retained"].size() == 6);
    CHECK(call({"screen", "--data", t / "d.csv", "--out", t / "x.json"}).code == 1);
    CHECK(call({"screen", "--data", t / "d.csv", "--count", "26", "--out", t / "x.json"}).code == 1);
}

TEST_CASE("malformed input is a data error naming its location") {
    TempDir t("bad");
    spit(t / "bad.csv", "time,status,a,b\n1,1,0.5,2\n2,0,oops,1\n");
    auto r = call({"train", "--data", t / "bad.csv", "--out", t / "m.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("row 2") != std::string::npos);
    CHECK(r.err.find("'a'") != std::string::npos);
    CHECK(!fs::exists(t / "m.json"));

    CHECK(call({"train", "--data", t / "missing.csv", "--out", t / "m.json"}).code == 2);
    spit(t / "empty.csv", "");
    CHECK(call({"train", "--data", t / "empty.csv", "--out", t / "m.json"}).code == 2);
}

TEST_CASE("predict on mismatched dimension") {
    TempDir t("dim");
    REQUIRE(call({"simulate", "--n", "40", "--d", "5", "--k", "2", "--seed", "3", "--out", t / "a.csv"}).code == 0);
    REQUIRE(call({"simulate", "--n", "40", "--d", "6", "--k", "2", "--seed", "3", "--out", t / "b.csv"}).code == 0);
    REQUIRE(call({"train", "--data", t / "a.csv", "--out", t / "m.json"}).code == 0);
    auto r = call({"predict", "--model", t / "m.json", "--data", t / "b.csv", "--out", t / "s.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("dimension") != std::string::npos);
}

TEST_CASE("evaluate needs comparable pairs and matching lengths") {
    TempDir t("eval");
    spit(t / "d.csv", "time,status,x\n1,0,1\n2,0,2\n");
    spit(t / "s.csv", "score\n1\n2\n");
    CHECK(call({"evaluate", "--scores", t / "s.csv", "--data", t / "d.csv"}).code == 2);
    spit(t / "d.csv", "time,status,x\n1,1,1\n2,0,2\n3,1,1\n");
    CHECK(call({"evaluate", "--scores", t / "s.csv", "--data", t / "d.csv"}).code == 2);
}

TEST_CASE("usage errors") {
    CHECK(call({"train", "--bogus"}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({}).code == 1);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"simulate", "--out", "x.csv"}).code == 1);
    CHECK(call({"benchmark", "--data", "x.csv", "--out-dir", "o"}).code == 1);
    CHECK(call({"regret", "--n-list", "50", "--d-list", "20", "--out", "r.csv"}).code == 1);
}

TEST_CASE("benchmark outputs are reproducible") {
    TempDir t("bench");
    REQUIRE(call({"simulate", "--n", "90", "--d", "20", "--k", "4", "--seed", "5", "--out", t / "d.csv"}).code == 0);
    const std::vector<std::string> base{"benchmark", "--data", t / "d.csv", "--method", "apter_p", "--nu", "cv",
                                        "--replications", "6", "--seed", "11"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return call(args);
    };
    REQUIRE(with({"--out-dir", t / "a"}).code == 0);
    REQUIRE(with({"--out-dir", t / "b"}).code == 0);
    REQUIRE(with({"--out-dir", t / "c", "--threads", "3"}).code == 0);
    for (auto f : {"replications.csv", "summary.json"}) {
        CHECK(slurp(t / (std::string("a/") + f)) == slurp(t / (std::string("b/") + f)));
        CHECK(slurp(t / (std::string("a/") + f)) == slurp(t / (std::string("c/") + f)));
    }
    CHECK(fs::exists(t / "a/run.log"));
    const auto summary = nlohmann::json::parse(slurp(t / "a/summary.json"));
    CHECK(summary["replications"] == 6);
    CHECK(summary["config"]["seed"] == 11);

    REQUIRE(with({"--out-dir", t / "null", "--shuffle-phenotypes"}).code == 0);
    CHECK(slurp(t / "null/replications.csv") != slurp(t / "a/replications.csv"));

    REQUIRE(with({"--out-dir", t / "timed", "--timing"}).code == 0);
    const auto timed = slurp(t / "timed/replications.csv");
    CHECK(timed.find(",\n") == std::string::npos);
}

TEST_CASE("regret command") {
    TempDir t("regret");
    REQUIRE(call({"regret", "--n-list", "40,60", "--d-list", "15", "--replications", "3", "--seed", "4", "--out",
                  t / "r.csv"})
                .code == 0);
    const auto text = slurp(t / "r.csv");
    CHECK(text.starts_with("n,d,m,c_err_median,c_err_mean,bound\n40,15,30,"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(fs::exists(t / "r.csv.meta.json"));
}
