#include "apter/model_io.hpp"

#include <fstream>
#include <sstream>

#include "apter/error.hpp"
#include "json.hpp"

namespace apter {

using nlohmann::json;

std::string model_to_json(const ApterModel& model, const std::string& config_json) {
    const auto& bank = model.bank;
    json j;
    j["schema"] = kSchemaVersion;
    j["nu"] = model.nu;
    j["mode"] = to_string(bank.mode());
    j["dim"] = bank.dim();
    json experts = json::array();
    json stats = json::array();
    for (std::size_t e = 0; e < bank.size(); ++e) {
        experts.push_back({{"feature", bank.experts()[e].feature},
                           {"sign", bank.experts()[e].sign},
                           {"weight", model.weights[e]}});
        stats.push_back({{"mean", bank.standardization()[e].mean}, {"sd", bank.standardization()[e].sd}});
    }
    j["experts"] = std::move(experts);
    j["standardization"] = std::move(stats);
    if (model.screened_features) {
        j["screened_features"] = *model.screened_features;
    } else {
        j["screened_features"] = nullptr;
    }
    if (!config_json.empty()) j["config"] = json::parse(config_json);
    return j.dump(2) + "\n";
}

ApterModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int schema = j.at("schema").get<int>();
        if (schema != kSchemaVersion) throw DataError("unsupported model schema " + std::to_string(schema));

        const auto mode = bank_mode_from_string(j.at("mode").get<std::string>());
        const auto dim = j.at("dim").get<std::size_t>();
        const auto& ex = j.at("experts");
        const auto& st = j.at("standardization");
        if (ex.size() != st.size()) throw DataError("model: experts and standardization differ in length");

        std::vector<Expert> experts;
        std::vector<Standardization> stats;
        WeightVector weights;
        for (std::size_t e = 0; e < ex.size(); ++e) {
            experts.push_back({ex[e].at("feature").get<std::size_t>(), ex[e].at("sign").get<int>()});
            weights.values.push_back(ex[e].at("weight").get<double>());
            stats.push_back({st[e].at("mean").get<double>(), st[e].at("sd").get<double>()});
        }
        std::optional<std::vector<std::size_t>> screened;
        if (j.contains("screened_features") && !j["screened_features"].is_null()) {
            screened = j["screened_features"].get<std::vector<std::size_t>>();
        }
        ExpertBank bank(mode, dim, std::move(experts), std::move(stats));
        return ApterModel{std::move(bank), std::move(weights), j.at("nu").get<double>(), std::move(screened)};
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const ApterModel& model, const std::filesystem::path& path, const std::string& config_json) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << model_to_json(model, config_json);
}

ApterModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace apter
