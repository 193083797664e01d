#pragma once

#include <filesystem>
#include <string>

#include "apter/apter.hpp"

namespace apter {

inline constexpr int kSchemaVersion = 1;

/// JSON text of a trained model. Doubles are written in shortest
/// round-trip form, so save/load reproduces every bit.
std::string model_to_json(const ApterModel& model, const std::string& config_json = "");
ApterModel model_from_json(const std::string& text);

void save_model(const ApterModel& model, const std::filesystem::path& path, const std::string& config_json = "");
ApterModel load_model(const std::filesystem::path& path);

}  // namespace apter
