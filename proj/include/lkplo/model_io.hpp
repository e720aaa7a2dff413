#pragma once

// JSON container for fitted models, format tag "lkplo-model-v1".

#include "lkplo/data.hpp"
#include "lkplo/plo.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace lkplo {

inline constexpr const char* kModelFormat = "lkplo-model-v1";

// A fitted model plus the input standardization it was trained under, if any.
struct SavedModel {
    LkploModel model;
    std::optional<Standardizer> standardizer;
};

nlohmann::json to_json(const SavedModel& saved);
SavedModel saved_model_from_json(const nlohmann::json& j);

std::string serialize(const SavedModel& saved);
SavedModel deserialize(const std::string& text);

void save_model(const SavedModel& saved, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

// Standardizes (when present) and scores raw input rows.
std::vector<double> score_raw(const SavedModel& saved, const Matrix& X_raw);

}  // namespace lkplo
