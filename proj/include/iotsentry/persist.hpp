#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "iotsentry/data.hpp"
#include "iotsentry/metrics.hpp"
#include "iotsentry/model.hpp"
#include "iotsentry/tuning.hpp"

namespace iotsentry {

inline constexpr int kArtifactFormatVersion = 1;

struct TrainingMetadata {
    std::uint64_t seed = 0;
    std::size_t row_count = 0;
    std::string timestamp;  // ISO-8601 UTC
};

/// A fitted model plus everything needed to apply it to new data.
struct ModelArtifact {
    int format_version = kArtifactFormatVersion;
    FittedModel model;
    std::vector<std::string> feature_names;
    TrainingMetadata training;
};

/// UTC time from SOURCE_DATE_EPOCH when set, otherwise the wall clock.
std::string artifact_timestamp();

nlohmann::json to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::json& j);
void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);
ModelArtifact load_artifact(const std::filesystem::path& path);

nlohmann::json to_json(const ParamValue& v);
ParamValue param_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParamSet& p);
ParamSet params_from_json(const nlohmann::json& j);
ParamGrid grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CVResult& cv);
CVResult cv_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PreprocessReport& report);
PreprocessReport preprocess_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j, std::size_t n_features, std::size_t value_count);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace iotsentry
