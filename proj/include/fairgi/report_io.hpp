#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairgi/metrics.hpp"
#include "fairgi/trainer.hpp"

namespace fairgi {

nlohmann::json to_json(const FairnessReport& report);
// Throws a parse error when a field is missing or has the wrong type.
FairnessReport report_from_json(const nlohmann::json& j);

// Files are written to a sibling temporary and renamed into place.
void save_report(const FairnessReport& report, const std::filesystem::path& path);
FairnessReport load_report(const std::filesystem::path& path);

nlohmann::json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Columns: epoch, L_C, L_A1, L_A2, L_R1, L_R2, L_Ifg, L_total.
void save_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

// Writes `text` to path via a temporary file in the same directory.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace fairgi
