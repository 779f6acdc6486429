#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairgi/data_io.hpp"
#include "fairgi/trainer.hpp"

namespace fairgi {

// Column layout of an on-disk dataset; paths come from the data directory.
struct DatasetOptions {
  std::string name;
  std::string id_column = "id";
  std::string sensitive_column = "sensitive";
  std::string label_column = "label";
  std::vector<std::string> feature_columns;  // empty: every other column
  char delimiter = ',';
};

// A config file: TrainConfig fields at the top level (names match the struct
// fields), an optional "preset" supplying the defaults they override, and
// optional "dataset" and "synthetic" sections.
struct RunConfig {
  std::optional<std::string> preset;
  TrainConfig train;
  DatasetOptions dataset;
  std::optional<SyntheticConfig> synthetic;
};

nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const SyntheticConfig& config);
nlohmann::json to_json(const DatasetOptions& options);
nlohmann::json to_json(const RunConfig& config);

// Keys absent from `j` keep the value in `base`. Unknown keys and ill-typed
// values raise config errors.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j, SyntheticConfig base = {});
DatasetOptions dataset_options_from_json(const nlohmann::json& j, DatasetOptions base = {});
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

// Stable 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const TrainConfig& config);

// "vanilla", "full", "w/o Ifg", "w/o EO" or "w/o Ifg, EO".
std::string variant_name(const TrainConfig& config);

DatasetSchema schema_for(const DatasetOptions& options, const std::filesystem::path& data_dir);

}  // namespace fairgi
