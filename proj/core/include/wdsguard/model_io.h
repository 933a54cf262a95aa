/*
 * Copyright 2026 The wdsguard Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef WDSGUARD_MODEL_IO_H_
#define WDSGUARD_MODEL_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdsguard/ensemble.h"
#include "wdsguard/features.h"

namespace wdsguard {

inline constexpr int kModelFormatVersion = 1;

// A self-describing model on disk. Exactly one of `member` or `ensemble` is
// set. Ensemble files reference their member files by name and carry the
// meta-learner weights; `load_model_file` resolves the references.
struct ModelFile {
  std::string name;
  std::vector<std::string> features;
  FeatureSpec feature_spec;
  std::optional<MemberModel> member;
  std::optional<EnsembleModel> ensemble;
  // Member file names for ensembles, relative to the ensemble file.
  std::vector<std::string> member_files;
  nlohmann::json manifest;

  std::string kind() const;
};

nlohmann::json to_json(const ScalerParams& scaler);
ScalerParams scaler_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MemberModel& member);
MemberModel member_from_json(const nlohmann::json& doc);

nlohmann::json model_file_json(const ModelFile& file);
// `dir` resolves ensemble member references; members are loaded eagerly.
ModelFile model_file_from_json(const nlohmann::json& doc,
                               const std::filesystem::path& dir);

void save_model_file(const std::filesystem::path& path, const ModelFile& file);
// Throws DataError for unreadable files or a format version newer than
// kModelFormatVersion.
ModelFile load_model_file(const std::filesystem::path& path);

// Class-1 probabilities for the listed rows of `x`, whose columns must be
// file.features in order.
std::vector<double> model_predict(const ModelFile& file, const Matrix& x,
                                  std::span<const std::size_t> rows);
RowPredictor model_row_predictor(const ModelFile& file, const Matrix& x,
                                 std::size_t context_row);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Stable file-system name for a model ("stacked:forest+gbt" ->
// "stacked_forest+gbt").
std::string model_file_stem(std::string_view model_name);

}  // namespace wdsguard

#endif  // WDSGUARD_MODEL_IO_H_
