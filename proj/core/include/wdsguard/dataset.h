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

#ifndef WDSGUARD_DATASET_H_
#define WDSGUARD_DATASET_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdsguard/matrix.h"

namespace wdsguard {

using Timestamp = std::chrono::sys_seconds;

// The 43 BATADAL sensor channels in the order the public files use.
inline constexpr std::array<std::string_view, 43> kBatadalSensors = {
    "L_T1",   "L_T2",   "L_T3",   "L_T4",   "L_T5",   "L_T6",   "L_T7",
    "F_PU1",  "S_PU1",  "F_PU2",  "S_PU2",  "F_PU3",  "S_PU3",  "F_PU4",
    "S_PU4",  "F_PU5",  "S_PU5",  "F_PU6",  "S_PU6",  "F_PU7",  "S_PU7",
    "F_PU8",  "S_PU8",  "F_PU9",  "S_PU9",  "F_PU10", "S_PU10", "F_PU11",
    "S_PU11", "F_V2",   "S_V2",   "P_J280", "P_J269", "P_J300", "P_J256",
    "P_J289", "P_J415", "P_J302", "P_J306", "P_J307", "P_J317", "P_J14",
    "P_J422"};

inline constexpr std::string_view kDatetimeColumn = "DATETIME";
inline constexpr std::string_view kFlagColumn = "ATT_FLAG";

// Timestamp-indexed table of named channels plus a binary attack label.
// Values are stored row-major: one row per hour, one column per channel.
class TimeSeriesFrame {
 public:
  TimeSeriesFrame() = default;
  TimeSeriesFrame(std::vector<Timestamp> timestamps,
                  std::vector<std::string> channel_names, Matrix values,
                  Labels labels);

  std::size_t size() const { return timestamps_.size(); }
  std::size_t channel_count() const { return names_.size(); }

  const std::vector<Timestamp>& timestamps() const { return timestamps_; }
  const std::vector<std::string>& channel_names() const { return names_; }
  const Matrix& values() const { return values_; }
  const Labels& labels() const { return labels_; }

  std::optional<std::size_t> find_channel(std::string_view name) const;
  // Throws DataError naming the channel when absent.
  std::size_t channel_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;

  // Columns in the order given; throws DataError on an unknown name.
  Matrix select_columns(std::span<const std::string> names) const;

  // Appends channels; every column must have size() entries.
  TimeSeriesFrame with_channels(
      std::span<const std::string> names,
      std::span<const std::vector<double>> columns) const;

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<std::string> names_;
  Matrix values_;
  Labels labels_;
};

// Parses "dd/mm/yy HH", falling back to "dd/mm/yyyy HH:MM".
std::optional<Timestamp> parse_batadal_datetime(std::string_view text);
std::string format_batadal_datetime(Timestamp ts);

// Loads and concatenates BATADAL-format files in the given order. The flag
// column may be spelled ATT_FLAG or "Attack Flag" with arbitrary surrounding
// whitespace; any flag value > 0.5 becomes 1, everything else 0 (the public
// files use -999 for unlabeled hours). Channels come back in kBatadalSensors
// order; columns that are not BATADAL sensors are ignored.
TimeSeriesFrame load_batadal(std::span<const std::filesystem::path> paths);
TimeSeriesFrame parse_batadal(std::string_view text,
                              std::string_view source_name);

// Writes the frame with a DATETIME column, its channels, and ATT_FLAG.
std::string to_batadal_csv(const TimeSeriesFrame& frame);

struct ClassBalance {
  std::size_t count0 = 0;
  std::size_t count1 = 0;
  double minority_fraction = 0.0;
};

ClassBalance class_balance(std::span<const int> labels);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

// Per-class random partition: round(ratio * n_c) rows of class c go to
// train. Both index lists are returned sorted.
SplitIndices stratified_split(std::span<const int> labels, double ratio,
                              std::uint64_t seed);

enum class ScalerKind { kZScore, kMinMax };

std::string_view to_string(ScalerKind kind);
ScalerKind scaler_kind_from_string(std::string_view text);

struct ScalerParams {
  ScalerKind kind = ScalerKind::kZScore;
  std::vector<std::string> columns;
  // z-score: offset = mean, scale = population std (1 when degenerate).
  // minmax: offset = min, scale = max - min (1 when degenerate).
  std::vector<double> offset;
  std::vector<double> scale;
  // minmax only: fitted maximum per column.
  std::vector<double> upper;

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

inline constexpr double kScaleEpsilon = 1e-12;

ScalerParams fit_scaler(const Matrix& x, std::span<const std::string> columns,
                        ScalerKind kind);
Matrix apply_scaler(const ScalerParams& params, const Matrix& x,
                    std::span<const std::string> columns);
Matrix invert_scaler(const ScalerParams& params, const Matrix& x,
                     std::span<const std::string> columns);

// 64-bit FNV-1a over raw bytes; used as a data fingerprint.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t state = 0xCBF29CE484222325ULL);
std::uint64_t fingerprint_files(std::span<const std::filesystem::path> paths);

}  // namespace wdsguard

#endif  // WDSGUARD_DATASET_H_
