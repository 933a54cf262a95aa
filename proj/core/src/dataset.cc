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

#include "wdsguard/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

bool is_flag_name(std::string_view name) {
  return iequals(name, "ATT_FLAG") || iequals(name, "Attack Flag");
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

TimeSeriesFrame::TimeSeriesFrame(std::vector<Timestamp> timestamps,
                                 std::vector<std::string> channel_names,
                                 Matrix values, Labels labels)
    : timestamps_(std::move(timestamps)),
      names_(std::move(channel_names)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  if (values_.rows() != timestamps_.size() ||
      labels_.size() != timestamps_.size()) {
    throw DataError("frame columns have different lengths");
  }
  if (values_.cols() != names_.size() && !timestamps_.empty()) {
    throw DataError("frame channel count does not match its names");
  }
  std::vector<std::string> sorted = names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DataError("frame channel names are not unique");
  }
  for (int label : labels_) {
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
  }
}

std::optional<std::size_t> TimeSeriesFrame::find_channel(
    std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t TimeSeriesFrame::channel_index(std::string_view name) const {
  if (auto idx = find_channel(name)) return *idx;
  throw DataError(fmt::format("unknown channel '{}'", name));
}

std::vector<double> TimeSeriesFrame::column(std::string_view name) const {
  return values_.column(channel_index(name));
}

Matrix TimeSeriesFrame::select_columns(
    std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(channel_index(n));
  Matrix out(size(), names.size());
  for (std::size_t r = 0; r < size(); ++r) {
    const auto src = values_.row(r);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
  }
  return out;
}

TimeSeriesFrame TimeSeriesFrame::with_channels(
    std::span<const std::string> names,
    std::span<const std::vector<double>> columns) const {
  if (names.size() != columns.size()) {
    throw InvalidArgument("channel names and columns differ in count");
  }
  for (const auto& c : columns) {
    if (c.size() != size()) throw DataError("appended column has wrong length");
  }
  std::vector<std::string> all_names = names_;
  all_names.insert(all_names.end(), names.begin(), names.end());
  const std::size_t width = all_names.size();
  Matrix values(size(), width);
  for (std::size_t r = 0; r < size(); ++r) {
    const auto src = values_.row(r);
    auto dst = values.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      dst[names_.size() + j] = columns[j][r];
    }
  }
  return TimeSeriesFrame(timestamps_, std::move(all_names), std::move(values),
                         labels_);
}

std::optional<Timestamp> parse_batadal_datetime(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  const auto space = text.find(' ');
  if (space == std::string_view::npos) return std::nullopt;
  std::string_view date_part = text.substr(0, space);
  std::string_view time_part = trim(text.substr(space + 1));

  std::vector<std::string_view> dmy;
  std::size_t start = 0;
  for (;;) {
    const auto pos = date_part.find('/', start);
    dmy.push_back(date_part.substr(start, pos == std::string_view::npos
                                              ? std::string_view::npos
                                              : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (dmy.size() != 3) return std::nullopt;
  const auto d = parse_int(dmy[0]);
  const auto m = parse_int(dmy[1]);
  auto y = parse_int(dmy[2]);
  if (!d || !m || !y) return std::nullopt;
  if (dmy[2].size() == 2) {
    *y += 2000;
  } else if (dmy[2].size() != 4) {
    return std::nullopt;
  }

  int hour = 0;
  int minute = 0;
  const auto colon = time_part.find(':');
  if (colon == std::string_view::npos) {
    const auto h = parse_int(time_part);
    if (!h) return std::nullopt;
    hour = *h;
  } else {
    const auto h = parse_int(time_part.substr(0, colon));
    const auto mm = parse_int(time_part.substr(colon + 1));
    if (!h || !mm) return std::nullopt;
    hour = *h;
    minute = *mm;
  }
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59) return std::nullopt;

  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd} + hours{hour} + minutes{minute};
}

std::string format_batadal_datetime(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const auto hour = duration_cast<hours>(ts - day_point).count();
  return fmt::format("{:02}/{:02}/{:02} {:02}",
                     static_cast<unsigned>(ymd.day()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<int>(ymd.year()) % 100, hour);
}

TimeSeriesFrame parse_batadal(std::string_view text,
                              std::string_view source_name) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto pos = text.find('\n', start);
      if (pos == std::string_view::npos) pos = text.size();
      auto line = text.substr(start, pos - start);
      if (!trim(line).empty()) lines.push_back(line);
      start = pos + 1;
    }
  }
  if (lines.empty()) {
    throw DataError(fmt::format("{}: empty file", source_name));
  }

  const auto header = split_commas(lines.front());
  std::optional<std::size_t> datetime_col;
  std::optional<std::size_t> flag_col;
  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = trim(header[i]);
    if (iequals(name, kDatetimeColumn)) {
      datetime_col = i;
    } else if (is_flag_name(name)) {
      flag_col = i;
    } else {
      header_index.emplace(std::string(name), i);
    }
  }
  if (!datetime_col) {
    throw DataError(fmt::format("{}: missing required column '{}'",
                                source_name, kDatetimeColumn));
  }
  if (!flag_col) {
    throw DataError(fmt::format("{}: missing required column '{}'",
                                source_name, kFlagColumn));
  }
  std::vector<std::size_t> sensor_cols;
  for (auto sensor : kBatadalSensors) {
    const auto it = header_index.find(std::string(sensor));
    if (it == header_index.end()) {
      throw DataError(fmt::format("{}: missing required column '{}'",
                                  source_name, sensor));
    }
    sensor_cols.push_back(it->second);
  }
  if (lines.size() < 2) {
    throw DataError(fmt::format("{}: empty file (header only)", source_name));
  }

  std::vector<Timestamp> timestamps;
  Labels labels;
  Matrix values(lines.size() - 1, kBatadalSensors.size());
  timestamps.reserve(lines.size() - 1);
  labels.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const auto cells = split_commas(lines[li]);
    if (cells.size() != header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} cells, found {}",
                                  source_name, line_no, header.size(),
                                  cells.size()));
    }
    const auto ts = parse_batadal_datetime(cells[*datetime_col]);
    if (!ts) {
      throw DataError(fmt::format("{}:{}: unparseable datetime '{}'",
                                  source_name, line_no,
                                  trim(cells[*datetime_col])));
    }
    if (!timestamps.empty() && *ts <= timestamps.back()) {
      throw DataError(fmt::format("{}:{}: timestamps not strictly increasing",
                                  source_name, line_no));
    }
    timestamps.push_back(*ts);
    auto row = values.row(li - 1);
    for (std::size_t j = 0; j < sensor_cols.size(); ++j) {
      const auto v = parse_double(cells[sensor_cols[j]]);
      if (!v) {
        throw DataError(fmt::format("{}:{}: non-numeric value '{}' in '{}'",
                                    source_name, line_no,
                                    trim(cells[sensor_cols[j]]),
                                    kBatadalSensors[j]));
      }
      row[j] = *v;
    }
    const auto flag = parse_double(cells[*flag_col]);
    if (!flag) {
      throw DataError(fmt::format("{}:{}: non-numeric attack flag '{}'",
                                  source_name, line_no,
                                  trim(cells[*flag_col])));
    }
    labels.push_back(*flag > 0.5 ? 1 : 0);
  }
  return TimeSeriesFrame(
      std::move(timestamps),
      std::vector<std::string>(kBatadalSensors.begin(), kBatadalSensors.end()),
      std::move(values), std::move(labels));
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TimeSeriesFrame load_batadal(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw DataError("no data files given");
  std::vector<Timestamp> timestamps;
  Labels labels;
  std::vector<double> data;
  for (const auto& path : paths) {
    const auto part = parse_batadal(read_file(path), path.string());
    timestamps.insert(timestamps.end(), part.timestamps().begin(),
                      part.timestamps().end());
    labels.insert(labels.end(), part.labels().begin(), part.labels().end());
    data.insert(data.end(), part.values().data().begin(),
                part.values().data().end());
  }
  const std::size_t rows = timestamps.size();
  return TimeSeriesFrame(
      std::move(timestamps),
      std::vector<std::string>(kBatadalSensors.begin(), kBatadalSensors.end()),
      Matrix(rows, kBatadalSensors.size(), std::move(data)), std::move(labels));
}

std::string to_batadal_csv(const TimeSeriesFrame& frame) {
  std::string out(kDatetimeColumn);
  for (const auto& name : frame.channel_names()) {
    out += ',';
    out += name;
  }
  out += ',';
  out += kFlagColumn;
  out += '\n';
  for (std::size_t r = 0; r < frame.size(); ++r) {
    out += format_batadal_datetime(frame.timestamps()[r]);
    for (double v : frame.values().row(r)) {
      out += fmt::format(",{}", v);
    }
    out += fmt::format(",{}\n", frame.labels()[r]);
  }
  return out;
}

ClassBalance class_balance(std::span<const int> labels) {
  ClassBalance out;
  for (int y : labels) (y == 1 ? out.count1 : out.count0)++;
  const std::size_t total = out.count0 + out.count1;
  if (total > 0) {
    out.minority_fraction =
        static_cast<double>(std::min(out.count0, out.count1)) /
        static_cast<double>(total);
  }
  return out;
}

SplitIndices stratified_split(std::span<const int> labels, double ratio,
                              std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument(fmt::format("split ratio {} outside (0, 1)", ratio));
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw InvalidArgument(
          fmt::format("stratified split needs both classes; class {} is empty",
                      c));
    }
  }
  SplitIndices out;
  out.seed = seed;
  out.ratio = ratio;
  Rng rng(seed);
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(),
                     members.begin() + n_train);
    out.valid.insert(out.valid.end(), members.begin() + n_train,
                     members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  return out;
}

std::string_view to_string(ScalerKind kind) {
  return kind == ScalerKind::kZScore ? "zscore" : "minmax";
}

ScalerKind scaler_kind_from_string(std::string_view text) {
  if (text == "zscore") return ScalerKind::kZScore;
  if (text == "minmax") return ScalerKind::kMinMax;
  throw InvalidArgument(fmt::format("unknown scaler kind '{}'", text));
}

ScalerParams fit_scaler(const Matrix& x, std::span<const std::string> columns,
                        ScalerKind kind) {
  if (x.rows() == 0) throw InvalidArgument("cannot fit a scaler on no rows");
  if (x.cols() != columns.size()) {
    throw InvalidArgument("scaler column names do not match matrix width");
  }
  ScalerParams p;
  p.kind = kind;
  p.columns.assign(columns.begin(), columns.end());
  const std::size_t d = x.cols();
  const double n = static_cast<double>(x.rows());
  p.offset.assign(d, 0.0);
  p.scale.assign(d, 1.0);
  if (kind == ScalerKind::kZScore) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, j);
      mean /= n;
      double ss = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double dev = x(r, j) - mean;
        ss += dev * dev;
      }
      const double sd = std::sqrt(ss / n);
      p.offset[j] = mean;
      p.scale[j] = sd < kScaleEpsilon ? 1.0 : sd;
    }
  } else {
    p.upper.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double lo = x(0, j);
      double hi = x(0, j);
      for (std::size_t r = 1; r < x.rows(); ++r) {
        lo = std::min(lo, x(r, j));
        hi = std::max(hi, x(r, j));
      }
      p.offset[j] = lo;
      p.upper[j] = hi;
      p.scale[j] = hi - lo < kScaleEpsilon ? 1.0 : hi - lo;
    }
  }
  return p;
}

namespace {

void check_columns(const ScalerParams& params, const Matrix& x,
                   std::span<const std::string> columns) {
  if (columns.size() != params.columns.size() ||
      !std::equal(columns.begin(), columns.end(), params.columns.begin())) {
    for (const auto& c : columns) {
      if (std::find(params.columns.begin(), params.columns.end(), c) ==
          params.columns.end()) {
        throw DataError(
            fmt::format("scaler was not fitted on column '{}'", c));
      }
    }
    throw DataError("scaler columns differ in order or count");
  }
  if (x.cols() != columns.size()) {
    throw InvalidArgument("matrix width does not match column names");
  }
}

}  // namespace

Matrix apply_scaler(const ScalerParams& params, const Matrix& x,
                    std::span<const std::string> columns) {
  check_columns(params, x, columns);
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = (row[j] - params.offset[j]) / params.scale[j];
    }
  }
  return out;
}

Matrix invert_scaler(const ScalerParams& params, const Matrix& x,
                     std::span<const std::string> columns) {
  check_columns(params, x, columns);
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = row[j] * params.scale[j] + params.offset[j];
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001B3ULL;
  }
  return state;
}

std::uint64_t fingerprint_files(std::span<const std::filesystem::path> paths) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& p : paths) h = fnv1a64(read_file(p), h);
  return h;
}

}  // namespace wdsguard
