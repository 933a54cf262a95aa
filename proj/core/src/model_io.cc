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


#include "wdsguard/model_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <fmt/format.h>

#include "wdsguard/errors.h"

namespace wdsguard {

using nlohmann::json;

namespace {

json tree_json(const Tree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), value = json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

Tree tree_from_json(const json& doc) {
  const auto feature = doc.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = doc.at("threshold").get<std::vector<double>>();
  const auto left = doc.at("left").get<std::vector<std::int32_t>>();
  const auto right = doc.at("right").get<std::vector<std::int32_t>>();
  const auto value = doc.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n || n == 0) {
    throw DataError("malformed tree: node arrays differ in length");
  }
  Tree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node = {feature[i], threshold[i], left[i], right[i], value[i]};
    if (!node.is_leaf()) {
      const auto bad = [n](std::int32_t c) {
        return c <= 0 || static_cast<std::size_t>(c) >= n;
      };
      if (bad(node.left) || bad(node.right)) {
        throw DataError("malformed tree: child index out of range");
      }
    }
  }
  return tree;
}

json trees_json(const std::vector<Tree>& trees) {
  json out = json::array();
  for (const auto& t : trees) out.push_back(tree_json(t));
  return out;
}

std::vector<Tree> trees_from_json(const json& doc) {
  std::vector<Tree> out;
  for (const auto& t : doc) out.push_back(tree_from_json(t));
  return out;
}

json forest_config_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"min_samples_leaf", c.min_samples_leaf},
          {"max_features", c.max_features},
          {"bootstrap", c.bootstrap},
          {"class_weight", {c.class_weight0, c.class_weight1}},
          {"seed", c.seed}};
}

ForestConfig forest_config_from_json(const json& doc) {
  ForestConfig c;
  c.n_trees = doc.at("n_trees").get<int>();
  c.max_depth = doc.at("max_depth").get<int>();
  c.min_samples_leaf = doc.at("min_samples_leaf").get<int>();
  c.max_features = doc.at("max_features").get<int>();
  c.bootstrap = doc.at("bootstrap").get<bool>();
  c.class_weight0 = doc.at("class_weight").at(0).get<double>();
  c.class_weight1 = doc.at("class_weight").at(1).get<double>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

json gbt_config_json(const GbtConfig& c) {
  return {{"n_rounds", c.n_rounds},
          {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate},
          {"lambda_l2", c.lambda_l2},
          {"gamma_min_gain", c.gamma_min_gain},
          {"min_child_weight", c.min_child_weight},
          {"base_score", c.base_score ? json(*c.base_score) : json(nullptr)},
          {"seed", c.seed}};
}

GbtConfig gbt_config_from_json(const json& doc) {
  GbtConfig c;
  c.n_rounds = doc.at("n_rounds").get<int>();
  c.max_depth = doc.at("max_depth").get<int>();
  c.learning_rate = doc.at("learning_rate").get<double>();
  c.lambda_l2 = doc.at("lambda_l2").get<double>();
  c.gamma_min_gain = doc.at("gamma_min_gain").get<double>();
  c.min_child_weight = doc.at("min_child_weight").get<double>();
  if (!doc.at("base_score").is_null()) c.base_score = doc.at("base_score").get<double>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

json lstm_config_json(const LstmConfig& c) {
  json weights = nullptr;
  if (c.class_weights) weights = {c.class_weights->first, c.class_weights->second};
  return {{"hidden_units", c.hidden_units},
          {"dropout_rate", c.dropout_rate},
          {"seq_len", c.seq_len},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"class_weights", weights},
          {"clamp", {c.clamp_low, c.clamp_high}},
          {"seed", c.seed}};
}

LstmConfig lstm_config_from_json(const json& doc) {
  LstmConfig c;
  c.hidden_units = doc.at("hidden_units").get<int>();
  c.dropout_rate = doc.at("dropout_rate").get<double>();
  c.seq_len = doc.at("seq_len").get<int>();
  c.epochs = doc.at("epochs").get<int>();
  c.batch_size = doc.at("batch_size").get<int>();
  c.learning_rate = doc.at("learning_rate").get<double>();
  if (!doc.at("class_weights").is_null()) {
    c.class_weights = std::pair{doc["class_weights"].at(0).get<double>(),
                                doc["class_weights"].at(1).get<double>()};
  }
  c.clamp_low = doc.at("clamp").at(0).get<double>();
  c.clamp_high = doc.at("clamp").at(1).get<double>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

// Values are stored row-major.
template <typename M>
json tensor_json(const M& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", values}};
}

template <typename M>
M tensor_from_json(const json& doc) {
  const auto rows = doc.at("rows").get<Eigen::Index>();
  const auto cols = doc.at("cols").get<Eigen::Index>();
  const auto values = doc.at("values").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != values.size()) {
    throw DataError("malformed tensor: shape does not match value count");
  }
  M m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<typename M::Scalar>(values[k++]);
    }
  }
  return m;
}

json lstm_json(const LstmModel& model) {
  const auto& p = model.params;
  return {{"config", lstm_config_json(model.config)},
          {"w_in", tensor_json(p.w_in)},
          {"w_rec", tensor_json(p.w_rec)},
          {"bias", tensor_json(p.bias)},
          {"w_out", tensor_json(p.w_out)},
          {"b_out", tensor_json(p.b_out)},
          {"class_weights", {model.class_weights.first, model.class_weights.second}},
          {"epoch_loss", model.epoch_loss},
          {"warnings", model.warnings}};
}

LstmModel lstm_from_json(const json& doc) {
  using P = LstmParams<float>;
  LstmModel m;
  m.config = lstm_config_from_json(doc.at("config"));
  m.params.w_in = tensor_from_json<P::Mat>(doc.at("w_in"));
  m.params.w_rec = tensor_from_json<P::Mat>(doc.at("w_rec"));
  m.params.bias = tensor_from_json<P::Vec>(doc.at("bias"));
  m.params.w_out = tensor_from_json<P::Vec>(doc.at("w_out"));
  m.params.b_out = tensor_from_json<P::Vec>(doc.at("b_out"));
  const auto h = m.params.w_rec.cols();
  if (m.params.w_rec.rows() != 4 * h || m.params.w_in.rows() != 4 * h ||
      m.params.bias.size() != 4 * h || m.params.w_out.size() != h ||
      m.params.b_out.size() != 1) {
    throw DataError("malformed LSTM: inconsistent tensor shapes");
  }
  m.class_weights = {doc.at("class_weights").at(0).get<double>(),
                     doc.at("class_weights").at(1).get<double>()};
  m.epoch_loss = doc.at("epoch_loss").get<std::vector<double>>();
  m.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return m;
}

json meta_json(const MetaLearner& meta) {
  return {{"weights", meta.weights},
          {"intercept", meta.intercept},
          {"fitted", meta.fitted},
          {"iterations", meta.iterations},
          {"gradient_norm", meta.gradient_norm}};
}

MetaLearner meta_from_json(const json& doc) {
  MetaLearner m;
  m.weights = doc.at("weights").get<std::vector<double>>();
  m.intercept = doc.at("intercept").get<double>();
  m.fitted = doc.at("fitted").get<bool>();
  m.iterations = doc.at("iterations").get<int>();
  m.gradient_norm = doc.at("gradient_norm").get<double>();
  return m;
}

json stack_config_json(const StackConfig& c) {
  json members = json::array();
  for (auto k : c.members) members.push_back(std::string(to_string(k)));
  return {{"members", members},
          {"combiner", std::string(to_string(c.combiner))},
          {"meta", {{"l2", c.meta.l2},
                    {"max_iterations", c.meta.max_iterations},
                    {"tolerance", c.meta.tolerance}}},
          {"oof_folds", c.oof_folds},
          {"seed", c.seed}};
}

StackConfig stack_config_from_json(const json& doc) {
  StackConfig c;
  for (const auto& m : doc.at("members")) {
    c.members.push_back(member_kind_from_string(m.get<std::string>()));
  }
  c.combiner = combiner_from_string(doc.at("combiner").get<std::string>());
  c.meta.l2 = doc.at("meta").at("l2").get<double>();
  c.meta.max_iterations = doc.at("meta").at("max_iterations").get<int>();
  c.meta.tolerance = doc.at("meta").at("tolerance").get<double>();
  c.oof_folds = doc.at("oof_folds").get<int>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string ModelFile::kind() const {
  if (ensemble) return "ensemble";
  if (member) return std::string(to_string(member->kind));
  return "empty";
}

json to_json(const ScalerParams& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"columns", s.columns},
          {"offset", s.offset},
          {"scale", s.scale},
          {"upper", s.upper}};
}

ScalerParams scaler_from_json(const json& doc) {
  ScalerParams s;
  s.kind = scaler_kind_from_string(doc.at("kind").get<std::string>());
  s.columns = doc.at("columns").get<std::vector<std::string>>();
  s.offset = doc.at("offset").get<std::vector<double>>();
  s.scale = doc.at("scale").get<std::vector<double>>();
  s.upper = doc.at("upper").get<std::vector<double>>();
  if (s.offset.size() != s.columns.size() || s.scale.size() != s.columns.size()) {
    throw DataError("malformed scaler: parameter count does not match columns");
  }
  return s;
}

json to_json(const FeatureSpec& spec) {
  return {{"base", spec.base_features},
          {"lag1", spec.lag1},
          {"lag3", spec.lag3},
          {"diff1", spec.diff1},
          {"rolling_mean", spec.rolling_mean},
          {"rolling_std", spec.rolling_std},
          {"window", spec.window}};
}

FeatureSpec feature_spec_from_json(const json& doc) {
  FeatureSpec spec;
  spec.base_features = doc.at("base").get<std::vector<std::string>>();
  spec.lag1 = doc.at("lag1").get<bool>();
  spec.lag3 = doc.at("lag3").get<bool>();
  spec.diff1 = doc.at("diff1").get<bool>();
  spec.rolling_mean = doc.at("rolling_mean").get<bool>();
  spec.rolling_std = doc.at("rolling_std").get<bool>();
  spec.window = doc.at("window").get<int>();
  return spec;
}

json to_json(const MemberModel& m) {
  json payload;
  if (m.forest) {
    payload = {{"config", forest_config_json(m.forest->config)},
               {"trees", trees_json(m.forest->trees)},
               {"importance", m.forest->importance}};
  } else if (m.gbt) {
    payload = {{"config", gbt_config_json(m.gbt->config)},
               {"base_score", m.gbt->base_score},
               {"trees", trees_json(m.gbt->trees)},
               {"training_loss", m.gbt->training_loss}};
  } else if (m.lstm) {
    payload = lstm_json(*m.lstm);
  } else {
    throw InvalidArgument("cannot serialize an unfitted member");
  }
  return {{"kind", std::string(to_string(m.kind))},
          {"features", m.features},
          {"scaler", to_json(m.scaler)},
          {"resampling", {{"rows_before", m.rows_before},
                          {"minority_before", m.minority_before},
                          {"rows_after", m.rows_after},
                          {"minority_after", m.minority_after}}},
          {"warnings", m.warnings},
          {"payload", payload}};
}

MemberModel member_from_json(const json& doc) {
  MemberModel m;
  m.kind = member_kind_from_string(doc.at("kind").get<std::string>());
  m.features = doc.at("features").get<std::vector<std::string>>();
  m.scaler = scaler_from_json(doc.at("scaler"));
  const auto& r = doc.at("resampling");
  m.rows_before = r.at("rows_before").get<std::size_t>();
  m.minority_before = r.at("minority_before").get<std::size_t>();
  m.rows_after = r.at("rows_after").get<std::size_t>();
  m.minority_after = r.at("minority_after").get<std::size_t>();
  m.warnings = doc.at("warnings").get<std::vector<std::string>>();
  const auto& p = doc.at("payload");
  switch (m.kind) {
    case MemberKind::kForest: {
      ForestModel f;
      f.config = forest_config_from_json(p.at("config"));
      f.trees = trees_from_json(p.at("trees"));
      f.importance = p.at("importance").get<std::vector<double>>();
      f.feature_names = m.features;
      m.forest = std::move(f);
      break;
    }
    case MemberKind::kGbt: {
      GbtModel g;
      g.config = gbt_config_from_json(p.at("config"));
      g.base_score = p.at("base_score").get<double>();
      g.trees = trees_from_json(p.at("trees"));
      g.training_loss = p.at("training_loss").get<std::vector<double>>();
      g.feature_names = m.features;
      m.gbt = std::move(g);
      break;
    }
    case MemberKind::kLstm: {
      LstmModel l = lstm_from_json(p);
      if (l.params.inputs() != static_cast<int>(m.features.size())) {
        throw DataError("malformed LSTM: input width does not match features");
      }
      l.feature_names = m.features;
      l.scaler = m.scaler;
      m.lstm = std::move(l);
      break;
    }
  }
  return m;
}

json model_file_json(const ModelFile& file) {
  json doc = {{"format_version", kModelFormatVersion},
              {"name", file.name},
              {"kind", file.kind()},
              {"features", file.features},
              {"feature_spec", to_json(file.feature_spec)},
              {"manifest", file.manifest}};
  if (file.member) {
    doc["scaler"] = to_json(file.member->scaler);
    doc["payload"] = to_json(*file.member);
  } else if (file.ensemble) {
    if (file.member_files.size() != file.ensemble->members.size()) {
      throw InvalidArgument("ensemble file needs one member file per member");
    }
    doc["scaler"] = nullptr;
    doc["payload"] = {{"stack", stack_config_json(file.ensemble->config)},
                      {"meta", meta_json(file.ensemble->meta)},
                      {"member_files", file.member_files}};
  } else {
    throw InvalidArgument("model file holds no model");
  }
  return doc;
}

ModelFile model_file_from_json(const json& doc, const std::filesystem::path& dir) {
  const int version = doc.at("format_version").get<int>();
  if (version > kModelFormatVersion) {
    throw DataError(fmt::format(
        "model format version {} is newer than supported version {}", version,
        kModelFormatVersion));
  }
  if (version < 1) throw DataError(fmt::format("invalid model format version {}", version));
  ModelFile file;
  file.name = doc.at("name").get<std::string>();
  file.features = doc.at("features").get<std::vector<std::string>>();
  file.feature_spec = feature_spec_from_json(doc.at("feature_spec"));
  file.manifest = doc.at("manifest");
  const auto kind = doc.at("kind").get<std::string>();
  const auto& payload = doc.at("payload");
  if (kind == "ensemble") {
    EnsembleModel e;
    e.config = stack_config_from_json(payload.at("stack"));
    e.meta = meta_from_json(payload.at("meta"));
    file.member_files = payload.at("member_files").get<std::vector<std::string>>();
    if (file.member_files.size() != e.config.members.size()) {
      throw DataError("ensemble member file count does not match its members");
    }
    for (std::size_t k = 0; k < file.member_files.size(); ++k) {
      ModelFile m = load_model_file(dir / file.member_files[k]);
      if (!m.member || m.member->kind != e.config.members[k]) {
        throw DataError(fmt::format("member file '{}' does not hold a {} model",
                                    file.member_files[k],
                                    to_string(e.config.members[k])));
      }
      if (m.features != file.features) {
        throw DataError(fmt::format("member file '{}' has different features",
                                    file.member_files[k]));
      }
      e.members.push_back(std::move(*m.member));
    }
    if (e.config.combiner == Combiner::kStacked &&
        e.meta.weights.size() != e.members.size()) {
      throw DataError("meta-learner weight count does not match members");
    }
    file.ensemble = std::move(e);
  } else {
    MemberModel m = member_from_json(payload);
    if (std::string(to_string(m.kind)) != kind) {
      throw DataError(fmt::format("model kind '{}' does not match payload", kind));
    }
    if (m.features != file.features) {
      throw DataError("model payload features differ from the file's features");
    }
    file.member = std::move(m);
  }
  return file;
}

void save_model_file(const std::filesystem::path& path, const ModelFile& file) {
  write_file_atomic(path, model_file_json(file).dump() + "\n");
}

ModelFile load_model_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return model_file_from_json(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: malformed model file: {}", path.string(), e.what()));
  } catch (const InvalidArgument& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<double> model_predict(const ModelFile& file, const Matrix& x,
                                  std::span<const std::size_t> rows) {
  if (file.ensemble) return stack_predict_proba(*file.ensemble, x, rows);
  if (file.member) return predict_member(*file.member, x, rows);
  throw InvalidArgument("model file holds no model");
}

RowPredictor model_row_predictor(const ModelFile& file, const Matrix& x,
                                 std::size_t context_row) {
  if (file.ensemble) return ensemble_row_predictor(*file.ensemble, x, context_row);
  if (file.member) return member_row_predictor(*file.member, x, context_row);
  throw InvalidArgument("model file holds no model");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error( fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error( fmt::format("write to '{}' failed", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error(
                fmt::format("cannot rename '{}': {}", tmp.string(), ec.message()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string model_file_stem(std::string_view model_name) {
  std::string out(model_name);
  std::replace(out.begin(), out.end(), ':', '_');
  return out;
}

}  // namespace wdsguard
