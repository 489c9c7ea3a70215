#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpmsvm/data_pipeline.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/rng.hpp"

namespace tpmsvm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

Dataset RawTable::to_dataset() const {
  Dataset d = Dataset::make(features, labels, static_cast<int>(label_names.size()));
  d.label_names = label_names;
  return d;
}

RawTable load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_csv(in, label_column, path);
}

RawTable parse_csv(std::istream& in, const std::string& label_column, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, source + ": missing header row");
  const auto header = split_fields(line);
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end()) throw Error(ErrorCode::ParseError, source + ": no label column '" + label_column + "'");
  const auto label_at = static_cast<std::size_t>(it - header.begin());

  RawTable t;
  t.label_column = label_column;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != label_at) t.feature_names.push_back(header[j]);
  const auto n = static_cast<Eigen::Index>(t.feature_names.size());

  std::vector<double> values;
  std::map<std::string, int> ids;
  int row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError, source + ": line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, header has " +
                                             std::to_string(header.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_at) continue;
      double v = 0.0;
      if (!parse_double(fields[j], v))
        throw Error(ErrorCode::ParseError, source + ": row " + std::to_string(row + 1) + ", column " +
                                               std::to_string(j + 1) + ": '" + fields[j] + "' is not a number");
      values.push_back(v);
    }
    const std::string& label = fields[label_at];
    if (label.empty())
      throw Error(ErrorCode::ParseError, source + ": row " + std::to_string(row + 1) + " has no label");
    auto [pos, inserted] = ids.emplace(label, static_cast<int>(t.label_names.size()) + 1);
    if (inserted) t.label_names.push_back(label);
    t.labels.push_back(pos->second);
    ++row;
  }
  t.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), row, n);
  return t;
}

Matrix ScalingParams::apply(const MatrixRef& X, bool clamp) const {
  if (X.cols() != min.size()) throw Error(ErrorCode::InvalidInput, "scaling fitted on a different feature count");
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double range = max[j] - min[j];
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double v = range > 0.0 ? (X(i, j) - min[j]) / range : 0.0;
      if (clamp) v = std::clamp(v, 0.0, 1.0);
      out(i, j) = v;
    }
  }
  return out;
}

std::string to_string(ScalingMode mode) { return mode == ScalingMode::WholeDataset ? "whole" : "train"; }

ScalingMode parse_scaling_mode(const std::string& name) {
  if (name == "whole") return ScalingMode::WholeDataset;
  if (name == "train") return ScalingMode::FitOnTrain;
  throw Error(ErrorCode::InvalidInput, "scaling mode must be whole or train, got '" + name + "'");
}

ScalingParams fit_unit_interval(const MatrixRef& X, std::vector<std::string>* warnings) {
  if (X.rows() == 0) throw Error(ErrorCode::InvalidInput, "cannot fit scaling on zero rows");
  ScalingParams p;
  p.min = X.colwise().minCoeff().transpose();
  p.max = X.colwise().maxCoeff().transpose();
  if (warnings)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      if (p.max[j] == p.min[j]) warnings->push_back("feature " + std::to_string(j + 1) + " is constant; mapped to 0");
  return p;
}

ScaledTable scale_unit_interval(const RawTable& table, ScalingMode mode, const std::vector<int>& train_rows) {
  ScaledTable out;
  out.table = table;
  if (mode == ScalingMode::WholeDataset) {
    out.params = fit_unit_interval(table.features, &out.warnings);
    out.table.features = out.params.apply(table.features, false);
  } else {
    if (train_rows.empty()) throw Error(ErrorCode::InvalidInput, "fit-on-train scaling needs the training rows");
    out.params = fit_unit_interval(table.features(train_rows, Eigen::all), &out.warnings);
    out.table.features = out.params.apply(table.features, true);
  }
  return out;
}

std::vector<int> SplitPlan::train() const {
  std::vector<int> out;
  for (const auto& rows : train_per_class) out.insert(out.end(), rows.begin(), rows.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> SplitPlan::test(int m) const {
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (int i : train()) used[static_cast<std::size_t>(i)] = true;
  std::vector<int> out;
  for (int i = 0; i < m; ++i)
    if (!used[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

std::uint64_t class_shuffle_seed(std::uint64_t seed, int c) {
  SplitMix64 rng(seed);
  std::uint64_t s = 0;
  for (int k = 0; k < c; ++k) s = rng.next();
  return s;
}

SplitPlan stratified_split(const std::vector<int>& labels, int num_classes, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidInput, "train fraction must lie in (0, 1)");
  SplitPlan plan;
  plan.seed = seed;
  plan.fraction = fraction;
  plan.train_per_class.resize(static_cast<std::size_t>(num_classes));
  for (int c = 1; c <= num_classes; ++c) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) rows.push_back(static_cast<int>(i));
    if (rows.size() < 2)
      throw Error(ErrorCode::SplitError, "class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                                             " samples; at least 2 are needed");
    SplitMix64 rng(class_shuffle_seed(seed, c));
    rng.shuffle(std::span<int>(rows));
    const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows.size()) + 0.5));
    rows.resize(std::min(keep, rows.size()));
    plan.train_per_class[static_cast<std::size_t>(c - 1)] = std::move(rows);
  }
  return plan;
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, source + ": line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ParseError, source + ": line " + std::to_string(line_no) + " has no key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_key_values(in, path);
}

std::map<std::string, DatasetEntry> load_manifest(const std::string& path) {
  const auto kv = read_key_values(path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::map<std::string, DatasetEntry> out;
  for (const auto& [key, value] : kv) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) throw Error(ErrorCode::ParseError, path + ": key '" + key + "' lacks a field");
    const std::string name = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (field == "path") {
      const std::filesystem::path p(value);
      out[name].path = (p.is_absolute() ? p : dir / p).string();
    } else if (field == "label") {
      out[name].label_column = value;
    } else {
      throw Error(ErrorCode::ParseError, path + ": unknown field '" + field + "'");
    }
  }
  for (const auto& [name, entry] : out)
    if (entry.path.empty() || entry.label_column.empty())
      throw Error(ErrorCode::ParseError, path + ": dataset '" + name + "' needs both path and label");
  return out;
}

}  // namespace tpmsvm
