#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tpmsvm/dataset.hpp"

namespace tpmsvm {

struct RawTable {
  std::vector<std::string> feature_names;
  std::string label_column;
  Matrix features;
  std::vector<int> labels;               // 1..C in first-appearance order
  std::vector<std::string> label_names;  // label_names[c-1] is the text of class c

  int size() const { return static_cast<int>(features.rows()); }
  Dataset to_dataset() const;
};

/// Comma-separated, one header row, '.' decimal point.
RawTable load_csv(const std::string& path, const std::string& label_column);
RawTable parse_csv(std::istream& in, const std::string& label_column, const std::string& source = "<stream>");

/// Per-feature bounds of the rows the scaling was fitted on.
struct ScalingParams {
  Vector min;
  Vector max;

  /// x -> (x - min) / (max - min); constant features map to 0. `clamp` limits the result to [0, 1].
  Matrix apply(const MatrixRef& X, bool clamp) const;
};

enum class ScalingMode { WholeDataset, FitOnTrain };

std::string to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(const std::string& name);

ScalingParams fit_unit_interval(const MatrixRef& X, std::vector<std::string>* warnings = nullptr);

struct ScaledTable {
  RawTable table;
  ScalingParams params;
  std::vector<std::string> warnings;
};

/// Whole-dataset mode fits on every row. Fit-on-train fits on `train_rows`
/// and clamps all other rows into [0, 1].
ScaledTable scale_unit_interval(const RawTable& table, ScalingMode mode, const std::vector<int>& train_rows = {});

struct SplitPlan {
  std::uint64_t seed = 0;
  double fraction = 0.75;
  std::vector<std::vector<int>> train_per_class;  // shuffled order, one list per class

  std::vector<int> train() const;  // ascending
  std::vector<int> test(int m) const;  // ascending complement of train() in 0..m-1
};

/// Per class, shuffles the class's row indices with a generator derived from
/// `seed` and keeps the first round-half-up(fraction * m_c) for training.
SplitPlan stratified_split(const std::vector<int>& labels, int num_classes, double fraction, std::uint64_t seed);

/// Seed of the shuffle for class c (1-based): the c-th output of SplitMix64(seed).
std::uint64_t class_shuffle_seed(std::uint64_t seed, int c);

/// Flat `key = value` lines; '#' starts a comment; blank lines are ignored.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source = "<stream>");
std::map<std::string, std::string> read_key_values(const std::string& path);

struct DatasetEntry {
  std::string path;  // resolved against the manifest's directory
  std::string label_column;
};

/// Manifest entries `<name>.path` and `<name>.label`.
std::map<std::string, DatasetEntry> load_manifest(const std::string& path);

}  // namespace tpmsvm
