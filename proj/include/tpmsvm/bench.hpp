#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpmsvm/data_pipeline.hpp"
#include "tpmsvm/model.hpp"
#include "tpmsvm/trainer.hpp"

namespace tpmsvm {

/// Classifier column of the accuracy tables: linear, hom-poly2, hom-poly3,
/// inhom-poly1, inhom-poly2, inhom-poly3 or gaussian.
struct ModelKind {
  std::string token = "linear";

  bool is_kernel() const { return token != "linear"; }
  /// Whether the grid searches a kernel parameter (gamma or sigma).
  bool has_parameter() const;
  /// Kernel for one value of the searched parameter (ignored when there is none).
  KernelSpec kernel(double parameter) const;

  static ModelKind parse(const std::string& token);
  static std::vector<std::string> tokens();
};

/// How kernel models turn input radii into feature-space radii.
enum class RadiusMode { Direct, Mapped };

std::string to_string(RadiusMode mode);
RadiusMode parse_radius_mode(const std::string& name);

struct RobustBlock {
  NormOrder p = NormOrder::L2;
  double eps = 0.0;
  RadiusMode radius = RadiusMode::Direct;
};

struct ExperimentConfig {
  std::string dataset = "iris";
  std::string manifest = "data/datasets.cfg";
  ModelKind model;
  DecisionRule rule = DecisionRule::Argmin;
  std::optional<RobustBlock> robust;
  std::vector<double> alphas;      // default 2^-6 .. 2^6
  std::vector<double> nu_ratios;   // default 0.1, 0.3, 0.5, 0.7, 0.9
  std::vector<double> parameters;  // default 2^-4 .. 2^4
  int runs = 50;
  std::uint64_t seed = 1;
  double fraction = 0.75;
  ScalingMode scaling = ScalingMode::WholeDataset;

  ExperimentConfig();
  /// Throws InvalidInput on empty grids, nonpositive grid values or runs < 1.
  void validate() const;
  /// Number of grid points: alphas x ratios x (parameters, or 1).
  std::size_t grid_size() const;
  /// Overrides fields from flat keys (dataset, manifest, model, rule, runs, seed,
  /// fraction, scaling, grid.alpha, grid.nu_ratio, grid.param, robust.p,
  /// robust.eps, robust.feature_radius). Unknown keys throw ParseError.
  void apply(const std::map<std::string, std::string>& kv);
};

struct GridPoint {
  double alpha = 0.0;
  double nu = 0.0;
  double ratio = 0.0;
  double parameter = 0.0;  // 0 when the model has none
};

struct GridEvaluation {
  GridPoint point;
  bool ok = false;
  double train_accuracy = 0.0;
  double train_seconds = 0.0;
  std::string error;
};

struct GridResult {
  GridPoint best;
  double train_accuracy = 0.0;
  double train_seconds = 0.0;  // wall clock to train the selected model
  MulticlassModel model;
  std::vector<GridEvaluation> evaluations;  // grid order
};

/// All points of the configured grid, kernel parameter outermost, then alpha, then ratio.
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

/// Trains at every grid point and keeps the one with the highest training accuracy;
/// ties go to the smaller alpha, then smaller ratio, then smaller kernel parameter.
/// Throws HarnessError when no point trains.
GridResult grid_search(const Dataset& train, const ExperimentConfig& config, const TrainOptions& options = {});

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  GridPoint chosen;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double train_seconds = 0.0;
};

struct Summary {
  ExperimentConfig config;
  std::vector<RunRecord> records;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
  double mean_train_seconds = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_stddev(const std::vector<double>& values);

/// Run r uses seed base + r: split, scale, grid search, test accuracy.
Summary run_repeated_experiment(const ExperimentConfig& config, const RawTable& table,
                                const std::function<void(const RunRecord&)>& progress = {});
/// Loads the configured dataset through the manifest first.
Summary run_repeated_experiment(const ExperimentConfig& config,
                                const std::function<void(const RunRecord&)>& progress = {});

RawTable load_dataset(const ExperimentConfig& config);

/// One summary per (p, eps) cell, p outermost. The deterministic experiment is not included.
std::vector<Summary> robust_sweep(const ExperimentConfig& base, const RawTable& table,
                                  const std::vector<NormOrder>& ps, const std::vector<double>& epss,
                                  const std::function<void(const Summary&)>& done = {});

/// One line of a report: a cell of a table.
struct ReportEntry {
  std::string table;
  std::string row;
  std::string column;
  std::string dataset;
  std::string model;
  std::string rule;
  std::string p;  // "-" for deterministic cells
  double eps = 0.0;
  int runs = 0;
  double mean = 0.0;
  double stddev = 0.0;
  bool best = false;  // highest mean in its (table, row)
  double mean_train_seconds = 0.0;  // timing file only
};

/// Accuracy table entry: table = rule, row = dataset, column = model.
ReportEntry accuracy_entry(const Summary& s);
/// Sweep entry: table = dataset/model/rule, row = p, column = eps.
ReportEntry sweep_entry(const Summary& s);

/// Sets `best` on the highest-mean entry of every (table, row); ties flag all.
void mark_best(std::vector<ReportEntry>& entries);

void write_summary_csv(const std::vector<ReportEntry>& entries, std::ostream& out);
void write_timing_csv(const std::vector<ReportEntry>& entries, std::ostream& out);
void write_markdown(const std::vector<ReportEntry>& entries, std::ostream& out);
std::vector<ReportEntry> read_summary_csv(std::istream& in);

/// Writes <dir>/<stem>.csv, <stem>.md and <stem>_timing.csv. Throws IoError.
void emit_report(const std::vector<ReportEntry>& entries, const std::string& dir, const std::string& stem);

/// Fixed 17-significant-digit decimal form used by every report.
std::string format_number(double v);

}  // namespace tpmsvm
