#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpmsvm/bench.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/predict.hpp"

namespace tpmsvm {

namespace {

struct KindInfo {
  const char* token;
  KernelFamily family;
  int degree;
  bool parameter;
};

constexpr KindInfo kKinds[] = {
    {"linear", KernelFamily::Linear, 1, false},
    {"hom-poly2", KernelFamily::HomogeneousPolynomial, 2, false},
    {"hom-poly3", KernelFamily::HomogeneousPolynomial, 3, false},
    {"inhom-poly1", KernelFamily::InhomogeneousPolynomial, 1, true},
    {"inhom-poly2", KernelFamily::InhomogeneousPolynomial, 2, true},
    {"inhom-poly3", KernelFamily::InhomogeneousPolynomial, 3, true},
    {"gaussian", KernelFamily::Gaussian, 1, true},
};

const KindInfo& info(const std::string& token) {
  for (const auto& k : kKinds)
    if (token == k.token) return k;
  throw Error(ErrorCode::InvalidInput, "unknown model '" + token + "'");
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int j = lo; j <= hi; ++j) out.push_back(std::ldexp(1.0, j));
  return out;
}

double parse_real(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(v))
    throw Error(ErrorCode::ParseError, key + ": '" + text + "' is not a number");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_real(key, s));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<UncertaintySpec> uncertainty_for(const ExperimentConfig& config, int m) {
  if (!config.robust) return std::nullopt;
  const auto& r = *config.robust;
  if (config.model.is_kernel() && r.radius == RadiusMode::Direct) return UncertaintySpec::uniform_direct(r.p, r.eps, m);
  return UncertaintySpec::uniform(r.p, r.eps, m);
}

// True when a beats b under the selection order.
bool better(const GridEvaluation& a, const GridEvaluation& b) {
  if (a.train_accuracy != b.train_accuracy) return a.train_accuracy > b.train_accuracy;
  if (a.point.alpha != b.point.alpha) return a.point.alpha < b.point.alpha;
  if (a.point.ratio != b.point.ratio) return a.point.ratio < b.point.ratio;
  return a.point.parameter < b.point.parameter;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

const char* kSummaryHeader = "table,row,column,dataset,model,rule,p,eps,runs,mean,std,best";

std::string eps_label(double eps) {
  std::ostringstream s;
  s << eps;
  return s.str();
}

}  // namespace

bool ModelKind::has_parameter() const { return info(token).parameter; }

KernelSpec ModelKind::kernel(double parameter) const {
  const auto& k = info(token);
  switch (k.family) {
    case KernelFamily::HomogeneousPolynomial: return KernelSpec::homogeneous_polynomial(k.degree);
    case KernelFamily::InhomogeneousPolynomial: return KernelSpec::inhomogeneous_polynomial(k.degree, parameter);
    case KernelFamily::Gaussian: return KernelSpec::gaussian(parameter);
    default: return KernelSpec::linear();
  }
}

ModelKind ModelKind::parse(const std::string& token) {
  info(token);
  return ModelKind{token};
}

std::vector<std::string> ModelKind::tokens() {
  std::vector<std::string> out;
  for (const auto& k : kKinds) out.emplace_back(k.token);
  return out;
}

std::string to_string(RadiusMode mode) { return mode == RadiusMode::Direct ? "direct" : "mapped"; }

RadiusMode parse_radius_mode(const std::string& name) {
  if (name == "direct") return RadiusMode::Direct;
  if (name == "mapped") return RadiusMode::Mapped;
  throw Error(ErrorCode::InvalidInput, "feature radius mode must be direct or mapped, got '" + name + "'");
}

ExperimentConfig::ExperimentConfig()
    : alphas(powers_of_two(-6, 6)), nu_ratios{0.1, 0.3, 0.5, 0.7, 0.9}, parameters(powers_of_two(-4, 4)) {}

void ExperimentConfig::validate() const {
  auto positive = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw Error(ErrorCode::InvalidInput, std::string(name) + " grid is empty");
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x))
        throw Error(ErrorCode::InvalidInput, std::string(name) + " grid values must be positive and finite");
  };
  positive(alphas, "alpha");
  positive(nu_ratios, "nu/alpha");
  for (double r : nu_ratios)
    if (r > 1.0) throw Error(ErrorCode::InvalidInput, "nu/alpha grid values must not exceed 1");
  if (model.has_parameter()) positive(parameters, "kernel parameter");
  if (runs < 1) throw Error(ErrorCode::InvalidInput, "runs must be at least 1");
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidInput, "train fraction must lie in (0, 1)");
  if (robust && !(robust->eps >= 0.0 && std::isfinite(robust->eps)))
    throw Error(ErrorCode::InvalidInput, "robust eps must be finite and nonnegative");
}

std::size_t ExperimentConfig::grid_size() const {
  return alphas.size() * nu_ratios.size() * (model.has_parameter() ? parameters.size() : 1);
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "dataset") {
      dataset = value;
    } else if (key == "manifest") {
      manifest = value;
    } else if (key == "model") {
      model = ModelKind::parse(value);
    } else if (key == "rule") {
      rule = parse_decision_rule(value);
    } else if (key == "runs") {
      const double r = parse_real(key, value);
      if (r != std::floor(r) || r < 1 || r > 1e6) throw Error(ErrorCode::ParseError, "runs must be a positive integer");
      runs = static_cast<int>(r);
    } else if (key == "seed") {
      char* end = nullptr;
      seed = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || *end != '\0') throw Error(ErrorCode::ParseError, "seed must be an unsigned integer");
    } else if (key == "fraction") {
      fraction = parse_real(key, value);
    } else if (key == "scaling") {
      scaling = parse_scaling_mode(value);
    } else if (key == "grid.alpha") {
      alphas = parse_reals(key, value);
    } else if (key == "grid.nu_ratio") {
      nu_ratios = parse_reals(key, value);
    } else if (key == "grid.param") {
      parameters = parse_reals(key, value);
    } else if (key == "robust.p") {
      if (!robust) robust.emplace();
      robust->p = parse_norm_order(value);
    } else if (key == "robust.eps") {
      if (!robust) robust.emplace();
      robust->eps = parse_real(key, value);
    } else if (key == "robust.feature_radius") {
      if (!robust) robust.emplace();
      robust->radius = parse_radius_mode(value);
    } else {
      throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
    }
  }
}

std::vector<GridPoint> grid_points(const ExperimentConfig& config) {
  const std::vector<double> params = config.model.has_parameter() ? config.parameters : std::vector<double>{0.0};
  std::vector<GridPoint> out;
  for (double param : params)
    for (double alpha : config.alphas)
      for (double ratio : config.nu_ratios) out.push_back({alpha, ratio * alpha, ratio, param});
  return out;
}

GridResult grid_search(const Dataset& train, const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  const auto uncertainty = uncertainty_for(config, train.size());
  GridResult result;
  std::optional<KernelCache> cache;
  double cached_param = 0.0;
  int best = -1;
  for (const GridPoint& point : grid_points(config)) {
    GridEvaluation eval;
    eval.point = point;
    std::optional<KernelSpec> kernel;
    TrainOptions opts = options;
    if (config.model.is_kernel()) {
      kernel = config.model.kernel(point.parameter);
      if (!cache || cached_param != point.parameter) {
        try {
          cache = KernelCache::build(*kernel, train.features);
        } catch (const Error& e) {
          cache.reset();
          eval.error = e.what();
          result.evaluations.push_back(std::move(eval));
          continue;
        }
        cached_param = point.parameter;
      }
      opts.cache = &*cache;
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      MulticlassModel model = train_multiclass(train, Hyperparams{point.nu, point.alpha}, kernel, uncertainty,
                                               config.rule, opts);
      eval.train_seconds = seconds_since(start);
      eval.train_accuracy = accuracy(classify_batch(model, train.features), train.labels);
      eval.ok = true;
      if (best < 0 || better(eval, result.evaluations[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(result.evaluations.size());
        result.model = std::move(model);
      }
    } catch (const Error& e) {
      eval.error = e.what();
    }
    result.evaluations.push_back(std::move(eval));
  }
  if (best < 0) {
    std::string msg = "no grid point could be trained";
    for (const auto& e : result.evaluations) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "\n  alpha=%g nu=%g param=%g: ", e.point.alpha, e.point.nu, e.point.parameter);
      msg += buf + e.error;
    }
    throw Error(ErrorCode::HarnessError, msg);
  }
  const auto& chosen = result.evaluations[static_cast<std::size_t>(best)];
  result.best = chosen.point;
  result.train_accuracy = chosen.train_accuracy;
  result.train_seconds = chosen.train_seconds;
  result.model.label_names = train.label_names;
  return result;
}

std::pair<double, double> mean_stddev(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

RawTable load_dataset(const ExperimentConfig& config) {
  const auto manifest = load_manifest(config.manifest);
  const auto it = manifest.find(config.dataset);
  if (it == manifest.end())
    throw Error(ErrorCode::HarnessError, "dataset '" + config.dataset + "' is not in " + config.manifest);
  return load_csv(it->second.path, it->second.label_column);
}

Summary run_repeated_experiment(const ExperimentConfig& config, const RawTable& table,
                                const std::function<void(const RunRecord&)>& progress) {
  config.validate();
  Summary summary;
  summary.config = config;
  const int C = static_cast<int>(table.label_names.size());
  std::optional<Dataset> whole;
  if (config.scaling == ScalingMode::WholeDataset)
    whole = scale_unit_interval(table, ScalingMode::WholeDataset).table.to_dataset();
  std::vector<double> tests, times;
  for (int r = 0; r < config.runs; ++r) {
    RunRecord rec;
    rec.run = r;
    rec.seed = config.seed + static_cast<std::uint64_t>(r);
    try {
      const SplitPlan plan = stratified_split(table.labels, C, config.fraction, rec.seed);
      const auto train_rows = plan.train();
      const auto test_rows = plan.test(table.size());
      const Dataset data =
          whole ? *whole : scale_unit_interval(table, ScalingMode::FitOnTrain, train_rows).table.to_dataset();
      const Dataset train = data.subset(train_rows);
      const Dataset test = data.subset(test_rows);
      const GridResult g = grid_search(train, config);
      rec.chosen = g.best;
      rec.train_accuracy = g.train_accuracy;
      rec.train_seconds = g.train_seconds;
      rec.test_accuracy = accuracy(classify_batch(g.model, test.features), test.labels);
    } catch (const Error& e) {
      throw Error(e.code(), "run " + std::to_string(r) + " (seed " + std::to_string(rec.seed) + "): " + e.what());
    }
    tests.push_back(rec.test_accuracy);
    times.push_back(rec.train_seconds);
    summary.records.push_back(rec);
    if (progress) progress(rec);
  }
  std::tie(summary.mean, summary.stddev) = mean_stddev(tests);
  summary.mean_train_seconds = mean_stddev(times).first;
  return summary;
}

Summary run_repeated_experiment(const ExperimentConfig& config, const std::function<void(const RunRecord&)>& progress) {
  return run_repeated_experiment(config, load_dataset(config), progress);
}

std::vector<Summary> robust_sweep(const ExperimentConfig& base, const RawTable& table, const std::vector<NormOrder>& ps,
                                  const std::vector<double>& epss, const std::function<void(const Summary&)>& done) {
  if (ps.empty() || epss.empty()) throw Error(ErrorCode::InvalidInput, "sweep needs at least one p and one eps");
  std::vector<Summary> out;
  for (NormOrder p : ps)
    for (double eps : epss) {
      ExperimentConfig cell = base;
      RobustBlock r = base.robust.value_or(RobustBlock{});
      r.p = p;
      r.eps = eps;
      cell.robust = r;
      out.push_back(run_repeated_experiment(cell, table));
      if (done) done(out.back());
    }
  return out;
}

ReportEntry accuracy_entry(const Summary& s) {
  ReportEntry e;
  e.dataset = s.config.dataset;
  e.model = s.config.model.token;
  e.rule = to_string(s.config.rule);
  e.p = s.config.robust ? to_string(s.config.robust->p) : "-";
  e.eps = s.config.robust ? s.config.robust->eps : 0.0;
  e.runs = static_cast<int>(s.records.size());
  e.mean = s.mean;
  e.stddev = s.stddev;
  e.mean_train_seconds = s.mean_train_seconds;
  e.table = s.config.robust ? e.rule + " p=" + e.p + " eps=" + eps_label(e.eps) : e.rule;
  e.row = e.dataset;
  e.column = e.model;
  return e;
}

ReportEntry sweep_entry(const Summary& s) {
  ReportEntry e = accuracy_entry(s);
  e.table = e.dataset + " " + e.model + " " + e.rule;
  e.row = s.config.robust ? "p=" + e.p : "deterministic";
  e.column = s.config.robust ? "eps=" + eps_label(e.eps) : "deterministic";
  return e;
}

void mark_best(std::vector<ReportEntry>& entries) {
  std::map<std::pair<std::string, std::string>, double> top;
  for (const auto& e : entries) {
    auto [it, inserted] = top.emplace(std::make_pair(e.table, e.row), e.mean);
    if (!inserted) it->second = std::max(it->second, e.mean);
  }
  for (auto& e : entries) e.best = e.mean == top.at({e.table, e.row});
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_summary_csv(const std::vector<ReportEntry>& entries, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& e : entries) {
    out << csv_field(e.table) << ',' << csv_field(e.row) << ',' << csv_field(e.column) << ',' << csv_field(e.dataset)
        << ',' << csv_field(e.model) << ',' << csv_field(e.rule) << ',' << csv_field(e.p) << ','
        << format_number(e.eps) << ',' << e.runs << ',' << format_number(e.mean) << ',' << format_number(e.stddev)
        << ',' << (e.best ? 1 : 0) << '\n';
  }
}

void write_timing_csv(const std::vector<ReportEntry>& entries, std::ostream& out) {
  out << "table,row,column,mean_train_seconds\n";
  for (const auto& e : entries)
    out << csv_field(e.table) << ',' << csv_field(e.row) << ',' << csv_field(e.column) << ','
        << format_number(e.mean_train_seconds) << '\n';
}

void write_markdown(const std::vector<ReportEntry>& entries, std::ostream& out) {
  std::vector<std::string> tables;
  for (const auto& e : entries)
    if (std::find(tables.begin(), tables.end(), e.table) == tables.end()) tables.push_back(e.table);
  bool first = true;
  for (const auto& t : tables) {
    std::vector<std::string> rows, cols;
    std::map<std::pair<std::string, std::string>, const ReportEntry*> cell;
    for (const auto& e : entries) {
      if (e.table != t) continue;
      if (std::find(rows.begin(), rows.end(), e.row) == rows.end()) rows.push_back(e.row);
      if (std::find(cols.begin(), cols.end(), e.column) == cols.end()) cols.push_back(e.column);
      cell[{e.row, e.column}] = &e;
    }
    if (!first) out << '\n';
    first = false;
    out << "### " << t << "\n\n|  |";
    for (const auto& c : cols) out << ' ' << c << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& r : rows) {
      out << "| " << r << " |";
      for (const auto& c : cols) {
        const auto it = cell.find({r, c});
        if (it == cell.end()) {
          out << "  |";
          continue;
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f ± %.2f", it->second->mean, it->second->stddev);
        out << ' ' << (it->second->best ? "**" + std::string(buf) + "**" : std::string(buf)) << " |";
      }
      out << '\n';
    }
  }
}

std::vector<ReportEntry> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader)
    throw Error(ErrorCode::ParseError, "summary CSV must start with '" + std::string(kSummaryHeader) + "'");
  std::vector<ReportEntry> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv_fields(line);
    if (f.size() != 12)
      throw Error(ErrorCode::ParseError, "summary CSV line " + std::to_string(line_no) + " has " +
                                             std::to_string(f.size()) + " fields");
    ReportEntry e;
    e.table = f[0];
    e.row = f[1];
    e.column = f[2];
    e.dataset = f[3];
    e.model = f[4];
    e.rule = f[5];
    e.p = f[6];
    e.eps = parse_real("eps", f[7]);
    e.runs = static_cast<int>(parse_real("runs", f[8]));
    e.mean = parse_real("mean", f[9]);
    e.stddev = parse_real("std", f[10]);
    e.best = f[11] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

void emit_report(const std::vector<ReportEntry>& entries, const std::string& dir, const std::string& stem) {
  if (entries.empty()) throw Error(ErrorCode::InvalidInput, "nothing to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto base = std::filesystem::path(dir) / stem;
  auto write = [](const std::filesystem::path& path, const auto& fn) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    fn(out);
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
  };
  write(base.string() + ".csv", [&](std::ostream& o) { write_summary_csv(entries, o); });
  write(base.string() + ".md", [&](std::ostream& o) { write_markdown(entries, o); });
  write(base.string() + "_timing.csv", [&](std::ostream& o) { write_timing_csv(entries, o); });
}

}  // namespace tpmsvm
